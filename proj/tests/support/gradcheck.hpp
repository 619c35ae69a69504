#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace supra::testing {

/// Tally of analytic vs central-difference comparisons for one operation.
struct GradCheckStats {
    std::string name;
    double tolerance = 0;
    double floor = 0;
    std::size_t instances = 0;
    std::size_t checked = 0;
    std::size_t skipped = 0; ///< coordinates excluded as near-kink
    std::size_t failures = 0;
    double max_rel = 0;

    void compare(double analytic, double numeric);
    bool ok() const noexcept { return failures == 0 && checked > 0; }
};

// Each runs `instances` random instances seeded from `seed` and compares every
// (non-kink) coordinate of the analytic gradient with central differences.
GradCheckStats check_soft_consistency(int instances, std::uint64_t seed);
GradCheckStats check_bce(int instances, std::uint64_t seed);
GradCheckStats check_slic_loss(int instances, std::uint64_t seed);

GradCheckStats check_conv(int instances, std::uint64_t seed);
GradCheckStats check_relu(int instances, std::uint64_t seed);
GradCheckStats check_maxpool(int instances, std::uint64_t seed);
GradCheckStats check_upsample(int instances, std::uint64_t seed);
GradCheckStats check_concat(int instances, std::uint64_t seed);
GradCheckStats check_sigmoid(int instances, std::uint64_t seed);

/// Loss ops (tolerance 1e-4) followed by every layer (tolerance 1e-3).
std::vector<GradCheckStats> check_all_gradients(int instances, std::uint64_t seed);

} // namespace supra::testing
