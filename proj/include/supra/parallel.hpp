#pragma once

#include <cstddef>
#include <functional>

namespace supra {

/// Process-wide worker count used by parallel_for. Defaults to 1.
void set_thread_count(int n);
int thread_count() noexcept;

/// Splits [begin, end) into at most thread_count() contiguous chunks and runs
/// body(chunk_begin, chunk_end) on each. Chunk boundaries depend only on the
/// range and the thread count. Callers must make each index's result
/// independent of how the range is split.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace supra
