#include "supra/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "supra/error.hpp"

namespace supra {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) {
    if (n < 1) throw ParamError("thread count must be >= 1");
    g_threads.store(n);
}

int thread_count() noexcept {
    return g_threads.load();
}

void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t, std::size_t)>& body) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        body(begin, end);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            const std::size_t lo = begin + w * chunk;
            const std::size_t hi = std::min(end, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, w, lo, hi] {
                try {
                    body(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        try {
            body(begin, std::min(end, begin + chunk));
        } catch (...) {
            errors[0] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace supra
