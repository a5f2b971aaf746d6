#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace dnprobe {

inline constexpr const char* kWorkersEnv = "DNPROBE_WORKERS";

/// Worker count from DNPROBE_WORKERS (default 1).
inline int worker_count() {
    const char* v = std::getenv(kWorkersEnv);
    if (!v || !*v) return 1;
    try {
        return std::max(1, std::stoi(v));
    } catch (const std::exception&) {
        return 1;
    }
}

/// Evaluates f(0..n-1) on a bounded pool; results keep index order, the
/// first exception (lowest index) is rethrown.
template <class F>
auto parallel_map(std::size_t n, F&& f, int workers = worker_count()) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t pool = std::min<std::size_t>(std::max(1, workers), n);
    auto collect = [&] {
        std::vector<R> out;
        out.reserve(n);
        for (auto& s : slots) out.push_back(std::move(*s));
        return out;
    };
    if (pool <= 1) {
        for (std::size_t i = 0; i < n; ++i) slots[i].emplace(f(i));
        return collect();
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(run);
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return collect();
}

}  // namespace dnprobe
