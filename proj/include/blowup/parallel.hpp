#pragma once
#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace blowup {

// 0: one worker per hardware thread
inline std::atomic<std::size_t>& thread_limit() {
    static std::atomic<std::size_t> n{0};
    return n;
}

// fn(i) for i in [0, n), dynamic scheduling; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (std::size_t lim = thread_limit().load(); lim > 0) hw = std::min(hw, lim);
    std::size_t nt = std::min(hw, n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < nt; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace blowup
