#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace blowup {

// worker cap for independent ladder rungs; 1 runs inline
inline int& thread_cap()
{
    static int cap = 1;
    return cap;
}

inline void set_thread_cap(int n) { thread_cap() = std::max(1, n); }

// runs fn(0..n-1); each task writes only its own slot, so results do not
// depend on scheduling
template <class Fn>
void parallel_for(int n, Fn&& fn)
{
    const int workers = std::min(thread_cap(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

} // namespace blowup
