#pragma once
#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "chart.hpp"

namespace gkpot {

// tensor grid over real brane coordinates
struct GridSpec {
    std::vector<double> lo, hi;
    std::vector<int> count;

    int dims() const { return static_cast<int>(count.size()); }
    size_t size() const {
        size_t s = 1;
        for (int c : count) s *= static_cast<size_t>(c);
        return count.empty() ? 0 : s;
    }
    void validate() const {
        if (lo.size() != count.size() || hi.size() != count.size() || count.empty())
            throw Error(ErrorCode::config, "grid: lo/hi/count lengths differ");
        for (size_t i = 0; i < count.size(); ++i) {
            if (count[i] < 1) throw Error(ErrorCode::config, "grid: counts must be >= 1");
            if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) throw Error(ErrorCode::config, "grid: non-finite range");
        }
    }
    // last axis varies fastest
    Vec point(size_t idx) const {
        Vec u(dims());
        for (int a = dims() - 1; a >= 0; --a) {
            int c = count[a];
            int k = static_cast<int>(idx % c);
            idx /= c;
            u(a) = c == 1 ? lo[a] : lo[a] + (hi[a] - lo[a]) * k / (c - 1);
        }
        return u;
    }
    std::vector<Vec> points() const {
        std::vector<Vec> p(size());
        for (size_t i = 0; i < p.size(); ++i) p[i] = point(i);
        return p;
    }
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes only its own slot,
// so output order never depends on scheduling.
template <class Fn>
void parallel_for(size_t n, int threads, Fn fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<size_t>(n, 1))));
    if (threads == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace gkpot
