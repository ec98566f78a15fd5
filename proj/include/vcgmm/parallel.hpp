#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace vcgmm {

// Runs fn(worker, begin, end) over `workers` contiguous slices of [0, n).
// With one worker the call runs inline on the current thread.
template <typename Fn>
void parallel_ranges(std::size_t n, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || n == 0) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    if (workers > n) workers = n;
    const std::size_t chunk = n / workers;
    const std::size_t extra = n % workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
        threads.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
        begin = end;
    }
    for (auto& t : threads) t.join();
}

}  // namespace vcgmm
