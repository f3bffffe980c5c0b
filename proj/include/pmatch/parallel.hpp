#ifndef PMATCH_PARALLEL_HPP
#define PMATCH_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace pmatch {

inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs task(i) for i in [0, count) on up to `workers` threads and returns the
// results indexed by i. Output never depends on the worker count as long as
// task(i) is a pure function of i. If tasks throw, workers stop picking up new
// indices and the failure with the lowest index among those seen is rethrown.
template <class Task>
auto run_indexed(std::size_t count, std::size_t workers, Task&& task)
    -> std::vector<std::invoke_result_t<Task&, std::size_t>> {
    using Result = std::invoke_result_t<Task&, std::size_t>;
    std::vector<Result> results(count);
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = task(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::atomic<bool> failed{false};
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                results[i] = task(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace pmatch

#endif  // PMATCH_PARALLEL_HPP
