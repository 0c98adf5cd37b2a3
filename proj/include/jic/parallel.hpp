#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jic {

// Applies fn to every item on a small worker pool and returns results in
// input order, so callers stay deterministic regardless of scheduling. The
// first worker exception is rethrown after all threads join.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, int workers, Fn&& fn)
    -> std::vector<decltype(fn(items.front()))> {
    using Result = decltype(fn(items.front()));
    std::vector<Result> results(items.size());
    if (items.empty()) return results;

    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(items.size())));
    if (pool == 1) {
        for (size_t i = 0; i < items.size(); ++i) results[i] = fn(items[i]);
        return results;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr failure = nullptr;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int t = 0; t < pool; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= items.size()) return;
                try {
                    results[i] = fn(items[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace jic
