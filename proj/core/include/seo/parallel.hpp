#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace seo {

/// Ordered parallel map: result i always lands at index i, so downstream
/// merges are deterministic for any job count. The lowest-index failure is
/// rethrown, independent of scheduling.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, std::size_t jobs, Fn fn)
    -> std::vector<decltype(fn(items[std::size_t{0}]))> {
    using Out = decltype(fn(items[std::size_t{0}]));
    std::vector<Out> results(items.size());
    if (items.empty()) return results;
    if (jobs <= 1 || items.size() == 1) {
        for (std::size_t i = 0; i < items.size(); ++i) results[i] = fn(items[i]);
        return results;
    }

    std::vector<std::exception_ptr> errors(items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            try {
                results[i] = fn(items[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    const std::size_t workers = std::min(jobs, items.size());
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return results;
}

} // namespace seo
