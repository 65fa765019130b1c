#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace asympode {

/// Upper bound on OpenMP threads: ASYMPODE_THREADS if set, else the runtime default.
int thread_limit();
void set_thread_limit(int n);

/// out[i] = fn(i) for i < n, one OpenMP task per index; results keep index order
/// and the first exception (by index) is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(thread_limit())
    for (long i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

/// Serial reference for parallel_map.
template <class Fn>
auto serial_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    std::vector<decltype(fn(std::size_t{}))> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
}

}  // namespace asympode
