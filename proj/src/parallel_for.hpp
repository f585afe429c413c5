#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace conelqr::detail {

// OpenMP loop over [0, n). An exception thrown by any iteration is rethrown
// on the calling thread after the loop; the remaining iterations still run.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::exception_ptr first;
    std::mutex guard;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

// Serial reference for the loop above; used by tests to compare results.
template <class Fn>
void serial_for(std::size_t n, Fn&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace conelqr::detail
