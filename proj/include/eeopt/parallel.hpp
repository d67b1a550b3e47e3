#ifndef EEOPT_PARALLEL_HPP
#define EEOPT_PARALLEL_HPP

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eeopt {

// Execution policy for the data-parallel kernels. Serial is the reference
// implementation; OpenMP must produce bit-identical results for any thread
// count, which every kernel achieves by deriving per-index seeds and folding
// partial results in ascending index order.
enum class Exec { Serial, OpenMP };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// out[i] = f(i) for i in [0, n). Slot-per-index writes keep the result
/// independent of scheduling.
template <class T, class F>
std::vector<T> par_map(std::size_t n, Exec exec, F&& f) {
    std::vector<T> out(n);
    if (exec == Exec::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        return out;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
}

/// In-place variant: f(i) performs the write itself (disjoint slots required).
template <class F>
void par_for(std::size_t n, Exec exec, F&& f) {
    if (exec == Exec::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
        for (long long i = 0; i < static_cast<long long>(n); ++i) f(static_cast<std::size_t>(i));
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) f(i);
}

/// Left fold of f(0), f(1), ... f(n-1) with a fixed (ascending) reduction
/// order. The OpenMP path evaluates the terms in parallel, buffers them, and
/// folds the buffer serially, so both paths sum in the same order and agree
/// bit for bit.
template <class T, class F, class R>
T par_map_reduce(std::size_t n, Exec exec, T init, F&& f, R&& reduce) {
    if (exec == Exec::OpenMP) {
#ifdef _OPENMP
        std::vector<T> vals = par_map<T>(n, exec, f);
        T acc = init;
        for (std::size_t i = 0; i < n; ++i) acc = reduce(acc, vals[i]);
        return acc;
#endif
    }
    T acc = init;
    for (std::size_t i = 0; i < n; ++i) acc = reduce(acc, f(i));
    return acc;
}

}  // namespace eeopt

#endif
