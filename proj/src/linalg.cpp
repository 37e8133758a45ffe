#include "grasp/linalg.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace grasp::nn {

namespace {
std::atomic<bool> g_parallel{true};
// Below this many output elements the fork overhead dominates.
constexpr std::size_t kParallelThreshold = 4096;
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void set_num_threads(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

void matmul_bt(const Matrix& x, const Matrix& w, Matrix& out) {
    assert(x.cols == w.cols);
    out = Matrix(x.rows, w.rows);
    const int n = x.rows, m = w.rows, k = x.cols;
    const bool par = parallel_enabled() &&
                     static_cast<std::size_t>(n) * m * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
    for (int i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        for (int j = 0; j < m; ++j) oi[j] = dot(xi, w.row(j), k);
    }
}

void matmul_bt_serial(const Matrix& x, const Matrix& w, Matrix& out) {
    assert(x.cols == w.cols);
    out = Matrix(x.rows, w.rows);
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        for (int j = 0; j < w.rows; ++j) oi[j] = dot(xi, w.row(j), x.cols);
    }
}

void matmul_at_accum(const Matrix& d, const Matrix& x, Matrix& out) {
    assert(d.rows == x.rows && out.rows == d.cols && out.cols == x.cols);
    const int n = d.rows, m = d.cols, k = x.cols;
    const bool par = parallel_enabled() &&
                     static_cast<std::size_t>(n) * m * k >= kParallelThreshold;
    // Parallel over output rows j; each accumulates its own slice.
#pragma omp parallel for schedule(static) if (par)
    for (int j = 0; j < m; ++j) {
        double* oj = out.row(j);
        for (int i = 0; i < n; ++i) axpy(d.at(i, j), x.row(i), oj, k);
    }
}

void matmul_accum(const Matrix& d, const Matrix& w, Matrix& out) {
    assert(d.cols == w.rows && out.rows == d.rows && out.cols == w.cols);
    const int n = d.rows, m = d.cols, k = w.cols;
    const bool par = parallel_enabled() &&
                     static_cast<std::size_t>(n) * m * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
    for (int i = 0; i < n; ++i) {
        double* oi = out.row(i);
        const double* di = d.row(i);
        for (int j = 0; j < m; ++j) axpy(di[j], w.row(j), oi, k);
    }
}

}  // namespace grasp::nn
