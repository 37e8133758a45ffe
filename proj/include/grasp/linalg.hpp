#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace grasp::nn {

// Row-major dense matrix of doubles. Small enough to live by value.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    void zero() { a.assign(a.size(), 0.0); }
    std::size_t size() const { return a.size(); }
};

using Vector = std::vector<double>;

// Kernels run OpenMP-parallel when enabled (default) and the work is big
// enough to pay for the fork; every output element is written by exactly
// one thread so results are identical to the serial path bit for bit.
bool parallel_enabled();
void set_parallel(bool on);
void set_num_threads(int jobs);  // <=0 leaves the OpenMP default

// out = x * w^T   (x: n x k, w: m x k, out: n x m)
void matmul_bt(const Matrix& x, const Matrix& w, Matrix& out);
// out += d^T * x  (d: n x m, x: n x k, out: m x k); gradient of matmul_bt wrt w
void matmul_at_accum(const Matrix& d, const Matrix& x, Matrix& out);
// out += d * w    (d: n x m, w: m x k, out: n x k); gradient of matmul_bt wrt x
void matmul_accum(const Matrix& d, const Matrix& w, Matrix& out);

// Serial reference implementations, kept for the benchmark and for pinning
// the parallel kernels in tests.
void matmul_bt_serial(const Matrix& x, const Matrix& w, Matrix& out);

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace grasp::nn
