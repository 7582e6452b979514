#ifndef FACET_KERNELS_HPP
#define FACET_KERNELS_HPP

#include <cmath>
#include <cstddef>

// Scalar inner kernels shared by the network and clustering code. These stay
// serial; parallelism lives one level up (per sample, per point, per restart)
// where iterations are independent.

namespace facet::kernels {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = A * x, A is rows x cols row-major.
inline void matvec(const double* a, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* arow = a + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += arow[c] * x[c];
        y[r] = acc;
    }
}

// y += A * x.
inline void matvec_add(const double* a, const double* x, double* y,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* arow = a + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += arow[c] * x[c];
        y[r] += acc;
    }
}

// y += A^T * x, A is rows x cols row-major, x has rows entries.
inline void matvec_t_add(const double* a, const double* x, double* y,
                         std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* arow = a + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += arow[c] * xr;
    }
}

// A += u * v^T (outer product accumulate), A is len(u) x len(v).
inline void outer_add(double* a, const double* u, const double* v,
                      std::size_t nu, std::size_t nv) {
    for (std::size_t r = 0; r < nu; ++r) {
        double* arow = a + r * nv;
        const double ur = u[r];
        for (std::size_t c = 0; c < nv; ++c) arow[c] += ur * v[c];
    }
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace facet::kernels

#endif
