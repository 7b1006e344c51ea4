#include "hgnn/kernels.hpp"

#include <omp.h>

#include <cstdint>

namespace hgnn::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelThreshold = 1 << 14;

inline bool worth_parallel(std::size_t work) {
    return work >= kParallelThreshold && omp_get_max_threads() > 1;
}

inline double nn_entry(const double* a, const double* b, std::size_t i, std::size_t j,
                       std::size_t k, std::size_t n) {
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * n + j];
    return s;
}

inline double tn_entry(const double* a, const double* b, std::size_t i, std::size_t j,
                       std::size_t m, std::size_t k, std::size_t n) {
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += a[t * m + i] * b[t * n + j];
    return s;
}

inline double nt_entry(const double* a, const double* b, std::size_t i, std::size_t j,
                       std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[j * k + t];
    return s;
}

inline double col_distance(const double* x, std::size_t d, std::size_t n, std::size_t j,
                           std::size_t l) {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        const double diff = x[r * n + j] - x[r * n + l];
        s += diff * diff;
    }
    return s;
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (worth_parallel(m * k * n))
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = nn_entry(a, b, i, j, k, n);
    }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (worth_parallel(m * k * n))
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = tn_entry(a, b, i, j, m, k, n);
    }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (worth_parallel(m * k * n))
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = nt_entry(a, b, i, j, k);
    }
}

void pairwise_sq_distances(const double* x, std::size_t d, std::size_t n, double* out) {
    const auto cols = static_cast<std::int64_t>(n);
    // Each row j owns the upper-triangle entries (j, l>j) and mirrors them.
#pragma omp parallel for schedule(dynamic, 8) if (worth_parallel(n * n * d / 2))
    for (std::int64_t j = 0; j < cols; ++j) {
        out[j * n + j] = 0.0;
        for (std::size_t l = j + 1; l < n; ++l) {
            const double s = col_distance(x, d, n, j, l);
            out[j * n + l] = s;
            out[l * n + j] = s;
        }
    }
}

namespace reference {

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = nn_entry(a, b, i, j, k, n);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = tn_entry(a, b, i, j, m, k, n);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = nt_entry(a, b, i, j, k);
}

void pairwise_sq_distances(const double* x, std::size_t d, std::size_t n, double* out) {
    for (std::size_t j = 0; j < n; ++j) {
        out[j * n + j] = 0.0;
        for (std::size_t l = j + 1; l < n; ++l) {
            const double s = col_distance(x, d, n, j, l);
            out[j * n + l] = s;
            out[l * n + j] = s;
        }
    }
}

}  // namespace reference

}  // namespace hgnn::kernels
