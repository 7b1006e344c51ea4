#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version (used by the
// library) and a serial version in `reference` kept for tests and the
// benchmark. Both accumulate each output entry in the same order, so results
// are bit-identical regardless of thread count.

#include <cstddef>

namespace hgnn::kernels {

// c[m x n] = a[m x k] * b[k x n], all row-major.
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
// c[m x n] = a[k x m]^T * b[k x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
// c[m x n] = a[m x k] * b[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);

// out[n x n] with out[j][l] = ||x_j - x_l||^2 where x_j is column j of the
// row-major d x n matrix x. Exactly symmetric with a zero diagonal.
void pairwise_sq_distances(const double* x, std::size_t d, std::size_t n, double* out);

namespace reference {

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
void pairwise_sq_distances(const double* x, std::size_t d, std::size_t n, double* out);

}  // namespace reference

}  // namespace hgnn::kernels
