#pragma once

#include <cstddef>

// Dense matrix kernels backing the policy networks. Every kernel has a
// serial reference implementation and an OpenMP one. Parallelism is always
// over independent output elements, so both backends produce bit-identical
// results for any thread count; the serial versions stay as the oracle for
// tests and the baseline for the benchmark tool.
//
// All matrices are row-major, densely packed.

namespace marlsim::kernels {

enum class Backend { Serial, OpenMP };

void set_backend(Backend b);
Backend backend();

namespace serial {
// C[m x n] = A[m x k] * B[k x n]
void gemm_nn(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n);
// C[m x n] = A[m x k] * B[n x k]^T
void gemm_nt(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n);
// C[m x n] = A[r x m]^T * B[r x n]
void gemm_tn(double* c, const double* a, const double* b,
             std::size_t r, std::size_t m, std::size_t n);
}  // namespace serial

namespace openmp {
void gemm_nn(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(double* c, const double* a, const double* b,
             std::size_t r, std::size_t m, std::size_t n);
}  // namespace openmp

// Dispatching entry points used by the network code.
void gemm_nn(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(double* c, const double* a, const double* b,
             std::size_t r, std::size_t m, std::size_t n);

}  // namespace marlsim::kernels
