#include "marlsim/kernels.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace marlsim::kernels {

namespace {

std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::OpenMP
#else
    Backend::Serial
#endif
};

// Problems below this flop count are not worth a parallel region.
constexpr std::size_t kSmallProblem = 1u << 15;

}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

namespace serial {

void gemm_nn(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void gemm_nt(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = acc;
        }
    }
}

void gemm_tn(double* c, const double* a, const double* b,
             std::size_t r, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < r; ++p) acc += a[p * m + i] * b[p * n + j];
            ci[j] = acc;
        }
    }
}

}  // namespace serial

namespace openmp {

// Each output row is owned by one thread and computed with the same inner
// loop as the serial kernel, so results match the serial backend bitwise.

void gemm_nn(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void gemm_nt(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = acc;
        }
    }
}

void gemm_tn(double* c, const double* a, const double* b,
             std::size_t r, std::size_t m, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < r; ++p) acc += a[p * m + i] * b[p * n + j];
            ci[j] = acc;
        }
    }
}

}  // namespace openmp

void gemm_nn(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n) {
    if (backend() == Backend::Serial || m * k * n < kSmallProblem) {
        serial::gemm_nn(c, a, b, m, k, n);
    } else {
        openmp::gemm_nn(c, a, b, m, k, n);
    }
}

void gemm_nt(double* c, const double* a, const double* b,
             std::size_t m, std::size_t k, std::size_t n) {
    if (backend() == Backend::Serial || m * k * n < kSmallProblem) {
        serial::gemm_nt(c, a, b, m, k, n);
    } else {
        openmp::gemm_nt(c, a, b, m, k, n);
    }
}

void gemm_tn(double* c, const double* a, const double* b,
             std::size_t r, std::size_t m, std::size_t n) {
    if (backend() == Backend::Serial || r * m * n < kSmallProblem) {
        serial::gemm_tn(c, a, b, r, m, n);
    } else {
        openmp::gemm_tn(c, a, b, r, m, n);
    }
}

}  // namespace marlsim::kernels
