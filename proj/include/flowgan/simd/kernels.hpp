#pragma once

// Data-parallel inner loops shared by the network layers and the scoring code.
//
// Each kernel exists twice: a portable scalar reference (simd::scalar) and an
// AVX2+FMA variant (simd::avx2). The free functions in simd:: dispatch to the
// active backend, which is chosen once at startup from CPU features and can be
// overridden with FLOWGAN_SIMD=scalar|avx2 or set_backend().

#include <cstddef>
#include <string_view>

namespace flowgan::simd {

enum class Backend { scalar, avx2 };

enum class Trans { no, yes };

bool cpu_supports_avx2();
Backend active_backend();
// Throws ConfigError when asking for avx2 on a CPU without it.
void set_backend(Backend b);
std::string_view backend_name(Backend b);

// Row-major C = alpha * op(A) * op(B) + beta * C, op(A) is M x K, op(B) is K x N.
// beta == 0 overwrites C without reading it.
#define FLOWGAN_SIMD_DECLARE_KERNELS                                                               \
    void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,        \
              const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,        \
              float* c, std::size_t ldc);                                                          \
    void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,       \
              const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,     \
              double* c, std::size_t ldc);                                                         \
    /* sum_i |a_i - b_i|, accumulated in double */                                                 \
    double abs_diff_sum(const float* a, const float* b, std::size_t n);                            \
    double abs_diff_sum(const double* a, const double* b, std::size_t n);                          \
    /* sum_i sum_j exp(-gamma * (a_i - b_j)^2) */                                                  \
    double rbf_pair_sum(const double* a, std::size_t na, const double* b, std::size_t nb,          \
                        double gamma);

namespace scalar {
FLOWGAN_SIMD_DECLARE_KERNELS
}
namespace avx2 {
FLOWGAN_SIMD_DECLARE_KERNELS
}

FLOWGAN_SIMD_DECLARE_KERNELS

#undef FLOWGAN_SIMD_DECLARE_KERNELS

} // namespace flowgan::simd
