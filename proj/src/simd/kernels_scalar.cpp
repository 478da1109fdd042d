#include "flowgan/simd/kernels.hpp"

#include <cmath>

namespace flowgan::simd::scalar {

namespace {

template <typename T>
void gemm_impl(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
               const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
               std::size_t ldc) {
    auto at = [&](std::size_t i, std::size_t p) {
        return ta == Trans::no ? a[i * lda + p] : a[p * lda + i];
    };
    auto bt = [&](std::size_t p, std::size_t j) {
        return tb == Trans::no ? b[p * ldb + j] : b[j * ldb + p];
    };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T acc = 0;
            for (std::size_t p = 0; p < k; ++p) acc += at(i, p) * bt(p, j);
            T& out = c[i * ldc + j];
            out = beta == T(0) ? alpha * acc : alpha * acc + beta * out;
        }
    }
}

template <typename T>
double abs_diff_sum_impl(const T* a, const T* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
    return s;
}

} // namespace

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
    gemm_impl(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
    gemm_impl(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

double abs_diff_sum(const float* a, const float* b, std::size_t n) {
    return abs_diff_sum_impl(a, b, n);
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    return abs_diff_sum_impl(a, b, n);
}

double rbf_pair_sum(const double* a, std::size_t na, const double* b, std::size_t nb,
                    double gamma) {
    double total = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const double d = a[i] - b[j];
            row += std::exp(-gamma * d * d);
        }
        total += row;
    }
    return total;
}

} // namespace flowgan::simd::scalar
