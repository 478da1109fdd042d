#include "flowgan/error.hpp"
#include "flowgan/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace flowgan::simd {

namespace {

Backend initial_backend() {
    const bool has_avx2 = cpu_supports_avx2();
    if (const char* env = std::getenv("FLOWGAN_SIMD")) {
        const std::string v = env;
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && has_avx2) return Backend::avx2;
    }
    return has_avx2 ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

} // namespace

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_supports_avx2())
        throw ConfigError("avx2 backend requested but the CPU lacks AVX2/FMA");
    current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
    if (active_backend() == Backend::avx2)
        avx2::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    else
        scalar::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
    if (active_backend() == Backend::avx2)
        avx2::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    else
        scalar::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

double abs_diff_sum(const float* a, const float* b, std::size_t n) {
    return active_backend() == Backend::avx2 ? avx2::abs_diff_sum(a, b, n)
                                             : scalar::abs_diff_sum(a, b, n);
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    return active_backend() == Backend::avx2 ? avx2::abs_diff_sum(a, b, n)
                                             : scalar::abs_diff_sum(a, b, n);
}

double rbf_pair_sum(const double* a, std::size_t na, const double* b, std::size_t nb,
                    double gamma) {
    return active_backend() == Backend::avx2 ? avx2::rbf_pair_sum(a, na, b, nb, gamma)
                                             : scalar::rbf_pair_sum(a, na, b, nb, gamma);
}

} // namespace flowgan::simd
