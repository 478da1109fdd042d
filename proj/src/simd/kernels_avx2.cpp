// Compiled with -mavx2 -mfma; only reached when the dispatcher confirmed CPU support.

#include "flowgan/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace flowgan::simd::avx2 {

namespace {

struct F32 {
    using T = float;
    using V = __m256;
    static constexpr int lanes = 8;
    static V zero() { return _mm256_setzero_ps(); }
    static V set1(T x) { return _mm256_set1_ps(x); }
    static V load(const T* p) { return _mm256_loadu_ps(p); }
    static void store(T* p, V v) { _mm256_storeu_ps(p, v); }
    static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
};

struct F64 {
    using T = double;
    using V = __m256d;
    static constexpr int lanes = 4;
    static V zero() { return _mm256_setzero_pd(); }
    static V set1(T x) { return _mm256_set1_pd(x); }
    static V load(const T* p) { return _mm256_loadu_pd(p); }
    static void store(T* p, V v) { _mm256_storeu_pd(p, v); }
    static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
};

constexpr std::size_t kRowsPerTile = 6;
constexpr std::size_t kDepthBlock = 256;

// Accumulates an MR x (2 * lanes) tile of A(rows, 0..kc) * Bpanel into `tile`.
template <class Tr, int MR>
inline void micro_tile(std::size_t kc, const typename Tr::T* a, std::size_t lda,
                       const typename Tr::T* panel, typename Tr::T* tile) {
    using V = typename Tr::V;
    constexpr int L = Tr::lanes;
    V c0[MR];
    V c1[MR];
#pragma GCC unroll 6
    for (int r = 0; r < MR; ++r) {
        c0[r] = Tr::zero();
        c1[r] = Tr::zero();
    }
    for (std::size_t p = 0; p < kc; ++p) {
        const V b0 = Tr::load(panel + p * 2 * L);
        const V b1 = Tr::load(panel + p * 2 * L + L);
#pragma GCC unroll 6
        for (int r = 0; r < MR; ++r) {
            const V av = Tr::set1(a[r * lda + p]);
            c0[r] = Tr::fmadd(av, b0, c0[r]);
            c1[r] = Tr::fmadd(av, b1, c1[r]);
        }
    }
#pragma GCC unroll 6
    for (int r = 0; r < MR; ++r) {
        Tr::store(tile + r * 2 * L, c0[r]);
        Tr::store(tile + r * 2 * L + L, c1[r]);
    }
}

template <class Tr>
void run_tile(std::size_t mr, std::size_t kc, const typename Tr::T* a, std::size_t lda,
              const typename Tr::T* panel, typename Tr::T* tile) {
    switch (mr) {
    case 6: micro_tile<Tr, 6>(kc, a, lda, panel, tile); break;
    case 5: micro_tile<Tr, 5>(kc, a, lda, panel, tile); break;
    case 4: micro_tile<Tr, 4>(kc, a, lda, panel, tile); break;
    case 3: micro_tile<Tr, 3>(kc, a, lda, panel, tile); break;
    case 2: micro_tile<Tr, 2>(kc, a, lda, panel, tile); break;
    default: micro_tile<Tr, 1>(kc, a, lda, panel, tile); break;
    }
}

template <class Tr>
void gemm_impl(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
               typename Tr::T alpha, const typename Tr::T* a, std::size_t lda,
               const typename Tr::T* b, std::size_t ldb, typename Tr::T beta,
               typename Tr::T* c, std::size_t ldc) {
    using T = typename Tr::T;
    constexpr std::size_t NR = 2 * Tr::lanes;

    for (std::size_t i = 0; i < m; ++i) {
        T* row = c + i * ldc;
        if (beta == T(0)) {
            std::fill(row, row + n, T(0));
        } else if (beta != T(1)) {
            for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
        }
    }
    if (m == 0 || n == 0 || k == 0) return;

    // The micro-kernel walks A row-major; materialize op(A) when transposed.
    std::vector<T> a_buf;
    const T* a_rows = a;
    std::size_t a_ld = lda;
    if (ta == Trans::yes) {
        a_buf.resize(m * k);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t i = 0; i < m; ++i) a_buf[i * k + p] = a[p * lda + i];
        a_rows = a_buf.data();
        a_ld = k;
    }

    std::vector<T> panel(kDepthBlock * NR);
    alignas(32) T tile[kRowsPerTile * NR];

    for (std::size_t p0 = 0; p0 < k; p0 += kDepthBlock) {
        const std::size_t kc = std::min(kDepthBlock, k - p0);
        for (std::size_t j0 = 0; j0 < n; j0 += NR) {
            const std::size_t nc = std::min(NR, n - j0);
            // Pack op(B)[p0..p0+kc, j0..j0+nc) contiguously, zero-padded to NR columns.
            for (std::size_t p = 0; p < kc; ++p) {
                T* dst = panel.data() + p * NR;
                if (tb == Trans::no) {
                    const T* src = b + (p0 + p) * ldb + j0;
                    std::copy(src, src + nc, dst);
                } else {
                    for (std::size_t j = 0; j < nc; ++j) dst[j] = b[(j0 + j) * ldb + p0 + p];
                }
                std::fill(dst + nc, dst + NR, T(0));
            }
            for (std::size_t i0 = 0; i0 < m; i0 += kRowsPerTile) {
                const std::size_t mr = std::min(kRowsPerTile, m - i0);
                run_tile<Tr>(mr, kc, a_rows + i0 * a_ld + p0, a_ld, panel.data(), tile);
                for (std::size_t r = 0; r < mr; ++r) {
                    T* out = c + (i0 + r) * ldc + j0;
                    const T* acc = tile + r * NR;
                    for (std::size_t j = 0; j < nc; ++j) out[j] += alpha * acc[j];
                }
            }
        }
    }
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// exp(x) for doubles: Cody-Waite reduction by ln 2 and a rational approximation on
// |r| <= ln(2)/2 (relative error near 1 ulp). Inputs below -708 flush to zero.
inline __m256d exp_pd(__m256d x) {
    const __m256d hi = _mm256_set1_pd(709.0);
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
    p = _mm256_mul_pd(p, r);
    __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    // 2^n via the exponent field; the magic constant leaves n in the low mantissa bits.
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);
    const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                        _mm256_castpd_si256(magic));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, e);
}

} // namespace

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
    gemm_impl<F32>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
    gemm_impl<F64>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

double abs_diff_sum(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d d0 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                                         _mm256_cvtps_pd(_mm256_castps256_ps128(vb)));
        const __m256d d1 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                                         _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)));
        acc0 = _mm256_add_pd(acc0, abs_pd(d0));
        acc1 = _mm256_add_pd(acc1, abs_pd(d1));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
    return s;
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                        _mm256_loadu_pd(b + i))));
        acc1 = _mm256_add_pd(acc1, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i + 4),
                                                        _mm256_loadu_pd(b + i + 4))));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s;
}

double rbf_pair_sum(const double* a, std::size_t na, const double* b, std::size_t nb,
                    double gamma) {
    const __m256d neg_gamma = _mm256_set1_pd(-gamma);
    double total = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const __m256d ai = _mm256_set1_pd(a[i]);
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= nb; j += 4) {
            const __m256d d = _mm256_sub_pd(ai, _mm256_loadu_pd(b + j));
            acc = _mm256_add_pd(acc, exp_pd(_mm256_mul_pd(neg_gamma, _mm256_mul_pd(d, d))));
        }
        double row = hsum(acc);
        for (; j < nb; ++j) {
            const double d = a[i] - b[j];
            row += std::exp(-gamma * d * d);
        }
        total += row;
    }
    return total;
}

} // namespace flowgan::simd::avx2
