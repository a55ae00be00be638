#include "kernels_impl.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>

namespace na::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Row i of C = Σ_p a(i, p) · B[p, :], where a(i, p) = a[i*a_row + p*a_col].
// Four ymm accumulators per 16-column strip keep C in registers across p.
inline void row_update(const double* a, std::size_t a_row, std::size_t a_col, const double* b,
                       double* crow, std::size_t i, std::size_t k, std::size_t n,
                       bool accumulate) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
        __m256d c0, c1, c2, c3;
        if (accumulate) {
            c0 = _mm256_loadu_pd(crow + j);
            c1 = _mm256_loadu_pd(crow + j + 4);
            c2 = _mm256_loadu_pd(crow + j + 8);
            c3 = _mm256_loadu_pd(crow + j + 12);
        } else {
            c0 = c1 = c2 = c3 = _mm256_setzero_pd();
        }
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_broadcast_sd(a + i * a_row + p * a_col);
            const double* brow = b + p * n + j;
            c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
            c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
            c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
            c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
        }
        _mm256_storeu_pd(crow + j, c0);
        _mm256_storeu_pd(crow + j + 4, c1);
        _mm256_storeu_pd(crow + j + 8, c2);
        _mm256_storeu_pd(crow + j + 12, c3);
    }
    for (; j + 4 <= n; j += 4) {
        __m256d c0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_broadcast_sd(a + i * a_row + p * a_col);
            c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * n + j), c0);
        }
        _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
        double s = accumulate ? crow[j] : 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[i * a_row + p * a_col] * b[p * n + j];
        crow[j] = s;
    }
}

void gemm_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) row_update(a, k, 1, b, c + i * n, i, k, n, accumulate);
}

void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) row_update(a, 1, m, b, c + i * n, i, k, n, accumulate);
}

void gemm_nt_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate) {
    const std::size_t kv = k - k % 4;
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const double* b0 = b + j * k;
            const double* b1 = b0 + k;
            const double* b2 = b1 + k;
            const double* b3 = b2 + k;
            __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
            __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
            for (std::size_t p = 0; p < kv; p += 4) {
                const __m256d av = _mm256_loadu_pd(arow + p);
                s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
                s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
                s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
                s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
            }
            double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
            for (std::size_t p = kv; p < k; ++p) {
                r0 += arow[p] * b0[p];
                r1 += arow[p] * b1[p];
                r2 += arow[p] * b2[p];
                r3 += arow[p] * b3[p];
            }
            double* crow = c + i * n + j;
            if (accumulate) {
                crow[0] += r0; crow[1] += r1; crow[2] += r2; crow[3] += r3;
            } else {
                crow[0] = r0; crow[1] = r1; crow[2] = r2; crow[3] = r3;
            }
        }
        for (; j < n; ++j) {
            const double* brow = b + j * k;
            __m256d s = _mm256_setzero_pd();
            for (std::size_t p = 0; p < kv; p += 4)
                s = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), s);
            double r = hsum(s);
            for (std::size_t p = kv; p < k; ++p) r += arow[p] * brow[p];
            c[i * n + j] = accumulate ? c[i * n + j] + r : r;
        }
    }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    }
    for (; i + 4 <= n; i += 4)
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    double r = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

constexpr KernelTable kAvx2{gemm_avx2, gemm_nt_avx2, gemm_tn_avx2, axpy_avx2, dot_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table_compiled() { return &kAvx2; }
}  // namespace detail

}  // namespace na::kernels

#else

namespace na::kernels::detail {
const KernelTable* avx2_table_compiled() { return nullptr; }
}  // namespace na::kernels::detail

#endif
