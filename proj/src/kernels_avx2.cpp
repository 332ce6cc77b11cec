// AVX2 variants of the arithmetic kernels. This translation unit is compiled
// with -mavx2 -mfma on x86-64; everywhere else it degrades to a stub that
// reports the backend as unavailable. Selection happens at runtime via CPUID,
// so a generic build still runs on machines without AVX2.

#include "vin/kernels.hpp"

#if defined(__AVX2__) && (defined(__x86_64__) || defined(_M_X64))

#include <cmath>
#include <immintrin.h>

namespace vin::kernels::detail {

namespace {

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s2 = _mm_add_pd(lo, hi);
    const __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
    return _mm_cvtsd_f64(s1);
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        total += a[i];
    }
    return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        total += a[i] * b[i];
    }
    return total;
}

double dot_centered_avx2(const double* a, double ma, const double* b, double mb,
                         std::size_t n) {
    const __m256d va = _mm256_set1_pd(ma);
    const __m256d vb = _mm256_set1_pd(mb);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + i), va);
        const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), vb);
        acc = _mm256_fmadd_pd(da, db, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        total += (a[i] - ma) * (b[i] - mb);
    }
    return total;
}

double sumsq_dev_avx2(const double* a, double m, std::size_t n) {
    const __m256d vm = _mm256_set1_pd(m);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), vm);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - m;
        total += d * d;
    }
    return total;
}

double sumsq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        total += d * d;
    }
    return total;
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] - b[i];
    }
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

void div_protected_avx2(const double* a, const double* b, double* out, std::size_t n) {
    const __m256d eps = _mm256_set1_pd(kProtectedDivEps);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d q = _mm256_div_pd(_mm256_loadu_pd(a + i), vb);
        const __m256d absb = _mm256_andnot_pd(sign_mask, vb);
        const __m256d small = _mm256_cmp_pd(absb, eps, _CMP_LE_OQ);
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(q, one, small));
    }
    for (; i < n; ++i) {
        out[i] = std::abs(b[i]) <= kProtectedDivEps ? 1.0 : a[i] / b[i];
    }
}

void clamp_avx2(const double* a, double lo, double hi, double* out, std::size_t n) {
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(a + i);
        _mm256_storeu_pd(out + i, _mm256_min_pd(vhi, _mm256_max_pd(vlo, v)));
    }
    for (; i < n; ++i) {
        out[i] = std::fmin(hi, std::fmax(lo, a[i]));
    }
}

void axpb_avx2(const double* a, double alpha, double beta, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    // mul+add instead of fma: elementwise kernels round exactly like the
    // scalar reference, keeping the equivalence tests bitwise.
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(a + i)), vb));
    }
    for (; i < n; ++i) {
        out[i] = alpha * a[i] + beta;
    }
}

void axpy_avx2(const double* a, double alpha, double* acc, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(a + i));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), prod));
    }
    for (; i < n; ++i) {
        acc[i] += alpha * a[i];
    }
}

} // namespace

const KernelTable* avx2_table() {
    if (!__builtin_cpu_supports("avx2")) {
        return nullptr;
    }
    static const KernelTable table{
        sum_avx2,        dot_avx2, dot_centered_avx2, sumsq_dev_avx2,
        sumsq_diff_avx2, add_avx2, sub_avx2,          mul_avx2,
        div_protected_avx2, clamp_avx2, axpb_avx2, axpy_avx2,
    };
    return &table;
}

} // namespace vin::kernels::detail

#else

namespace vin::kernels::detail {

const KernelTable* avx2_table() { return nullptr; }

} // namespace vin::kernels::detail

#endif
