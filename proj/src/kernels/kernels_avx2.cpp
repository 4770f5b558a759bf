// AVX2+FMA variants of the kernel table. Compiled with -mavx2 -mfma and only
// reached through runtime dispatch, so the rest of the library stays buildable
// for the baseline ISA.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "bdm/kernels.hpp"

namespace bdm::kernels::detail {

namespace {

double hsum(__m256d v) {
    alignas(32) double buf[4];
    _mm256_store_pd(buf, v);
    return (buf[0] + buf[1]) + (buf[2] + buf[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i];
    return s;
}

double sumsq_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d x0 = _mm256_loadu_pd(a + i);
        __m256d x1 = _mm256_loadu_pd(a + i + 4);
        acc0 = _mm256_fmadd_pd(x0, x0, acc0);
        acc1 = _mm256_fmadd_pd(x1, x1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(a + i);
        acc0 = _mm256_fmadd_pd(x, x, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_shift_avx2(const double* x, double shift, double scale,
                      double* out, std::size_t n) {
    const __m256d sh = _mm256_set1_pd(shift);
    const __m256d sc = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_add_pd(_mm256_loadu_pd(x + i), sh);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(v, sc));
    }
    for (; i < n; ++i) out[i] = (x[i] + shift) * scale;
}

void sub_div_avx2(const double* x, double sub, double div, double* out, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(sub);
    const __m256d dv = _mm256_set1_pd(div);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_sub_pd(_mm256_loadu_pd(x + i), sv);
        _mm256_storeu_pd(out + i, _mm256_div_pd(v, dv));
    }
    for (; i < n; ++i) out[i] = (x[i] - sub) / div;
}

void minmax_avx2(const double* a, std::size_t n, double* mn, double* mx) {
    double lo = a[0];
    double hi = a[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vlo = _mm256_loadu_pd(a);
        __m256d vhi = vlo;
        for (i = 4; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(a + i);
            vlo = _mm256_min_pd(vlo, v);
            vhi = _mm256_max_pd(vhi, v);
        }
        alignas(32) double blo[4], bhi[4];
        _mm256_store_pd(blo, vlo);
        _mm256_store_pd(bhi, vhi);
        lo = blo[0];
        hi = bhi[0];
        for (int k = 1; k < 4; ++k) {
            if (blo[k] < lo) lo = blo[k];
            if (bhi[k] > hi) hi = bhi[k];
        }
    }
    for (; i < n; ++i) {
        if (a[i] < lo) lo = a[i];
        if (a[i] > hi) hi = a[i];
    }
    *mn = lo;
    *mx = hi;
}

const Ops kAvx2Ops{dot_avx2, sum_avx2,         sumsq_avx2,   axpy_avx2,
                   mul_avx2, scale_shift_avx2, sub_div_avx2, minmax_avx2};

} // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

} // namespace bdm::kernels::detail

#endif // x86-64
