#include "bdm/kernels.hpp"

#include <cstdlib>
#include <vector>

#include "bdm/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define BDM_X86_64 1
#else
#define BDM_X86_64 0
#endif

namespace bdm::kernels {

#if BDM_X86_64
namespace detail {
const Ops& avx2_ops(); // kernels_avx2.cpp
}
#endif

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double sumsq_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_shift_scalar(const double* x, double shift, double scale,
                        double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] + shift) * scale;
}

void sub_div_scalar(const double* x, double sub, double div, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - sub) / div;
}

void minmax_scalar(const double* a, std::size_t n, double* mn, double* mx) {
    double lo = a[0];
    double hi = a[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (a[i] < lo) lo = a[i];
        if (a[i] > hi) hi = a[i];
    }
    *mn = lo;
    *mx = hi;
}

const Ops kScalarOps{dot_scalar, sum_scalar,         sumsq_scalar,   axpy_scalar,
                     mul_scalar, scale_shift_scalar, sub_div_scalar, minmax_scalar};

bool cpu_has_avx2() {
#if BDM_X86_64
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    if (const char* env = std::getenv("BDM_KERNELS")) {
        std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

struct Dispatch {
    Backend backend;
    const Ops* ops;
    Dispatch() { set(detect_backend()); }
    void set(Backend b) {
        backend = b;
#if BDM_X86_64
        ops = (b == Backend::avx2) ? &detail::avx2_ops() : &kScalarOps;
#else
        ops = &kScalarOps;
#endif
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

} // namespace

const Ops& scalar_ops() { return kScalarOps; }

bool backend_available(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

Backend active_backend() { return dispatch().backend; }

std::string backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (!backend_available(b))
        throw ConfigError("kernel backend not available on this machine: " + backend_name(b));
    dispatch().set(b);
}

void reset_backend() { dispatch().set(detect_backend()); }

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().ops->dot(a, b, n);
}
double sum(const double* a, std::size_t n) { return dispatch().ops->sum(a, n); }
double sumsq(const double* a, std::size_t n) { return dispatch().ops->sumsq(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    dispatch().ops->axpy(alpha, x, y, n);
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
    dispatch().ops->mul(a, b, out, n);
}
void scale_shift(const double* x, double shift, double scale, double* out, std::size_t n) {
    dispatch().ops->scale_shift(x, shift, scale, out, n);
}
void sub_div(const double* x, double sub, double div, double* out, std::size_t n) {
    dispatch().ops->sub_div(x, sub, div, out, n);
}
std::pair<double, double> minmax(const double* a, std::size_t n) {
    double mn = 0.0, mx = 0.0;
    dispatch().ops->minmax(a, n, &mn, &mx);
    return {mn, mx};
}

double mean(const double* a, std::size_t n) {
    return n ? sum(a, n) / static_cast<double>(n) : 0.0;
}

double variance(const double* a, std::size_t n, bool sample) {
    if (n < 2) return 0.0;
    const double m = mean(a, n);
    std::vector<double> centered(n);
    scale_shift(a, -m, 1.0, centered.data(), n);
    const double ss = sumsq(centered.data(), n);
    return ss / static_cast<double>(sample ? n - 1 : n);
}

} // namespace bdm::kernels
