#pragma once

#include <cstddef>
#include <string>
#include <utility>

namespace bdm::kernels {

// The numeric inner loops live behind this table. A scalar reference
// implementation always exists; an AVX2+FMA variant is selected at runtime
// on x86-64 when the CPU supports it. The two are equivalence-tested.
struct Ops {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*sumsq)(const double* a, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out = a * b elementwise
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // out = (x + shift) * scale
    void (*scale_shift)(const double* x, double shift, double scale,
                        double* out, std::size_t n);
    // out = (x - sub) / div; exact at x == sub and x == sub + div
    void (*sub_div)(const double* x, double sub, double div, double* out, std::size_t n);
    void (*minmax)(const double* a, std::size_t n, double* mn, double* mx);
};

enum class Backend { scalar, avx2 };

const Ops& scalar_ops();
bool backend_available(Backend b);
Backend active_backend();
std::string backend_name(Backend b);

// Testing/override hook. Throws bdm::ConfigError when the backend is not
// available on this machine. reset_backend() re-runs auto-detection,
// honouring the BDM_KERNELS environment variable (scalar|avx2).
void force_backend(Backend b);
void reset_backend();

// Convenience wrappers through the active table.
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale_shift(const double* x, double shift, double scale, double* out, std::size_t n);
void sub_div(const double* x, double sub, double div, double* out, std::size_t n);
std::pair<double, double> minmax(const double* a, std::size_t n);

// Two-pass mean/variance built on the active kernels. Population variance
// when sample == false, N-1 normalization otherwise.
double mean(const double* a, std::size_t n);
double variance(const double* a, std::size_t n, bool sample = false);

} // namespace bdm::kernels
