#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bdm/kernels.hpp"

namespace k = bdm::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// Mixed absolute/relative check: reductions reorder under SIMD, so results
// differ in the last few bits.
bool close(double a, double b, double tol = 1e-11) {
    return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

} // namespace

TEST_CASE("scalar reference basics") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{4.0, 5.0, 6.0};
    const auto& ops = k::scalar_ops();
    CHECK(ops.dot(a.data(), b.data(), 3) == 32.0);
    CHECK(ops.sum(a.data(), 3) == 6.0);
    CHECK(ops.sumsq(b.data(), 3) == 77.0);

    std::vector<double> y{1.0, 1.0, 1.0};
    ops.axpy(2.0, a.data(), y.data(), 3);
    CHECK(y == std::vector<double>{3.0, 5.0, 7.0});

    std::vector<double> out(3);
    ops.mul(a.data(), b.data(), out.data(), 3);
    CHECK(out == std::vector<double>{4.0, 10.0, 18.0});

    ops.scale_shift(a.data(), -1.0, 0.5, out.data(), 3);
    CHECK(out == std::vector<double>{0.0, 0.5, 1.0});

    double mn = 0, mx = 0;
    ops.minmax(b.data(), 3, &mn, &mx);
    CHECK(mn == 4.0);
    CHECK(mx == 6.0);
}

TEST_CASE("avx2 backend matches scalar reference") {
    if (!k::backend_available(k::Backend::avx2)) {
        MESSAGE("avx2 not available on this machine, skipping");
        return;
    }
    std::mt19937_64 rng(20240917);
    // Lengths straddle the vector width and the unrolled stride.
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u,
                          31u, 64u, 100u, 1001u, 4096u}) {
        auto a = random_vec(rng, n, -3.0, 3.0);
        auto b = random_vec(rng, n, -3.0, 3.0);
        const auto& sc = k::scalar_ops();

        k::force_backend(k::Backend::avx2);
        CAPTURE(n);
        CHECK(close(k::dot(a.data(), b.data(), n), sc.dot(a.data(), b.data(), n)));
        CHECK(close(k::sum(a.data(), n), sc.sum(a.data(), n)));
        CHECK(close(k::sumsq(a.data(), n), sc.sumsq(a.data(), n)));

        auto y1 = b;
        auto y2 = b;
        k::axpy(1.7, a.data(), y1.data(), n);
        sc.axpy(1.7, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i]));

        std::vector<double> o1(n), o2(n);
        k::mul(a.data(), b.data(), o1.data(), n);
        sc.mul(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2); // elementwise ops have no reordering

        k::scale_shift(a.data(), 0.3, 2.5, o1.data(), n);
        sc.scale_shift(a.data(), 0.3, 2.5, o2.data(), n);
        CHECK(o1 == o2);

        auto [mn1, mx1] = k::minmax(a.data(), n);
        double mn2 = 0, mx2 = 0;
        sc.minmax(a.data(), n, &mn2, &mx2);
        CHECK(mn1 == mn2);
        CHECK(mx1 == mx2);
    }
    k::reset_backend();
}

TEST_CASE("force_backend round trip") {
    const auto original = k::active_backend();
    k::force_backend(k::Backend::scalar);
    CHECK(k::active_backend() == k::Backend::scalar);
    k::reset_backend();
    CHECK(k::backend_name(k::active_backend()).size() > 0);
    if (k::backend_available(original)) k::force_backend(original);
}

TEST_CASE("variance helpers") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    CHECK(k::mean(x.data(), 4) == doctest::Approx(2.5));
    CHECK(k::variance(x.data(), 4, false) == doctest::Approx(1.25));
    CHECK(k::variance(x.data(), 4, true) == doctest::Approx(5.0 / 3.0));
    CHECK(k::variance(x.data(), 1, false) == 0.0);
}
