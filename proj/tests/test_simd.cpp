#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fracdrift/errors.hpp"
#include "fracdrift/random.hpp"
#include "fracdrift/simd/dispatch.hpp"

using namespace fracdrift;
namespace simd = fracdrift::simd;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> randoms(std::size_t n, double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

std::vector<double> signs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.sign();
    return v;
}

struct IsaGuard {
    ~IsaGuard() { simd::reset_isa(); }
};

}  // namespace

TEST_CASE("cot expansion matches the library cotangent") {
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double z = rng.uniform(-kPi / 2.0, kPi / 2.0);
        const double want = 1.0 / std::tan(z);
        CHECK(simd::cot_reference(z) == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("periodized Hilbert kernel is odd, periodic and tapered") {
    const double L = 2.0 * kPi;
    const auto k = simd::HilbertTorus::make(L, 0.05);
    for (double r : {0.01, 0.3, 1.7, 3.0}) {
        CHECK(k(-r) == doctest::Approx(-k(r)));
        CHECK(k(r + L) == doctest::Approx(k(r)).epsilon(1e-12));
    }
    CHECK(k(1.0) == doctest::Approx(1.0 / (L * std::tan(kPi / L))).epsilon(1e-13));
    CHECK(k(0.0) == 0.0);
    CHECK(k(0.025) == doctest::Approx(0.5 * k(0.05)).epsilon(1e-12));
}

TEST_CASE("Riesz pair kernel is odd with the 1/(2 pi) constant") {
    const auto k = simd::RieszTorus2::make(10.0, 0.1);
    const auto a = k(0.3, -0.4);
    const auto b = k(-0.3, 0.4);
    CHECK(a[0] == doctest::Approx(-b[0]));
    CHECK(a[1] == doctest::Approx(-b[1]));
    CHECK(a[0] == doctest::Approx(0.3 / (2.0 * kPi * 0.125)));
    const auto z = k(0.0, 0.0);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
}

TEST_CASE("scalar is always available and selectable") {
    IsaGuard guard;
    CHECK(simd::isa_available(simd::Isa::scalar));
    simd::set_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    if (!simd::isa_available(simd::Isa::neon)) CHECK_THROWS_AS(simd::set_isa(simd::Isa::neon), UnsupportedError);
}

#if defined(FRACDRIFT_HAVE_AVX2)
TEST_CASE("avx2 correlate matches scalar") {
    if (!simd::isa_available(simd::Isa::avx2)) return;
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 257u}) {
        for (std::size_t m : {1u, 2u, 5u, 33u}) {
            const auto ext = randoms(n + m - 1, -1.0, 1.0, n * 31 + m);
            const auto w = randoms(m, -1.0, 1.0, n + m * 17);
            std::vector<double> a(n, 0.5), b(n, 0.5);
            simd::scalar::correlate_accumulate(ext, w, a);
            simd::avx2::correlate_accumulate(ext, w, b);
            for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("avx2 Hilbert sum matches scalar") {
    if (!simd::isa_available(simd::Isa::avx2)) return;
    const double L = 7.0;
    for (double eps : {0.01, 0.2}) {
        const auto k = simd::HilbertTorus::make(L, eps);
        for (std::size_t n : {1u, 5u, 8u, 1000u, 1003u}) {
            // Sources spread over several periods to exercise the wrap.
            const auto y = randoms(n, -2.0 * L, 2.0 * L, n);
            const auto s = signs(n, n + 1);
            for (double x : {0.0, 1.3, -5.2, 20.0}) {
                const double a = simd::scalar::hilbert_sum(k, x, y, s);
                const double b = simd::avx2::hilbert_sum(k, x, y, s);
                CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)) * std::sqrt(double(n)));
            }
        }
    }
}

TEST_CASE("avx2 Riesz sum matches scalar") {
    if (!simd::isa_available(simd::Isa::avx2)) return;
    const double L = 5.0;
    const auto k = simd::RieszTorus2::make(L, 0.05);
    for (std::size_t n : {1u, 3u, 4u, 999u}) {
        const auto y1 = randoms(n, -L, 2.0 * L, 3 * n);
        const auto y2 = randoms(n, -L, 2.0 * L, 3 * n + 1);
        const auto s = signs(n, 3 * n + 2);
        for (double x : {0.1, 2.4, -3.3}) {
            const auto a = simd::scalar::riesz2_sum(k, x, 0.7 * x, y1, y2, s);
            const auto b = simd::avx2::riesz2_sum(k, x, 0.7 * x, y1, y2, s);
            for (int c = 0; c < 2; ++c) CHECK(std::abs(a[c] - b[c]) <= 1e-11 * (1.0 + std::abs(a[c])) * double(n));
        }
    }
}

TEST_CASE("dispatcher routes to the forced ISA") {
    if (!simd::isa_available(simd::Isa::avx2)) return;
    IsaGuard guard;
    const double L = 7.0;
    const auto k = simd::HilbertTorus::make(L, 0.05);
    const auto y = randoms(101, 0.0, L, 5);
    const auto s = signs(101, 6);
    simd::set_isa(simd::Isa::avx2);
    CHECK(simd::hilbert_sum(k, 1.0, y, s) == simd::avx2::hilbert_sum(k, 1.0, y, s));
    simd::set_isa(simd::Isa::scalar);
    CHECK(simd::hilbert_sum(k, 1.0, y, s) == simd::scalar::hilbert_sum(k, 1.0, y, s));
}
#endif
