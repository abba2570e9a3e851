#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fracdrift/errors.hpp"
#include "fracdrift/random.hpp"
#include "fracdrift/spectral.hpp"

using namespace fracdrift;

namespace {

constexpr double kPi = std::numbers::pi;
const GridSpec kLine{1, 256, 2.0 * kPi};
const GridSpec kPlane{2, 32, 2.0 * kPi};

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double rel_l2(const Field& got, const Field& want) { return lp_norm(got - want, 2) / lp_norm(want, 2); }

Field random_field(const GridSpec& g, std::uint64_t seed) {
    Rng rng(seed);
    Field f(g);
    for (auto& v : f.values) v = rng.normal();
    return f;
}

// Band-limited random field: a handful of low modes.
Field smooth_random(const GridSpec& g, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::array<double, 4>> modes;
    for (int i = 0; i < 6; ++i)
        modes.push_back({double(int(rng.below(7)) - 3), double(int(rng.below(7)) - 3), rng.normal(),
                         rng.uniform(0.0, 2.0 * kPi)});
    return sample(g, [&](const std::array<double, 2>& x) {
        double v = 0.0;
        for (const auto& m : modes) v += m[2] * std::cos(m[0] * x[0] + (g.d == 2 ? m[1] * x[1] : 0.0) + m[3]);
        return v;
    });
}

}  // namespace

TEST_CASE("constant field transforms to a single DC coefficient") {
    const Field f(kLine, 2.5);
    const SpectralField F = to_spectral(f);
    CHECK(F.coeffs[0].real() == doctest::Approx(2.5 * 256));
    for (std::size_t i = 1; i < F.coeffs.size(); ++i) CHECK(std::abs(F.coeffs[i]) < 1e-10);
}

TEST_CASE("roundtrip transform is the identity") {
    for (const GridSpec& g : {kLine, kPlane}) {
        const Field f = random_field(g, 11);
        CHECK(rel_l2(from_spectral(to_spectral(f)), f) < 1e-12);
    }
}

TEST_CASE("single cosine mode occupies k = +1 and k = -1 only") {
    const GridSpec g{1, 64, 3.0};
    const Field f = sample(g, [&](auto x) { return std::cos(2.0 * kPi * x[0] / g.L); });
    const SpectralField F = to_spectral(f);
    for (std::size_t i = 0; i < g.n; ++i) {
        const long k = g.freq_index(i);
        if (k == 1 || k == -1)
            CHECK(std::abs(F.coeffs[i] - cplx(32.0, 0.0)) < 1e-10);
        else
            CHECK(std::abs(F.coeffs[i]) < 1e-10);
    }
}

TEST_CASE("transform rejects buffers that do not match the grid") {
    Field f(kLine);
    f.values.resize(100);
    CHECK_THROWS_AS(to_spectral(f), ConfigError);
    CHECK_THROWS_AS(from_spectral(SpectralField{kLine, std::vector<cplx>(3)}), ConfigError);
}

TEST_CASE("fractional Laplacian of a constant vanishes") {
    const auto s = StableParams::make(1.5, 1);
    const Field c(kLine, 4.0);
    CHECK(lp_norm(frac_laplacian(c, s, LaplacianForm::spectral), kInf) < 1e-12);
    CHECK(lp_norm(frac_laplacian(c, s, LaplacianForm::quadrature, 2.0 * kLine.L / kLine.n), kInf) < 1e-10);
}

TEST_CASE("sin is an eigenfunction with eigenvalue -1") {
    const auto s = StableParams::make(1.5, 1);
    const Field f = sample(kLine, [](auto x) { return std::sin(x[0]); });
    CHECK(max_abs_diff(frac_laplacian(f, s, LaplacianForm::spectral), -1.0 * f) < 1e-12);
}

TEST_CASE("plane-wave eigenrelation holds for every grid mode") {
    for (double alpha : {1.2, 1.5, 1.9, 2.0}) {
        for (const GridSpec& g : {GridSpec{1, 32, 5.0}, GridSpec{2, 16, 5.0}}) {
            const auto s = StableParams::make(alpha, g.d);
            for (std::size_t idx = 0; idx < g.size(); ++idx) {
                const auto k = g.wavevector(idx);
                // Real part of e^{ik.x}; the Nyquist cosine is still an exact eigenfunction.
                const Field f = sample(g, [&](auto x) { return std::cos(k[0] * x[0] + k[1] * x[1]); });
                const double lam = std::pow(std::hypot(k[0], k[1]), alpha);
                CHECK(max_abs_diff(frac_laplacian(f, s, LaplacianForm::spectral), -lam * f) < 1e-9 * (1 + lam));
            }
        }
    }
}

TEST_CASE("quadrature and spectral fractional Laplacians agree in 1-d") {
    const auto s = StableParams::make(1.5, 1);
    const Field f = sample(kLine, [](auto x) { return std::sin(x[0]) + 0.3 * std::cos(2.0 * x[0]); });
    const double eps = 2.0 * kLine.L / kLine.n;
    const Field a = frac_laplacian(f, s, LaplacianForm::spectral);
    const Field b = frac_laplacian(f, s, LaplacianForm::quadrature, eps);
    CHECK(rel_l2(b, a) < 1e-4);
}

TEST_CASE("quadrature and spectral forms agree on band-limited fields across alpha") {
    for (double alpha : {1.1, 1.3, 1.7, 1.9}) {
        const auto s = StableParams::make(alpha, 1);
        const Field f = smooth_random(kLine, 5);
        const double eps = 2.0 * kLine.L / kLine.n;
        CHECK(rel_l2(frac_laplacian(f, s, LaplacianForm::quadrature, eps),
                     frac_laplacian(f, s, LaplacianForm::spectral)) < 1e-4);
    }
}

TEST_CASE("quadrature and spectral forms agree in 2-d") {
    const auto s = StableParams::make(1.5, 2);
    const Field f = sample(kPlane, [](auto x) { return std::sin(x[0]) * std::cos(x[1]) + 0.5 * std::cos(2.0 * x[1]); });
    const double eps = 2.0 * kPlane.spacing();
    CHECK(rel_l2(frac_laplacian(f, s, LaplacianForm::quadrature, eps), frac_laplacian(f, s, LaplacianForm::spectral)) <
          1e-3);
}

TEST_CASE("calibrated jump constant matches the closed-form normalisation") {
    for (int d : {1, 2}) {
        for (double alpha : {1.2, 1.5, 1.8}) {
            const GridSpec g = d == 1 ? kLine : kPlane;
            const double fitted = calibrate_jump_constant(g, alpha, 2.0 * g.spacing());
            CHECK(fitted == doctest::Approx(jump_constant(alpha, d)).epsilon(d == 1 ? 1e-4 : 1e-3));
        }
    }
}

TEST_CASE("closed-form jump constant in d = 1 at alpha = 1.5") {
    // alpha 2^{alpha-1} Gamma((1+alpha)/2) / (sqrt(pi) Gamma(1 - alpha/2)).
    const double a = 1.5;
    const double want = a * std::sqrt(2.0) * std::tgamma(1.25) / (std::sqrt(kPi) * std::tgamma(0.25));
    CHECK(StableParams::make(a, 1).K_norm == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("fractional Laplacian parameter errors") {
    const Field f = sample(kLine, [](auto x) { return std::sin(x[0]); });
    CHECK_THROWS_AS(StableParams::make(1.0, 1), ParameterError);
    CHECK_THROWS_AS(StableParams::make(2.1, 1), ParameterError);
    StableParams bad{0.9, 1.0, 1};
    CHECK_THROWS_AS(frac_laplacian(f, bad, LaplacianForm::spectral), ParameterError);
    const auto s = StableParams::make(1.5, 1);
    CHECK_THROWS_AS(frac_laplacian(f, s, LaplacianForm::quadrature, kLine.L / 2.0), ParameterError);
    CHECK_THROWS_AS(frac_laplacian(f, s, LaplacianForm::quadrature, 0.0), ParameterError);
    CHECK_THROWS_AS(frac_laplacian(f, StableParams::make(2.0, 1), LaplacianForm::quadrature, 0.1), ParameterError);
}

TEST_CASE("semigroup at t = 0 is the identity") {
    const auto s = StableParams::make(1.5, 1);
    const Field f = random_field(kLine, 3);
    CHECK(max_abs_diff(semigroup_apply(f, 0.0, s), f) < 1e-12);
}

TEST_CASE("semigroup damps sin by e^{-t}") {
    const auto s = StableParams::make(1.5, 1);
    const Field f = sample(kLine, [](auto x) { return std::sin(x[0]); });
    CHECK(max_abs_diff(semigroup_apply(f, 1.0, s), std::exp(-1.0) * f) < 1e-13);
}

TEST_CASE("alpha = 2 semigroup matches Gaussian convolution of a mode") {
    // Heat kernel with variance 2t applied to cos(kx + phi): e^{-k^2 t} cos(kx + phi).
    const auto s = StableParams::make(2.0, 1);
    const GridSpec g{1, 128, 10.0};
    const double k = 2.0 * kPi * 3.0 / g.L, t = 0.37;
    const Field f = sample(g, [&](auto x) { return std::cos(k * x[0] + 0.4); });
    const Field u = semigroup_apply(f, t, s);
    // Oracle: direct real-space convolution with the periodized Gaussian.
    Field want(g);
    for (std::size_t i = 0; i < g.n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g.n; ++j)
            for (int m = -3; m <= 3; ++m) {
                const double r = g.coord(i) - g.coord(j) + m * g.L;
                acc += std::exp(-r * r / (4.0 * t)) / std::sqrt(4.0 * kPi * t) * f[j] * g.spacing();
            }
        want[i] = acc;
    }
    CHECK(max_abs_diff(u, want) < 1e-10);
    CHECK(max_abs_diff(u, std::exp(-k * k * t) * f) < 1e-12);
}

TEST_CASE("semigroup property") {
    for (int d : {1, 2}) {
        const GridSpec g = d == 1 ? kLine : kPlane;
        const auto s = StableParams::make(1.6, d);
        const Field f = random_field(g, 7);
        const Field a = semigroup_apply(semigroup_apply(f, 0.03, s), 0.11, s);
        const Field b = semigroup_apply(f, 0.14, s);
        CHECK(rel_l2(a, b) < 1e-10);
    }
}

TEST_CASE("semigroup preserves mass") {
    const auto s = StableParams::make(1.3, 2);
    const Field f = random_field(kPlane, 9);
    for (double t : {0.01, 0.5, 3.0}) CHECK(mean(semigroup_apply(f, t, s)) == doctest::Approx(mean(f)).epsilon(1e-12));
}

TEST_CASE("semigroup contracts every L^p norm") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        for (int d : {1, 2}) {
            const GridSpec g = d == 1 ? kLine : kPlane;
            const auto s = StableParams::make(1.2 + 0.08 * double(seed), d);
            Field f = random_field(g, 100 + seed);
            // Sparse spikes stress the L^1 and L^inf ends.
            for (std::size_t i = 0; i < f.size(); ++i)
                if (i % 17 != 0) f[i] *= 0.01;
            const Field u = semigroup_apply(f, 0.05, s);
            for (double p : {1.0, 2.0, 4.0, kInf}) CHECK(lp_norm(u, p) <= lp_norm(f, p) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("semigroup rejects negative time") {
    const auto s = StableParams::make(1.5, 1);
    const Field f(kLine, 1.0);
    CHECK_THROWS_AS(semigroup_apply(f, -0.1, s), ParameterError);
    CHECK_THROWS_AS(semigroup_gradient(f, -0.1, s), ParameterError);
}

TEST_CASE("semigroup gradient of sin is e^{-t} cos") {
    const auto s = StableParams::make(1.5, 1);
    const Field f = sample(kLine, [](auto x) { return std::sin(x[0]); });
    const VectorField g = semigroup_gradient(f, 1.0, s);
    REQUIRE(g.size() == 1);
    const Field want = sample(kLine, [](auto x) { return std::exp(-1.0) * std::cos(x[0]); });
    CHECK(max_abs_diff(g[0], want) < 1e-13);
}

TEST_CASE("semigroup gradient of a constant is zero") {
    const auto s = StableParams::make(1.5, 2);
    for (const Field& c : semigroup_gradient(Field(kPlane, 3.0), 0.2, s)) CHECK(lp_norm(c, kInf) < 1e-13);
}

TEST_CASE("divergence of the semigroup equals the summed semigroup gradient") {
    const auto s = StableParams::make(1.5, 2);
    const Field f = sample(kPlane, [](auto x) { return std::cos(2.0 * x[0] - x[1]); });
    const VectorField outer = spectral_gradient(semigroup_apply(f, 0.3, s));
    const VectorField inner_first = semigroup_gradient(f, 0.3, s);
    CHECK(max_abs_diff(outer[0] + outer[1], inner_first[0] + inner_first[1]) < 1e-12);
}

TEST_CASE("Nyquist derivative mode is zeroed") {
    const GridSpec g{1, 16, 2.0 * kPi};
    const Field f = sample(g, [](auto x) { return std::cos(8.0 * x[0]); });
    CHECK(lp_norm(spectral_gradient(f)[0], kInf) < 1e-12);
}

TEST_CASE("decay exponent formula") {
    CHECK(decay_exponent(1, 1.5, 1.0, 2.0, false) == doctest::Approx(-1.0 / 3.0));
    CHECK(decay_exponent(1, 1.5, 1.0, 2.0, true) == doctest::Approx(-1.0));
    CHECK(decay_exponent(2, 1.5, 2.0, 2.0, false) == doctest::Approx(0.0));
}

TEST_CASE("decay probe recovers the L^1 -> L^2 exponent") {
    const GridSpec g{1, 65536, 200.0};
    const auto s = StableParams::make(1.5, 1);
    const auto ts = logspace(0.015, 2.8, 8);
    const Field f = extremal_profile(g, 1.0);
    const DecayFit plain = decay_rate_probe(f, 1.0, 2.0, s, ts, false);
    const DecayFit grad = decay_rate_probe(f, 1.0, 2.0, s, ts, true);
    CHECK(plain.slope == doctest::Approx(-1.0 / 3.0).epsilon(0.1));
    CHECK(grad.slope == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("decay probe gives zero slope when q = m") {
    const GridSpec g{1, 4096, 200.0};
    const auto s = StableParams::make(1.5, 1);
    const Field f = sample(g, [&](auto x) { return std::exp(-std::pow((x[0] - 100.0) / 10.0, 2)); });
    const DecayFit fit = decay_rate_probe(f, 2.0, 2.0, s, logspace(0.015, 2.8, 8), false);
    CHECK(std::abs(fit.slope) < 0.02);
}

TEST_CASE("decay probe validates its inputs") {
    const auto s = StableParams::make(1.5, 1);
    const Field f = point_mass(kLine);
    const auto ts = logspace(0.01, 0.1, 3);
    CHECK_THROWS_AS(decay_rate_probe(f, 1.0, 2.0, s, ts, false), ParameterError);
    const auto ok = logspace(0.01, 0.1, 4);
    CHECK_THROWS_AS(decay_rate_probe(f, 2.0, 1.0, s, ok, false), ParameterError);
    CHECK_THROWS_AS(decay_rate_probe(f, 0.5, 1.0, s, ok, false), ParameterError);
}

TEST_CASE("point mass has unit mass") { CHECK(integral(point_mass(kPlane)) == doctest::Approx(1.0)); }

TEST_CASE("line fit recovers an exact line") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const LineFit fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.residual < 1e-12);
}
