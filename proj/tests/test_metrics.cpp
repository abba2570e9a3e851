#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fracdrift/errors.hpp"
#include "fracdrift/metrics.hpp"
#include "fracdrift/mild.hpp"
#include "fracdrift/random.hpp"

using namespace fracdrift;

namespace {

constexpr double kPi = std::numbers::pi;
const GridSpec kLine{1, 512, 2.0 * kPi};

// d = 1 ensemble with a given path generator, shared lineage tag.
template <class Fn>
ParticleEnsemble make_ensemble(std::size_t N, const std::vector<double>& t, Fn&& path, std::uint64_t lineage = 1,
                               double weight = 1.0) {
    ParticleEnsemble e;
    e.L = kLine.L;
    e.d = 1;
    e.N = N;
    e.t_grid = t;
    e.paths.resize(t.size() * N);
    for (std::size_t k = 0; k < t.size(); ++k)
        for (std::size_t i = 0; i < N; ++i) e.paths[k * N + i] = path(i, k);
    e.weights.assign(N, weight);
    e.mass = 1.0;
    e.lineage = lineage;
    return e;
}

std::vector<double> noise_values(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(count);
    for (auto& x : v) x = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("coupled rho") {
    const std::vector<double> t{0.0, 0.5, 1.0};
    const std::size_t N = 200;
    const auto z = noise_values(N * t.size(), 1);
    const auto a = make_ensemble(N, t, [&](auto i, auto k) { return kPi + z[k * N + i]; });

    SUBCASE("identical ensembles are at distance zero") { CHECK(coupled_rho(a, a, 2.0) == 0.0); }
    SUBCASE("a constant shift below one gives the shift") {
        const auto b = make_ensemble(N, t, [&](auto i, auto k) { return kPi + z[k * N + i] + 0.3; });
        CHECK(coupled_rho(a, b, 2.0) == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(coupled_rho(a, b, 1.0) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("truncation keeps the result at most one") {
        const auto b = make_ensemble(N, t, [&](auto i, auto k) { return kPi + 40.0 * z[k * N + i]; });
        const double r = coupled_rho(a, b, 3.0);
        CHECK(r <= 1.0);
        CHECK(r > 0.5);
    }
    SUBCASE("triangle inequality with truncation slack") {
        const auto w = noise_values(N * t.size(), 2);
        const auto b = make_ensemble(N, t, [&](auto i, auto k) { return kPi + z[k * N + i] + 0.4 * w[k * N + i]; });
        const auto c = make_ensemble(N, t, [&](auto i, auto k) { return kPi - 0.7 * w[k * N + i]; });
        for (double p : {1.0, 2.0, 4.0}) CHECK(coupled_rho(a, c, p) <= coupled_rho(a, b, p) + coupled_rho(b, c, p) + 1e-12);
    }
    SUBCASE("the estimate grows with the horizon") {
        const auto w = noise_values(N * t.size(), 3);
        const auto b = make_ensemble(N, t, [&](auto i, auto k) { return kPi + z[k * N + i] + 0.2 * w[k * N + i]; });
        const auto s = coupled_rho_series(a, b, 2.0);
        for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] >= s[k - 1]);
        CHECK(s.back() == coupled_rho(a, b, 2.0));
    }
    SUBCASE("different lineages are refused") {
        const auto b = make_ensemble(N, t, [&](auto i, auto k) { return z[k * N + i]; }, 2);
        CHECK_THROWS_AS(coupled_rho(a, b, 2.0), ConfigError);
    }
}

TEST_CASE("exact slice W1") {
    const std::vector<double> t{0.0};
    const std::size_t N = 500;
    const auto z = noise_values(N, 4);
    const auto a = make_ensemble(N, t, [&](auto i, auto) { return z[i]; });
    CHECK(exact_w1_slice(a, a, 0) == 0.0);

    const auto zeros = make_ensemble(N, t, [](auto, auto) { return 0.0; });
    const auto shifted = make_ensemble(N, t, [](auto, auto) { return -0.8; });
    CHECK(exact_w1_slice(zeros, shifted, 0) == doctest::Approx(0.8));

    // The synchronous coupling on a slice is one admissible plan.
    const auto w = noise_values(N, 5);
    const auto b = make_ensemble(N, t, [&](auto i, auto) { return 0.5 * z[i] + w[i]; });
    double coupled = 0.0;
    for (std::size_t i = 0; i < N; ++i) coupled += std::abs(a.paths[i] - b.paths[i]);
    coupled /= N;
    CHECK(exact_w1_slice(a, b, 0) <= coupled);

    const auto signed_e = make_ensemble(N, t, [&](auto i, auto) { return z[i]; }, 1, -1.0);
    CHECK_THROWS_AS(exact_w1_slice(a, signed_e, 0), UnsupportedError);
}

TEST_CASE("density distance") {
    const std::vector<double> t{0.0};
    const std::size_t N = 10000;
    const double sigma = 0.5, shift = 0.2 * sigma;
    const auto z = noise_values(N, 6);
    const auto a = make_ensemble(N, t, [&](auto i, auto) { return kPi + sigma * z[i]; });
    const auto b = make_ensemble(N, t, [&](auto i, auto) { return kPi + sigma * z[i] + shift; });
    const double h = default_bandwidth(a, 0, kLine);

    SUBCASE("identical ensembles are at distance zero") { CHECK(lp_density_distance(a, a, 2.0, h, kLine) == 0.0); }
    SUBCASE("symmetric") {
        CHECK(lp_density_distance(a, b, 2.0, h, kLine) == lp_density_distance(b, a, 2.0, h, kLine));
    }
    SUBCASE("shifted Gaussian clouds match the analytic L2 difference") {
        // KDE of a Gaussian cloud is Gaussian with variance sigma^2 + h^2.
        const double s2 = sigma * sigma + h * h;
        const Field ga = sample(kLine, [&](auto x) {
            return std::exp(-0.5 * (x[0] - kPi) * (x[0] - kPi) / s2) / std::sqrt(2.0 * kPi * s2);
        });
        const Field gb = sample(kLine, [&](auto x) {
            const double r = x[0] - kPi - shift;
            return std::exp(-0.5 * r * r / s2) / std::sqrt(2.0 * kPi * s2);
        });
        const double oracle = lp_norm(ga - gb, 2.0);
        CHECK(lp_density_distance(a, b, 2.0, h, kLine) == doctest::Approx(oracle).epsilon(0.1));
    }
    SUBCASE("bandwidth below the grid spacing is rejected") {
        CHECK_THROWS_AS(lp_density_distance(a, b, 2.0, 0.5 * kLine.spacing(), kLine), ParameterError);
    }
}

TEST_CASE("d metric report") {
    const std::vector<double> t{0.0, 0.5};
    const std::size_t N = 2000;
    const auto z = noise_values(N * 2, 7);
    const auto a = make_ensemble(N, t, [&](auto i, auto k) { return kPi + z[k * N + i]; });
    const auto b = make_ensemble(N, t, [&](auto i, auto k) { return kPi + z[k * N + i] + 0.05 * k; });
    const double h = 0.1;

    const auto same = d_metric(a, a, 2.0, h, kLine);
    CHECK(same.rho == 0.0);
    CHECK(same.lp_density == 0.0);
    CHECK(same.d_Tp == 0.0);

    const auto r = d_metric(a, b, 2.0, h, kLine);
    CHECK(r.d_Tp == std::max(r.rho, r.lp_density));
    CHECK(r.rho == doctest::Approx(0.05));
    CHECK(r.T == 0.5);
    CHECK(r.p == 2.0);
    const auto rev = d_metric(b, a, 2.0, h, kLine);
    CHECK(rev.d_Tp == r.d_Tp);

    const auto s = d_metric_series(a, b, 2.0, h, kLine);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == r.d_Tp);
}

TEST_CASE("contraction diagnostic") {
    const std::vector<double> t = uniform_times(1.0, 200);
    auto series_of = [&](auto&& fn, std::size_t count) {
        std::vector<std::vector<double>> s(count, std::vector<double>(t.size()));
        for (std::size_t n = 0; n < count; ++n)
            for (std::size_t k = 0; k < t.size(); ++k) s[n][k] = fn(n, t[k]);
        return s;
    };

    SUBCASE("factorial sequence is consistent and recovers C") {
        const double C = 0.9, d0 = 0.3;
        const auto s = series_of([&](std::size_t n, double tt) { return d0 * std::pow(C * tt, n) / std::tgamma(n + 1.0); }, 6);
        const auto r = contraction_diagnostic(s, t);
        CHECK(r.factorial_consistent);
        CHECK(r.decreasing);
        CHECK(r.fitted_C == doctest::Approx(C).epsilon(0.1));
        CHECK(r.shape_deviation < 1e-9);
        for (double c : r.C_hat) CHECK(c == doctest::Approx(C).epsilon(0.02));
        CHECK(r.time_monotone);
    }
    SUBCASE("factorial sequence before its peak is not decreasing") {
        const double C = 2.5;
        const auto s = series_of([&](std::size_t n, double tt) { return std::pow(C * tt, n) / std::tgamma(n + 1.0); }, 6);
        const auto r = contraction_diagnostic(s, t);
        CHECK_FALSE(r.decreasing);
        CHECK_FALSE(r.factorial_consistent);
        CHECK(r.fitted_C == doctest::Approx(C).epsilon(0.1));
        CHECK(r.shape_deviation < 1e-9);
    }
    SUBCASE("geometric sequence has finite stable step constants") {
        const double q = 0.5;
        const auto s = series_of([&](std::size_t n, double tt) { return std::pow(q, n) * tt; }, 6);
        const auto r = contraction_diagnostic(s, t);
        REQUIRE(r.C_hat.size() == 5);
        for (double c : r.C_hat) {
            CHECK(std::isfinite(c));
            CHECK(c == doctest::Approx(r.C_hat[0]).epsilon(1e-9));
        }
        CHECK(r.decreasing);
        for (double x : r.ratios) CHECK(x == doctest::Approx(q));
    }
    SUBCASE("increasing sequence gives a negative verdict with ratios") {
        const auto s = series_of([&](std::size_t n, double tt) { return (1.0 + n) * tt; }, 4);
        const auto r = contraction_diagnostic(s, t);
        CHECK_FALSE(r.decreasing);
        CHECK_FALSE(r.factorial_consistent);
        REQUIRE(r.ratios.size() == 3);
        CHECK(r.ratios[0] == doctest::Approx(2.0));
    }
    SUBCASE("time non-monotone series is reported, not fatal") {
        auto s = series_of([&](std::size_t n, double tt) { return std::pow(0.5, n) * (1.0 + tt); }, 4);
        s[2][50] = 10.0;
        const auto r = contraction_diagnostic(s, t);
        CHECK_FALSE(r.time_monotone);
    }
    SUBCASE("fewer than three iterations is rejected") {
        const auto s = series_of([&](std::size_t, double tt) { return tt; }, 2);
        CHECK_THROWS_AS(contraction_diagnostic(s, t), ParameterError);
    }
}
