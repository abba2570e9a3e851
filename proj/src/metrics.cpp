#include "fracdrift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracdrift/errors.hpp"

namespace fracdrift {

namespace {

void require_coupled(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    if (a.lineage != b.lineage)
        throw ConfigError("coupled distance: ensembles do not share a noise lineage");
    if (a.N != b.N || a.d != b.d || a.t_grid != b.t_grid)
        throw ConfigError("coupled distance: ensembles must share N, d and the time grid");
}

void require_shared_times(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    if (a.t_grid != b.t_grid || a.d != b.d) throw ConfigError("density distance: ensembles must share d and t_grid");
}

double displacement(const ParticleEnsemble& a, const ParticleEnsemble& b, std::size_t k, std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < a.d; ++c) {
        const double r = a.component(k, c)[i] - b.component(k, c)[i];
        s += r * r;
    }
    return std::sqrt(s);
}

double p_mean(const std::vector<double>& v, double p) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(x, p);
    return std::pow(s / static_cast<double>(v.size()), 1.0 / p);
}

}  // namespace

std::vector<double> coupled_rho_series(const ParticleEnsemble& a, const ParticleEnsemble& b, double p) {
    require_coupled(a, b);
    if (!(p >= 1.0)) throw ParameterError("coupled_rho: p must be >= 1");
    std::vector<double> sup(a.N, 0.0), out(a.frames(), 0.0);
    for (std::size_t k = 0; k < a.frames(); ++k) {
        for (std::size_t i = 0; i < a.N; ++i) sup[i] = std::max(sup[i], std::min(displacement(a, b, k, i), 1.0));
        out[k] = p_mean(sup, p);
    }
    return out;
}

double coupled_rho(const ParticleEnsemble& a, const ParticleEnsemble& b, double p) {
    const auto s = coupled_rho_series(a, b, p);
    return s.empty() ? 0.0 : s.back();
}

double exact_w1_slice(const ParticleEnsemble& a, const ParticleEnsemble& b, std::size_t k) {
    if (a.d != 1 || b.d != 1) throw UnsupportedError("exact_w1_slice: d = 1 only");
    if (a.N != b.N) throw ConfigError("exact_w1_slice: ensembles must have equal N");
    if (k >= a.frames() || k >= b.frames()) throw ParameterError("exact_w1_slice: frame out of range");
    auto nonneg = [](const ParticleEnsemble& e) {
        return std::all_of(e.weights.begin(), e.weights.end(), [](double w) { return w >= 0.0; });
    };
    if (!nonneg(a) || !nonneg(b)) throw UnsupportedError("exact_w1_slice: signed weights are not supported");
    if (a.N == 0) return 0.0;
    std::vector<double> x(a.component(k, 0), a.component(k, 0) + a.N);
    std::vector<double> y(b.component(k, 0), b.component(k, 0) + b.N);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s / static_cast<double>(x.size());
}

std::vector<double> lp_density_series(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                      double bandwidth, const GridSpec& g) {
    require_shared_times(a, b);
    std::vector<double> out(a.frames());
    for (std::size_t k = 0; k < a.frames(); ++k) {
        const Field fa = density_from_ensemble(a, k, bandwidth, g);
        const Field fb = density_from_ensemble(b, k, bandwidth, g);
        out[k] = lp_norm(fa - fb, p);
    }
    return out;
}

double lp_density_distance(const ParticleEnsemble& a, const ParticleEnsemble& b, double p, double bandwidth,
                           const GridSpec& g) {
    const auto s = lp_density_series(a, b, p, bandwidth, g);
    return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

DistanceReport d_metric(const ParticleEnsemble& a, const ParticleEnsemble& b, double p, double bandwidth,
                        const GridSpec& g, std::vector<double>& series) {
    const auto rho = coupled_rho_series(a, b, p);
    const auto lp = lp_density_series(a, b, p, bandwidth, g);
    series.assign(rho.size(), 0.0);
    double lp_sup = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) {
        lp_sup = std::max(lp_sup, lp[k]);
        series[k] = std::max(rho[k], lp_sup);
    }
    DistanceReport r;
    r.p = p;
    r.T = a.t_grid.empty() ? 0.0 : a.t_grid.back();
    r.rho = rho.empty() ? 0.0 : rho.back();
    r.lp_density = lp_sup;
    r.d_Tp = std::max(r.rho, r.lp_density);
    return r;
}

DistanceReport d_metric(const ParticleEnsemble& a, const ParticleEnsemble& b, double p, double bandwidth,
                        const GridSpec& g) {
    std::vector<double> series;
    return d_metric(a, b, p, bandwidth, g, series);
}

std::vector<double> d_metric_series(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                    double bandwidth, const GridSpec& g) {
    std::vector<double> series;
    d_metric(a, b, p, bandwidth, g, series);
    return series;
}

ContractionDiagnostic contraction_diagnostic(const std::vector<std::vector<double>>& series,
                                             const std::vector<double>& t_grid, double tolerance,
                                             std::size_t first_index) {
    if (series.size() < 3) throw ParameterError("contraction_diagnostic: needs at least 3 iterations");
    for (const auto& s : series)
        if (s.size() != t_grid.size()) throw ParameterError("contraction_diagnostic: series length != t_grid");

    ContractionDiagnostic out;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (const auto& s : series)
        for (std::size_t k = 1; k < s.size(); ++k)
            if (s[k] < s[k - 1] * (1.0 - 1e-12)) out.time_monotone = false;

    for (std::size_t n = 1; n < series.size(); ++n) {
        double integral = 0.0, best = nan;
        for (std::size_t k = 1; k < t_grid.size(); ++k) {
            integral += 0.5 * (series[n - 1][k] + series[n - 1][k - 1]) * (t_grid[k] - t_grid[k - 1]);
            if (integral > 0.0) {
                const double c = series[n][k] / integral;
                best = std::isnan(best) ? c : std::max(best, c);
            }
        }
        out.C_hat.push_back(best);
    }

    std::vector<double> D;
    for (const auto& s : series) D.push_back(s.back());
    out.decreasing = true;
    for (std::size_t n = 0; n + 1 < D.size(); ++n) {
        out.ratios.push_back(D[n] > 0.0 ? D[n + 1] / D[n] : nan);
        if (!(D[n + 1] < D[n])) out.decreasing = false;
    }

    // Least squares for log D_n + log n! = a + n log C.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t n = 0; n < D.size(); ++n) {
        if (!(D[n] > 0.0)) continue;
        const double x = static_cast<double>(n + first_index);
        const double y = std::log(D[n]) + std::lgamma(x + 1.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1.0;
    }
    if (m < 3.0) {
        out.fitted_C = nan;
        out.shape_deviation = std::numeric_limits<double>::infinity();
        return out;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.fitted_log_scale = (sy - slope * sx) / m;
    out.fitted_C = std::exp(slope);
    for (std::size_t n = 0; n < D.size(); ++n) {
        const double x = static_cast<double>(n + first_index);
        const double model = std::exp(out.fitted_log_scale + x * slope - std::lgamma(x + 1.0));
        out.shape_deviation = std::max(out.shape_deviation, std::abs(D[n] / model - 1.0));
    }
    out.factorial_consistent = out.decreasing && out.shape_deviation < tolerance;
    return out;
}

}  // namespace fracdrift
