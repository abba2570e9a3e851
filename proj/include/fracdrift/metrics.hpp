#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fracdrift/grid.hpp"
#include "fracdrift/particles.hpp"

namespace fracdrift {

struct DistanceReport {
    double rho = 0.0;
    double lp_density = 0.0;
    double d_Tp = 0.0;
    double p = 2.0;
    double T = 0.0;
};

/// Synchronous-coupling estimate ((1/N) sum_j [sup_{t <= T} |X1_j - X2_j| ^ 1]^p)^{1/p},
/// an upper bound on the path-space distance. Requires a shared noise lineage.
double coupled_rho(const ParticleEnsemble& a, const ParticleEnsemble& b, double p);
// Same estimator over frames [0, k] for every k.
std::vector<double> coupled_rho_series(const ParticleEnsemble& a, const ParticleEnsemble& b, double p);

/// 1-Wasserstein distance between the d = 1 time slices (sorted samples).
double exact_w1_slice(const ParticleEnsemble& a, const ParticleEnsemble& b, std::size_t k);

/// max over frames of ||f_a - f_b||_p for KDEs with a common bandwidth.
double lp_density_distance(const ParticleEnsemble& a, const ParticleEnsemble& b, double p, double bandwidth,
                           const GridSpec& g);
// ||f_a(t_k) - f_b(t_k)||_p per frame.
std::vector<double> lp_density_series(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                      double bandwidth, const GridSpec& g);

DistanceReport d_metric(const ParticleEnsemble& a, const ParticleEnsemble& b, double p, double bandwidth,
                        const GridSpec& g);
// Same report; also stores the d_metric_series values in `series`.
DistanceReport d_metric(const ParticleEnsemble& a, const ParticleEnsemble& b, double p, double bandwidth,
                        const GridSpec& g, std::vector<double>& series);

/// Running sup in time of max(rho, lp): d(t_k) for the pair.
std::vector<double> d_metric_series(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                    double bandwidth, const GridSpec& g);

struct ContractionDiagnostic {
    std::vector<double> C_hat;        // per n >= 1; NaN when no positive denominator
    double fitted_C = 0.0;            // from log d_n + log n! = a + n log C
    double fitted_log_scale = 0.0;    // a
    double shape_deviation = 0.0;     // max |d_n / model_n - 1|
    std::vector<double> ratios;       // d_{n+1} / d_n
    bool decreasing = false;
    bool time_monotone = true;        // every d_n(t) nondecreasing in t
    bool factorial_consistent = false;
};

/// series[n][k] = d_n(t_k). Per-step constants C_hat_n = max_k d_n(t_k) / int_0^{t_k} d_{n-1},
/// and a global fit of the terminal values to the C^n / n! shape. Verdict: terminal values
/// strictly decreasing and shape deviation below `tolerance`. series[0] is iteration
/// `first_index`, which sets n in the n! of the fit.
ContractionDiagnostic contraction_diagnostic(const std::vector<std::vector<double>>& series,
                                             const std::vector<double>& t_grid, double tolerance = 0.2,
                                             std::size_t first_index = 0);

}  // namespace fracdrift
