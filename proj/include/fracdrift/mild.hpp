#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracdrift/grid.hpp"
#include "fracdrift/kernels.hpp"
#include "fracdrift/stable.hpp"

namespace fracdrift {

/// Time history of a field: frames[k] sampled at t_grid[k], t_grid[0] = 0.
struct FieldTrajectory {
    GridSpec grid;
    std::vector<double> t_grid;
    std::vector<Field> frames;

    void validate() const;
    std::size_t size() const { return frames.size(); }
    double horizon() const { return t_grid.empty() ? 0.0 : t_grid.back(); }
};

// Uniform time grid 0, T/steps, ..., T.
std::vector<double> uniform_times(double T, std::size_t steps);
// Trajectory with every frame equal to f.
FieldTrajectory constant_trajectory(const Field& f, const std::vector<double>& t_grid);
// Frames p_t * u0.
FieldTrajectory heat_trajectory(const Field& u0, const std::vector<double>& t_grid, const StableParams& s);

/// max over frames of ||frame||_p.
double traj_norm(const FieldTrajectory& u, double p);
// traj_norm(a - b, p).
double traj_distance(const FieldTrajectory& a, const FieldTrajectory& b, double p);

/// The drift B(u) as a vector field with d components. In d = 1 this is the
/// scalar kernel. In d = 2 a vector kernel (Riesz pair) is used as is, and a
/// scalar kernel K gives B(u) = (K u) e for the configured unit direction e.
class DriftOperator {
public:
    DriftOperator(const CZKernel& k, const GridSpec& g, std::array<double, 2> direction = {1.0, 0.0});

    const GridSpec& grid() const { return grid_; }
    int components() const { return static_cast<int>(tables_.size()); }
    bool is_zero() const { return zero_; }
    // B(u).
    VectorField apply(const Field& u) const;
    // Spectral coefficients of div(u B(v)), zero on the DC mode.
    std::vector<cplx> flux_divergence_hat(const Field& u, const Field& v) const;

private:
    GridSpec grid_;
    std::vector<std::vector<cplx>> tables_;
    std::vector<std::vector<cplx>> grad_;  // i k_j with Nyquist zeroed
    bool zero_ = false;
};

struct DuhamelOptions {
    int nodes = 32;  // Gauss-Legendre nodes per output frame
};

/// B(u, v)(t) = int_0^t sum_j d_j p_{t-s} * (u_s B_j(v_s)) ds on every frame time.
/// The substitution s = t (1 - sigma^gamma), gamma = alpha / (alpha - 1), absorbs the
/// (t - s)^{-1/alpha} endpoint singularity; sigma is integrated by Gauss-Legendre and
/// the flux is interpolated between frames by causal cubic Lagrange in s.
FieldTrajectory duhamel_bilinear(const FieldTrajectory& u, const FieldTrajectory& v, const DriftOperator& drift,
                                 const StableParams& s, const DuhamelOptions& opt = {});
FieldTrajectory duhamel_bilinear(const FieldTrajectory& u, const FieldTrajectory& v, const CZKernel& kern,
                                 const StableParams& s, const DuhamelOptions& opt = {});

struct EtaEstimate {
    std::vector<double> T;
    std::vector<double> eta;
    double fitted_exponent = 0.0;
    double fitted_log_constant = 0.0;  // log C in eta = C T^e
    double fit_residual = 0.0;
    double exponent_claimed = 0.0;    // 1 - 1/alpha
    double exponent_integrated = 0.0; // 1 - 1/alpha - d/(alpha p)
    std::string matches;              // "claimed", "integrated", "both" or "neither"
};

struct EtaOptions {
    GridSpec grid{1, 4096, 32.0};
    int intermediate_times = 24;  // log-spaced sup-in-time sample points
    DuhamelOptions duhamel{};
    double match_tolerance = 0.1;
};

/// For every T, the largest observed ||B(u, v)||_X / (||u||_X ||v||_X) over random
/// time-constant pairs: bumps whose width scales as T^{1/alpha} (drawn once per T,
/// shared across horizons) plus fixed-scale band-limited fields. All pairs are
/// evaluated on one time grid, so eta is nondecreasing along a sorted T list.
EtaEstimate eta_estimate(const CZKernel& kern, const StableParams& s, double p, std::vector<double> T_list,
                         int trials, std::uint64_t seed, const EtaOptions& opt = {});

/// eta(T) = safety * C * T^exponent.
struct EtaModel {
    double C = 0.0;
    double exponent = 0.0;
    double safety = 1.5;
    double operator()(double T) const;
    static EtaModel from_fit(const EtaEstimate& e, double safety = 1.5);
};

struct LocalExistenceCert {
    bool certified = false;
    double T_star = 0.0;
    double eta_at_T_star = 0.0;
    double y_norm = 0.0;
    double R = 0.0;
    std::string note;
};

// (1 - sqrt(1 - 4 eta y)) / (2 eta); requires 4 eta y <= 1.
double ball_radius(double eta, double y_norm);

/// Largest T on T_search with 4 eta(T) ||y||_X < 1, y = (p_t * u0) on a uniform grid
/// of `steps` steps up to T. An empty feasible set is reported, not thrown.
LocalExistenceCert local_horizon(const Field& u0, const StableParams& s, double p, const EtaModel& eta,
                                 const std::vector<double>& T_search, std::size_t steps = 16);

struct PicardOptions {
    std::size_t n_max = 50;
    double tol = 1e-10;
    bool relax = false;  // u <- (u + (y - B(u, u))) / 2
    DuhamelOptions duhamel{};
};

struct PicardResult {
    FieldTrajectory u;
    FieldTrajectory y;
    double y_norm = 0.0;
    std::vector<double> residuals;  // traj_norm(u^{n+1} - u^n, p)
    std::vector<double> norms;      // traj_norm(u^{n+1}, p)
    bool converged = false;
    std::vector<std::string> warnings;
};

/// u^{n+1} = y - B(u^n, u^n), y = (p_t * u0)_t, on a uniform grid of `steps` steps.
/// Throws DivergenceError when a norm exceeds 10 * 2 ||y||_X.
PicardResult picard_solve(const Field& u0, const DriftOperator& drift, const StableParams& s, double p, double T,
                          std::size_t steps, const PicardOptions& opt = {},
                          const std::optional<LocalExistenceCert>& cert = std::nullopt);

/// psi(x, s) = phi(x) chi(s), phi = sum_m a_m cos(k_m . x) + b_m sin(k_m . x),
/// chi(s) = sum_j c_j s^j (degree <= 4).
struct TestFunction {
    struct Mode {
        std::array<double, 2> k{};  // wavevector
        double a = 0.0;
        double b = 0.0;
    };
    std::vector<Mode> modes;
    std::vector<double> chi;

    double chi_at(double s) const;
    double dchi_at(double s) const;
    Field phi(const GridSpec& g) const;
    VectorField grad_phi(const GridSpec& g) const;
    // (-Delta)^{alpha/2} phi (positive operator).
    Field frac_phi(const GridSpec& g, double alpha) const;
};

// psi == 1.
TestFunction unit_test_function();
// Low-mode trigonometric phi and a degree-4 chi scaled to [0, T].
std::vector<TestFunction> random_test_functions(const GridSpec& g, std::size_t count, double T, std::uint64_t seed);

/// |int psi(t) u_t - int psi(0) u_0 - int_0^t int [d_s psi - (-Delta)^{alpha/2} psi + B(u_s) . grad psi] u_s|
/// per test function; the time integral uses Simpson's rule over the frames.
std::vector<double> weak_residual(const FieldTrajectory& u, const DriftOperator& drift, const StableParams& s,
                                  const std::vector<TestFunction>& psi_set);

// Simpson's rule on a possibly nonuniform grid (quadratic through each pair of intervals).
double simpson(const std::vector<double>& t, const std::vector<double>& f);

}  // namespace fracdrift
