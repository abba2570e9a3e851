#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracdrift/grid.hpp"
#include "fracdrift/kernels.hpp"
#include "fracdrift/simd/dispatch.hpp"
#include "fracdrift/stable.hpp"

namespace fracdrift {

/// n i.i.d. standard symmetric alpha-stable draws with E e^{i xi.S} = e^{-|xi|^alpha},
/// interleaved by component (n * d values). d = 1 uses Chambers-Mallows-Stuck; d = 2 is
/// sub-Gaussian, sqrt(A) G with G ~ N(0, 2I) and A positive (alpha/2)-stable (Kanter).
std::vector<double> sample_stable(const StableParams& s, std::size_t n, std::uint64_t seed);

struct InitialSample {
    std::vector<double> positions;  // N * d, interleaved
    std::vector<double> weights;    // +1 or -1
    double mass = 0.0;              // ||u0||_1
};

/// Categorical draw over cells with probability |u0| dV / ||u0||_1, uniform jitter
/// inside the cell; weight = sign of u0 in the chosen cell.
InitialSample sample_initial(const Field& u0, std::size_t N, std::uint64_t seed);

/// Common random numbers shared by every Picard iterate.
struct NoiseBundle {
    std::uint64_t seed = 0;
    std::size_t N = 0;
    int d = 1;
    std::vector<double> t_grid;
    std::vector<double> increments;  // step-major: ((k * d + c) * N + i), scaled by dt^{1/alpha}
    std::vector<double> initials;    // component-major: (c * N + i)
    std::vector<double> weights;
    double mass = 0.0;

    std::size_t steps() const { return t_grid.empty() ? 0 : t_grid.size() - 1; }
    const double* increment(std::size_t k, int c) const { return increments.data() + (k * d + c) * N; }
};

NoiseBundle make_noise(const Field& u0, std::size_t N, const std::vector<double>& t_grid, const StableParams& s,
                       std::uint64_t seed);

/// N weighted paths on a time grid. Positions are unwrapped (not reduced mod L).
struct ParticleEnsemble {
    double L = 0.0;
    int d = 1;
    std::size_t N = 0;
    std::vector<double> t_grid;
    std::vector<double> paths;  // ((k * d + c) * N + i)
    std::vector<double> weights;
    double mass = 0.0;
    std::uint64_t lineage = 0;  // identifies the noise bundle
    std::vector<std::string> warnings;

    std::size_t frames() const { return t_grid.size(); }
    const double* component(std::size_t k, int c) const { return paths.data() + (k * d + c) * N; }
    double* component(std::size_t k, int c) { return paths.data() + (k * d + c) * N; }
    double signed_mass() const;
};

// Fingerprint of a noise bundle (seed, N, d, time grid).
std::uint64_t lineage_of(const NoiseBundle& noise);

/// Mollified interaction kernel for the particle drift: the periodized Hilbert
/// kernel in d = 1, the nearest-image Riesz pair in d = 2, or zero.
class ParticleKernel {
public:
    ParticleKernel(const CZKernel& k, double L, double eps);
    bool is_zero() const { return zero_; }
    int d() const { return d_; }
    double eps() const { return eps_; }
    // Upper bound on |b_eps|.
    double max_magnitude() const;
    // sum_j sign_j b_eps(x - y_j) for sources [begin, end) of the marginal.
    std::array<double, 2> sum(const double* x, const std::vector<const double*>& ys, const double* sign,
                              std::size_t begin, std::size_t end) const;

private:
    int d_ = 1;
    double eps_ = 0.0;
    bool zero_ = false;
    simd::HilbertTorus hilbert_{};
    simd::RieszTorus2 riesz_{};
};

struct SimConfig {
    GridSpec grid;  // torus and density grid
    std::vector<double> t_grid;
    std::size_t N = 0;
    double eps_kernel = 0.0;  // 0 selects L N^{-1/(d+2)}
    StableParams s;
    CZKernel kern;
    Field u0;

    double resolved_eps() const;
    void validate() const;
};

/// (mass/N) sum_j w_j b_eps(x - X_j(t_k)), excluding particle `self` when given.
std::array<double, 2> drift_eval(const double* x, const ParticleEnsemble& marginal, std::size_t k,
                                 const ParticleKernel& kern, std::optional<std::size_t> self = std::nullopt);

/// Euler scheme X_{k+1} = X_k + dS_k + dt drift(X_k; Y at t_k) on the shared noise.
ParticleEnsemble psi_apply(const ParticleEnsemble& Y, const NoiseBundle& noise, const SimConfig& cfg);
// Zero-drift paths X_0 + S_t.
ParticleEnsemble free_paths(const NoiseBundle& noise, const SimConfig& cfg);

/// Signed Gaussian KDE at frame k on the grid: mass (1/N) sum_j w_j K_h(x - X_j),
/// periodized, truncated at 8h and renormalized per particle.
Field density_from_ensemble(const ParticleEnsemble& ens, std::size_t k, double bandwidth, const GridSpec& g);

// 1.06 MAD N^{-1/5} over all components at frame k, at least the grid spacing.
double default_bandwidth(const ParticleEnsemble& ens, std::size_t k, const GridSpec& g);

}  // namespace fracdrift
