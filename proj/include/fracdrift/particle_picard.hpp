#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracdrift/metrics.hpp"
#include "fracdrift/particles.hpp"

namespace fracdrift {

struct ParticlePicardOptions {
    double p = 2.0;
    double tol = 0.0;        // stop once d_Tp(Y^n, Y^{n+1}) < tol
    double bandwidth = 0.0;  // 0 selects default_bandwidth of Y^0 at t = 0
};

struct ParticlePicardResult {
    NoiseBundle noise;
    std::vector<ParticleEnsemble> ensembles;      // Y^0, Y^1, ...
    std::vector<DistanceReport> reports;          // d(Y^n, Y^{n+1})
    std::vector<std::vector<double>> series;      // d(Y^n, Y^{n+1}) as a function of t
    double bandwidth = 0.0;
    double eps_kernel = 0.0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// Y^0 = zero-drift paths, Y^{n+1} = psi_apply(Y^n) on one noise bundle, for up to
/// n_iters applications. Warns when the distance grows three times in a row.
ParticlePicardResult picard_processes(const SimConfig& cfg, std::size_t n_iters, std::uint64_t seed,
                                      const ParticlePicardOptions& opt = {});

}  // namespace fracdrift
