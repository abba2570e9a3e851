#include "fracdrift/particle_picard.hpp"

#include <algorithm>
#include <sstream>

#include "fracdrift/errors.hpp"

namespace fracdrift {

ParticlePicardResult picard_processes(const SimConfig& cfg, std::size_t n_iters, std::uint64_t seed,
                                      const ParticlePicardOptions& opt) {
    cfg.validate();
    if (n_iters < 2) throw ParameterError("picard_processes: n_iters must be >= 2");

    ParticlePicardResult out;
    out.noise = make_noise(cfg.u0, cfg.N, cfg.t_grid, cfg.s, seed);
    out.eps_kernel = cfg.resolved_eps();
    out.ensembles.push_back(free_paths(out.noise, cfg));
    out.bandwidth = opt.bandwidth > 0.0 ? opt.bandwidth : default_bandwidth(out.ensembles[0], 0, cfg.grid);

    int rising = 0;
    for (std::size_t n = 0; n < n_iters; ++n) {
        ParticleEnsemble next = psi_apply(out.ensembles.back(), out.noise, cfg);
        for (const auto& w : next.warnings)
            if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
        const ParticleEnsemble& prev = out.ensembles.back();
        std::vector<double> series;
        out.reports.push_back(d_metric(prev, next, opt.p, out.bandwidth, cfg.grid, series));
        out.series.push_back(std::move(series));
        out.ensembles.push_back(std::move(next));

        const std::size_t m = out.reports.size();
        if (m >= 2 && out.reports[m - 1].d_Tp > out.reports[m - 2].d_Tp) {
            if (++rising == 3) {
                std::ostringstream msg;
                msg << "non-contraction: distance increased 3 times in a row, ratios";
                for (std::size_t j = m - 3; j < m; ++j)
                    msg << ' ' << out.reports[j].d_Tp / out.reports[j - 1].d_Tp;
                out.warnings.push_back(msg.str());
            }
        } else {
            rising = 0;
        }
        if (out.reports.back().d_Tp < opt.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace fracdrift
