#include "fracdrift/runner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "fracdrift/errors.hpp"
#include "fracdrift/io.hpp"
#include "fracdrift/kernels.hpp"
#include "fracdrift/metrics.hpp"
#include "fracdrift/mild.hpp"
#include "fracdrift/particle_picard.hpp"
#include "fracdrift/particles.hpp"
#include "fracdrift/spectral.hpp"

namespace fracdrift {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kManifestName = "manifest.json";

std::string num(double v) { return format_double(v); }

class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

    fs::path path(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }
    void csv(const std::string& name, const CsvTable& t) { t.write(path(name)); }
    void json_file(const std::string& name, const json& j) { write_text(path(name), j.dump(2) + "\n"); }

    void check(const std::string& name, bool passed, const std::string& detail) {
        checks.push_back({name, passed, detail});
    }
    void warn(const std::vector<std::string>& ws) {
        for (const auto& w : ws)
            if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
    }

    json file_list() const {
        std::vector<std::string> names = names_;
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        json files = json::array();
        for (const auto& n : names)
            files.push_back({{"name", n}, {"sha256", sha256_file(dir_ / n)}, {"bytes", fs::file_size(dir_ / n)}});
        return files;
    }

    std::vector<Check> checks;
    json diagnostics = json::object();
    std::vector<std::string> warnings;

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

double json_number(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::nan("");
    }
    return v.get<double>();
}

json number_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number_json(x));
    return a;
}

// Linear interpolation of a trajectory in time.
Field frame_at(const FieldTrajectory& u, double t) {
    const auto& tg = u.t_grid;
    if (t <= tg.front()) return u.frames.front();
    if (t >= tg.back()) return u.frames.back();
    const auto it = std::upper_bound(tg.begin(), tg.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - tg.begin()) - 1;
    const double w = (t - tg[k]) / (tg[k + 1] - tg[k]);
    if (w == 0.0) return u.frames[k];
    return (1.0 - w) * u.frames[k] + w * u.frames[k + 1];
}

// ---------------------------------------------------------------- decay

void suite_decay(const RunConfig& c, Artifacts& art, std::ostream& log) {
    const auto& dc = c.decay;
    const auto ts = logspace(dc.t_min, dc.t_max, dc.times);
    CsvTable slopes({"alpha", "q", "m", "gradient", "theoretical_slope", "fitted_slope", "rel_err"});
    CsvTable norms({"alpha", "q", "m", "gradient", "t", "norm"});
    double worst = 0.0;
    std::string worst_row;
    for (double alpha : dc.alphas) {
        const auto s = StableParams::make(alpha, dc.grid.d);
        for (const auto& [q, m] : dc.pairs) {
            const Field f = extremal_profile(dc.grid, q);
            for (bool grad : {false, true}) {
                const DecayFit fit = decay_rate_probe(f, q, m, s, ts, grad);
                const double theo = decay_exponent(dc.grid.d, alpha, q, m, grad);
                const double rel = std::abs(fit.slope - theo) / std::abs(theo);
                const std::int64_t g = grad ? 1 : 0;
                slopes.add({alpha, q, m, g, theo, fit.slope, rel});
                for (std::size_t j = 0; j < ts.size(); ++j) norms.add({alpha, q, m, g, ts[j], fit.norms[j]});
                std::ostringstream row;
                row << "alpha=" << num(alpha) << " q=" << num(q) << " m=" << num(m) << " gradient=" << g
                    << " rel_err=" << num(rel);
                if (rel >= worst) {
                    worst = rel;
                    worst_row = row.str();
                }
                log << "[decay] " << row.str() << '\n';
            }
        }
    }
    art.csv("decay_slopes.csv", slopes);
    art.csv("decay_norms.csv", norms);
    art.check("decay slopes within tolerance", worst <= dc.tolerance,
              "worst " + worst_row + " (tolerance " + num(dc.tolerance) + ")");
}

// ---------------------------------------------------------------- eta

std::vector<double> eta_horizons(const RunConfig& c) {
    return c.eta.T_list.empty() ? logspace(0.05, 0.8, 6) : c.eta.T_list;
}

void write_eta(Artifacts& art, const std::string& name, const EtaEstimate& e) {
    CsvTable t({"T", "eta"});
    for (std::size_t j = 0; j < e.T.size(); ++j) t.add({e.T[j], e.eta[j]});
    art.csv(name, t);
}

json eta_fit_json(const EtaEstimate& e) {
    return {{"fitted_exponent", e.fitted_exponent},       {"fitted_log_constant", e.fitted_log_constant},
            {"fit_residual", e.fit_residual},             {"exponent_claimed", e.exponent_claimed},
            {"exponent_integrated", e.exponent_integrated}, {"matches", e.matches}};
}

void suite_eta(const RunConfig& c, Artifacts& art, std::ostream& log) {
    const auto& ec = c.eta;
    const CZKernel kern = parse_kernel(c.kernel, ec.grid.d, ec.grid.L);
    const auto s = StableParams::make(c.alpha, ec.grid.d);
    EtaOptions opt;
    opt.grid = ec.grid;
    opt.intermediate_times = ec.intermediate;
    opt.match_tolerance = ec.match_tolerance;
    const EtaEstimate e = eta_estimate(kern, s, c.p, eta_horizons(c), ec.trials, c.seed, opt);
    for (std::size_t j = 0; j < e.T.size(); ++j) log << "[eta] T=" << num(e.T[j]) << " eta=" << num(e.eta[j]) << '\n';
    log << "[eta] exponent " << num(e.fitted_exponent) << " matches " << e.matches << '\n';
    write_eta(art, "eta.csv", e);
    json fit = eta_fit_json(e);
    fit["match_tolerance"] = ec.match_tolerance;
    art.json_file("eta_fit.json", fit);
    art.diagnostics["eta_matches"] = e.matches;
    art.diagnostics["eta_exponent"] = e.fitted_exponent;
    art.check("eta fit residual", e.fit_residual < ec.residual_tolerance,
              "residual " + num(e.fit_residual) + " < " + num(ec.residual_tolerance) + "; exponent " +
                  num(e.fitted_exponent) + " matches " + e.matches);
}

// ---------------------------------------------------------------- solve

struct SolveRoute {
    Field u0;
    StableParams s;
    CZKernel kern;
    std::unique_ptr<DriftOperator> drift;
    std::optional<EtaEstimate> eta;
    EtaModel model;     // with safety factor, used for the certificate
    EtaModel measured;  // raw fit
    LocalExistenceCert cert;
    double T_run = 0.0;
    std::optional<PicardResult> result;
    std::string failure;
};

// clamp: solve to min(T, T*); otherwise solve to T and let picard_solve flag an uncertified horizon.
SolveRoute solve_route(const RunConfig& c, std::ostream& log, bool clamp) {
    SolveRoute r;
    r.u0 = make_initial(c.u0, c.grid);
    r.s = StableParams::make(c.alpha, c.grid.d);
    r.kern = parse_kernel(c.kernel, c.grid.d, c.grid.L);
    r.drift = std::make_unique<DriftOperator>(r.kern, c.grid);
    if (r.drift->is_zero()) {
        r.model = EtaModel{0.0, 1.0 - 1.0 / c.alpha, 1.0};
        r.measured = r.model;
    } else {
        EtaOptions opt;
        opt.grid = c.grid;
        opt.intermediate_times = c.eta.intermediate;
        opt.match_tolerance = c.eta.match_tolerance;
        opt.duhamel.nodes = c.solve.nodes;
        r.eta = eta_estimate(r.kern, r.s, c.p, logspace(c.T / 16.0, c.T, c.solve.horizon_points), c.solve.eta_trials,
                             derive_seed(c.seed, 11), opt);
        r.model = EtaModel::from_fit(*r.eta);
        r.measured = EtaModel::from_fit(*r.eta, 1.0);
        log << "[solve] eta(T) = " << num(std::exp(r.eta->fitted_log_constant)) << " T^"
            << num(r.eta->fitted_exponent) << '\n';
    }
    auto search = logspace(c.T / 64.0, c.T, 16);
    search.back() = c.T;
    r.cert = local_horizon(r.u0, r.s, c.p, r.model, search);
    if (clamp && !r.cert.certified) {
        r.failure = r.cert.note;
        return r;
    }
    r.T_run = clamp ? std::min(c.T, r.cert.T_star) : c.T;
    log << "[solve] certified horizon " << num(r.cert.T_star) << ", solving to " << num(r.T_run) << '\n';
    PicardOptions po;
    po.n_max = c.solve.n_max;
    po.tol = c.solve.tol;
    po.relax = c.solve.relax;
    po.duhamel.nodes = c.solve.nodes;
    try {
        r.result = picard_solve(r.u0, *r.drift, r.s, c.p, r.T_run, c.solve.steps, po, r.cert);
    } catch (const DivergenceError& e) {
        r.failure = e.what();
    }
    return r;
}

json certificate_json(const SolveRoute& r, double contraction_bound) {
    json j;
    j["certified"] = r.cert.certified;
    j["T_star"] = r.cert.T_star;
    j["T_run"] = r.T_run;
    j["eta_at_T_star"] = r.cert.eta_at_T_star;
    j["y_norm"] = r.cert.y_norm;
    j["R"] = r.cert.R;
    j["note"] = r.cert.note;
    j["eta_model"] = {{"C", r.model.C}, {"exponent", r.model.exponent}, {"safety", r.model.safety}};
    j["measured_eta_at_T_run"] = r.measured(r.T_run);
    j["contraction_bound"] = contraction_bound;
    return j;
}

void suite_solve(const RunConfig& c, Artifacts& art, std::ostream& log) {
    const SolveRoute r = solve_route(c, log, true);
    if (r.eta) {
        write_eta(art, "eta.csv", *r.eta);
        art.diagnostics["eta_matches"] = r.eta->matches;
    }
    const double y_norm = r.cert.y_norm;
    const double bound = 4.0 * r.measured(r.T_run) * y_norm + c.solve.ratio_slack;
    art.diagnostics["T_run"] = r.T_run;
    art.diagnostics["lipschitz_u0"] = lipschitz_constant(r.u0);
    art.diagnostics["lip1_initial"] = lipschitz_constant(r.u0) <= 1.0;
    art.check("certified horizon", r.cert.certified,
              r.cert.certified ? "T* = " + num(r.cert.T_star) : r.cert.note);
    if (!r.result) {
        art.json_file("certificate.json", certificate_json(r, bound));
        art.check("picard completed", false, r.failure);
        return;
    }
    const PicardResult& pr = *r.result;
    art.warn(pr.warnings);
    const double ynorm_run = pr.y_norm;

    CsvTable res({"iter", "residual", "norm"});
    for (std::size_t i = 0; i < pr.residuals.size(); ++i)
        res.add({static_cast<std::int64_t>(i + 1), pr.residuals[i], pr.norms[i]});
    art.csv("residuals.csv", res);
    json cert = certificate_json(r, 4.0 * r.measured(r.T_run) * ynorm_run + c.solve.ratio_slack);
    cert["iterations"] = pr.residuals.size();
    cert["converged"] = pr.converged;
    art.json_file("certificate.json", cert);
    write_field_trajectory(art.path("solution.fdfield"), pr.u);

    art.check("picard converged", pr.converged,
              "final residual " + num(pr.residuals.empty() ? 0.0 : pr.residuals.back()) + " after " +
                  std::to_string(pr.residuals.size()) + " iterations");

    const double floor = std::max(c.solve.tol, 1e-12 * std::max(1.0, ynorm_run));
    const double ratio_bound = 4.0 * r.measured(r.T_run) * ynorm_run + c.solve.ratio_slack;
    bool monotone = true;
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i + 1 < pr.residuals.size(); ++i) {
        if (pr.residuals[i] <= floor) break;
        if (!(pr.residuals[i + 1] < pr.residuals[i])) monotone = false;
        worst_ratio = std::max(worst_ratio, pr.residuals[i + 1] / pr.residuals[i]);
    }
    art.check("residuals decrease monotonically", monotone, "checked above floor " + num(floor));
    art.check("contraction ratio bound", worst_ratio <= ratio_bound,
              "max ratio " + num(worst_ratio) + " <= 4 eta ||y|| + slack = " + num(ratio_bound));
    const double max_norm = pr.norms.empty() ? 0.0 : *std::max_element(pr.norms.begin(), pr.norms.end());
    art.check("norm bound", max_norm <= 2.0 * ynorm_run + 1e-6,
              "max norm " + num(max_norm) + " <= 2 ||y|| + 1e-6 = " + num(2.0 * ynorm_run + 1e-6));

    CsvTable mass({"t", "mass"});
    const double m0 = integral(pr.u.frames.front());
    double drift_mass = 0.0;
    for (std::size_t k = 0; k < pr.u.size(); ++k) {
        const double m = integral(pr.u.frames[k]);
        mass.add({pr.u.t_grid[k], m});
        drift_mass = std::max(drift_mass, std::abs(m - m0));
    }
    art.csv("mass.csv", mass);
    art.check("mass conserved", drift_mass <= 1e-8, "max |mass(t) - mass(0)| = " + num(drift_mass));

    const auto psi = random_test_functions(c.grid, c.solve.test_functions, r.T_run, derive_seed(c.seed, 13));
    const DriftOperator zero(catalog::zero(c.grid.d), c.grid);
    const auto base = weak_residual(heat_trajectory(r.u0, pr.u.t_grid, r.s), zero, r.s, psi);
    const auto weak = weak_residual(pr.u, *r.drift, r.s, psi);
    CsvTable wt({"test_function", "residual", "baseline"});
    for (std::size_t j = 0; j < psi.size(); ++j) wt.add({static_cast<std::int64_t>(j), weak[j], base[j]});
    art.csv("weak_residuals.csv", wt);
    const double bmax = *std::max_element(base.begin(), base.end());
    const double wmax = *std::max_element(weak.begin(), weak.end());
    art.check("weak residual near baseline", wmax < c.solve.weak_factor * bmax,
              "max " + num(wmax) + " < " + num(c.solve.weak_factor) + " x baseline " + num(bmax));
    log << "[solve] " << pr.residuals.size() << " iterations, weak residual " << num(wmax) << '\n';
}

// ---------------------------------------------------------------- particles

SimConfig sim_config(const RunConfig& c, double T, std::size_t N) {
    SimConfig sc;
    sc.grid = c.grid;
    sc.t_grid = uniform_times(T, c.particles.steps);
    sc.N = N;
    sc.eps_kernel = c.particles.eps_kernel;
    sc.s = StableParams::make(c.alpha, c.grid.d);
    sc.kern = parse_kernel(c.kernel, c.grid.d, c.grid.L);
    sc.u0 = make_initial(c.u0, c.grid);
    return sc;
}

ParticlePicardOptions particle_options(const RunConfig& c, double tol) {
    ParticlePicardOptions o;
    o.p = c.particles.p;
    o.tol = tol;
    o.bandwidth = c.particles.bandwidth;
    return o;
}

void suite_particles(const RunConfig& c, Artifacts& art, std::ostream& log) {
    const auto& pc = c.particles;
    const SimConfig sc = sim_config(c, c.T, pc.N);
    const ParticlePicardResult r = picard_processes(sc, pc.iters, c.seed, particle_options(c, pc.tol));
    art.warn(r.warnings);
    const ParticleEnsemble& last = r.ensembles.back();
    const bool zero = ParticleKernel(sc.kern, c.grid.L, r.eps_kernel).is_zero();

    write_paths(art.path("paths.fdpath"), last);
    CsvTable wt({"particle", "sign", "weight"});
    for (std::size_t i = 0; i < last.N; ++i)
        wt.add({static_cast<std::int64_t>(i), static_cast<std::int64_t>(last.weights[i]),
                last.weights[i] * last.mass / static_cast<double>(last.N)});
    art.csv("weights.csv", wt);

    const std::size_t n_rep = r.reports.size();
    std::vector<std::vector<double>> window;
    for (std::size_t n = 1; n < n_rep; ++n) window.push_back(r.series[n]);
    std::optional<ContractionDiagnostic> diag;
    if (!zero && window.size() >= 3) diag = contraction_diagnostic(window, sc.t_grid, pc.shape_tolerance, 1);

    CsvTable dist({"iter", "t_horizon", "rho", "lp_density", "d_Tp", "C_hat"});
    for (std::size_t n = 0; n < n_rep; ++n) {
        double ch = std::nan("");
        if (diag && n >= 2 && n - 2 < diag->C_hat.size()) ch = diag->C_hat[n - 2];
        const auto& rep = r.reports[n];
        dist.add({static_cast<std::int64_t>(n), rep.T, rep.rho, rep.lp_density, rep.d_Tp, ch});
        log << "[particles] d(Y^" << n << ", Y^" << n + 1 << ") = " << num(rep.d_Tp) << '\n';
    }
    art.csv("distances.csv", dist);
    CsvTable dt({"iter", "t", "d"});
    for (std::size_t n = 0; n < n_rep; ++n)
        for (std::size_t k = 0; k < r.series[n].size(); ++k)
            dt.add({static_cast<std::int64_t>(n), sc.t_grid[k], r.series[n][k]});
    art.csv("distances_time.csv", dt);

    FieldTrajectory dens;
    dens.grid = c.grid;
    dens.t_grid = last.t_grid;
    for (std::size_t k = 0; k < last.frames(); ++k)
        dens.frames.push_back(density_from_ensemble(last, k, r.bandwidth, c.grid));
    write_field_trajectory(art.path("density.fdfield"), dens);

    std::vector<double> d_values;
    for (const auto& rep : r.reports) d_values.push_back(rep.d_Tp);
    json cj;
    cj["window_start"] = 1;
    cj["d"] = number_array(d_values);
    cj["eps_kernel"] = r.eps_kernel;
    cj["bandwidth"] = r.bandwidth;
    cj["p"] = pc.p;
    cj["shape_tolerance"] = pc.shape_tolerance;
    if (diag) {
        cj["C_hat"] = number_array(diag->C_hat);
        cj["fitted_C"] = diag->fitted_C;
        cj["fitted_log_scale"] = diag->fitted_log_scale;
        cj["shape_deviation"] = diag->shape_deviation;
        cj["ratios"] = number_array(diag->ratios);
        cj["decreasing"] = diag->decreasing;
        cj["time_monotone"] = diag->time_monotone;
        cj["factorial_consistent"] = diag->factorial_consistent;
    }
    art.json_file("contraction.json", cj);

    art.diagnostics["eps_kernel"] = r.eps_kernel;
    art.diagnostics["bandwidth"] = r.bandwidth;
    art.diagnostics["mass"] = last.mass;
    art.diagnostics["T_run"] = c.T;
    art.diagnostics["lip1_initial"] = lipschitz_constant(sc.u0) <= 1.0;
    if (diag) {
        art.diagnostics["factorial_consistent"] = diag->factorial_consistent;
        art.diagnostics["shape_deviation"] = diag->shape_deviation;
    }

    const double m0 = r.ensembles.front().signed_mass();
    bool mass_ok = true;
    for (const auto& e : r.ensembles) mass_ok = mass_ok && e.signed_mass() == m0 && e.weights == r.noise.weights;
    art.check("signed mass exact", mass_ok, "signed mass " + num(m0) + " on every iterate");

    if (zero) {
        const bool all_zero = std::all_of(d_values.begin(), d_values.end(), [](double d) { return d == 0.0; });
        art.check("zero drift fixed point", all_zero, "d(Y^n, Y^{n+1}) = 0 for every n");
    } else {
        bool dec = true;
        for (std::size_t n = 2; n < n_rep; ++n) dec = dec && d_values[n] < d_values[n - 1];
        art.check("distances strictly decrease", dec && n_rep >= 2, "d_n for n >= 1 strictly decreasing");
        if (diag) {
            const bool finite =
                std::all_of(diag->C_hat.begin(), diag->C_hat.end(), [](double v) { return std::isfinite(v); });
            art.check("finite contraction constants", finite, "C_hat over the window n >= 1");
            log << "[particles] factorial shape deviation " << num(diag->shape_deviation) << " (verdict "
                << (diag->factorial_consistent ? "consistent" : "inconsistent") << ")\n";
        }
    }
}

// ---------------------------------------------------------------- compare

struct PriorRuns {
    fs::path solve_dir;
    fs::path particles_dir;
    json particles_manifest;
};

json load_manifest(const fs::path& dir) {
    const fs::path m = dir / kManifestName;
    if (!fs::exists(m)) throw ConfigError("'" + dir.string() + "' holds no " + kManifestName);
    try {
        return json::parse(read_text(m));
    } catch (const json::exception& e) {
        throw ConfigError("'" + m.string() + "': " + e.what());
    }
}

void verify_file(const json& manifest, const fs::path& dir, const std::string& name) {
    for (const auto& f : manifest.at("files"))
        if (f.at("name") == name) {
            if (sha256_file(dir / name) != f.at("sha256").get<std::string>())
                throw ConfigError("'" + (dir / name).string() + "' does not match its manifest hash");
            return;
        }
    throw ConfigError("'" + dir.string() + "' manifest does not list " + name);
}

PriorRuns check_prior_runs(const RunConfig& c) {
    PriorRuns p{c.compare.solve_dir, c.compare.particles_dir, {}};
    const json sm = load_manifest(p.solve_dir);
    const json pm = load_manifest(p.particles_dir);
    if (sm.value("experiment", "") != "solve") throw ConfigError("compare.solve_dir is not a solve run");
    if (pm.value("experiment", "") != "particles") throw ConfigError("compare.particles_dir is not a particles run");
    if (sm.value("status", "") != "pass" || pm.value("status", "") != "pass")
        throw ConfigError("compare needs completed runs with status pass");
    const json& sc = sm.at("config");
    const json& pcj = pm.at("config");
    std::vector<std::string> differ;
    for (const char* key : {"alpha", "kernel", "initial", "grid"})
        if (sc.at(key) != pcj.at(key)) differ.push_back(key);
    const double Ts = json_number(sm.at("diagnostics").at("T_run"));
    const double Tp = json_number(pm.at("diagnostics").at("T_run"));
    if (Ts != Tp) differ.push_back("T");
    if (!differ.empty()) {
        std::string msg = "solve and particles runs differ in:";
        for (const auto& k : differ) msg += " " + k;
        throw ConfigError(msg);
    }
    verify_file(sm, p.solve_dir, "solution.fdfield");
    verify_file(pm, p.particles_dir, "paths.fdpath");
    verify_file(pm, p.particles_dir, "weights.csv");
    p.particles_manifest = pm;
    return p;
}

std::vector<double> read_signs(const fs::path& path, std::size_t N) {
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);
    std::vector<double> w;
    while (std::getline(in, line)) {
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos) throw ConfigError("'" + path.string() + "': bad row");
        w.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    }
    if (w.size() != N) throw ConfigError("'" + path.string() + "': particle count does not match the paths");
    return w;
}

struct RouteDistance {
    std::vector<double> l1, l2;
};

RouteDistance route_distance(const FieldTrajectory& pde, const ParticleEnsemble& ens, const GridSpec& g,
                             double bandwidth) {
    RouteDistance d;
    for (std::size_t k = 0; k < ens.frames(); ++k) {
        const double h = bandwidth > 0.0 ? bandwidth : default_bandwidth(ens, k, g);
        const Field diff = density_from_ensemble(ens, k, h, g) - frame_at(pde, ens.t_grid[k]);
        d.l1.push_back(lp_norm(diff, 1.0));
        d.l2.push_back(lp_norm(diff, 2.0));
    }
    return d;
}

void suite_compare(const RunConfig& c, Artifacts& art, std::ostream& log, const std::optional<PriorRuns>& prior) {
    CsvTable cmp({"N", "t", "l1", "l2"});
    CsvTable sweep({"N", "l1_final", "l2_final"});
    auto record = [&](std::size_t N, const ParticleEnsemble& ens, const RouteDistance& d) {
        for (std::size_t k = 0; k < ens.frames(); ++k)
            cmp.add({static_cast<std::int64_t>(N), ens.t_grid[k], d.l1[k], d.l2[k]});
        sweep.add({static_cast<std::int64_t>(N), d.l1.back(), d.l2.back()});
        log << "[compare] N=" << N << " final L1 " << num(d.l1.back()) << '\n';
    };

    if (prior) {
        const FieldTrajectory pde = read_field_trajectory(prior->solve_dir / "solution.fdfield");
        ParticleEnsemble ens = read_paths(prior->particles_dir / "paths.fdpath");
        ens.weights = read_signs(prior->particles_dir / "weights.csv", ens.N);
        ens.mass = json_number(prior->particles_manifest.at("diagnostics").at("mass"));
        if (!(ens.L == pde.grid.L && ens.d == pde.grid.d)) throw ConfigError("prior runs use different tori");
        record(ens.N, ens, route_distance(pde, ens, pde.grid, c.particles.bandwidth));
        art.csv("comparison.csv", cmp);
        art.csv("n_sweep.csv", sweep);
        art.check("prior runs consistent", true, "alpha, kernel, initial, grid and T agree");
        return;
    }

    const SolveRoute r = solve_route(c, log, false);
    if (!r.result) {
        art.check("pde route completed", false, r.failure);
        return;
    }
    art.warn(r.result->warnings);
    art.check("pde route converged", r.result->converged,
              std::to_string(r.result->residuals.size()) + " Picard iterations");
    art.diagnostics["T_run"] = r.T_run;
    art.diagnostics["T_star"] = r.cert.T_star;
    art.diagnostics["certified"] = r.cert.certified && r.T_run <= r.cert.T_star;
    art.diagnostics["lip1_initial"] = lipschitz_constant(r.u0) <= 1.0;
    write_field_trajectory(art.path("solution.fdfield"), r.result->u);
    std::vector<double> finals;
    for (std::size_t N : c.compare.N_list) {
        const SimConfig sc = sim_config(c, r.T_run, N);
        const ParticlePicardResult pr = picard_processes(sc, c.compare.iters, c.seed, particle_options(c, 0.0));
        art.warn(pr.warnings);
        const RouteDistance d = route_distance(r.result->u, pr.ensembles.back(), c.grid, c.particles.bandwidth);
        record(N, pr.ensembles.back(), d);
        finals.push_back(d.l1.back());
    }
    art.csv("comparison.csv", cmp);
    art.csv("n_sweep.csv", sweep);
    bool dec = true;
    std::string detail = "final L1:";
    for (std::size_t j = 0; j < finals.size(); ++j) {
        if (j) dec = dec && finals[j] < finals[j - 1];
        detail += " " + num(finals[j]);
    }
    art.check("final L1 strictly decreasing in N", dec, detail);
}

// ---------------------------------------------------------------- output directory

std::vector<std::string> prior_files(const fs::path& dir) {
    std::vector<std::string> names;
    if (!fs::exists(dir)) return names;
    if (!fs::is_directory(dir)) throw ConfigError("output path '" + dir.string() + "' is not a directory");
    std::set<std::string> listed;
    const fs::path m = dir / kManifestName;
    if (fs::exists(m)) {
        const json j = load_manifest(dir);
        for (const auto& f : j.at("files")) listed.insert(f.at("name").get<std::string>());
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name == kManifestName) continue;
        if (!listed.count(name))
            throw ConfigError("output directory '" + dir.string() + "' holds '" + name +
                              "', which no manifest there lists; refusing to mix runs");
        names.push_back(name);
    }
    if (fs::exists(m)) names.push_back(kManifestName);
    return names;
}

}  // namespace

RunReport run_experiment(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    std::optional<PriorRuns> prior;
    if (cfg.experiment == Experiment::compare && !cfg.compare.solve_dir.empty()) prior = check_prior_runs(cfg);
    for (const auto& name : prior_files(out_dir)) fs::remove(out_dir / name);
    fs::create_directories(out_dir);

    Artifacts art(out_dir);
    try {
        switch (cfg.experiment) {
            case Experiment::decay: suite_decay(cfg, art, log); break;
            case Experiment::eta: suite_eta(cfg, art, log); break;
            case Experiment::solve: suite_solve(cfg, art, log); break;
            case Experiment::particles: suite_particles(cfg, art, log); break;
            case Experiment::compare: suite_compare(cfg, art, log, prior); break;
        }
    } catch (const std::exception& e) {
        art.check("suite completed", false, e.what());
    }

    RunReport rep;
    rep.checks = art.checks;
    rep.status = std::all_of(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.passed; }) ? 0 : 1;
    json m;
    m["schema_version"] = kManifestSchema;
    m["tool"] = "fracdrift";
    m["experiment"] = experiment_name(cfg.experiment);
    m["seed"] = cfg.seed;
    m["config"] = cfg.to_json();
    m["files"] = art.file_list();
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    m["checks"] = checks;
    m["diagnostics"] = art.diagnostics;
    m["warnings"] = art.warnings;
    m["status"] = rep.status == 0 ? "pass" : "fail";
    write_text(out_dir / kManifestName, m.dump(2) + "\n");
    rep.manifest = std::move(m);
    return rep;
}

int run_cli(Experiment experiment, const fs::path& config, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& log, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = config.empty() ? resolve_config(ConfigDoc::parse("", "defaults"), experiment, seed)
                             : load_run_config(config, experiment, seed);
    } catch (const ConfigError& e) {
        err << "fracdrift: " << e.what() << '\n';
        return 2;
    }
    RunReport rep;
    try {
        rep = run_experiment(cfg, out_dir, log);
    } catch (const ConfigError& e) {
        err << "fracdrift: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "fracdrift: " << e.what() << '\n';
        return 1;
    }
    for (const auto& c : rep.checks) {
        log << (c.passed ? "ok     " : "FAILED ") << c.name << ": " << c.detail << '\n';
        if (!c.passed) err << "fracdrift: assertion failed: " << c.name << ": " << c.detail << '\n';
    }
    return rep.status;
}

}  // namespace fracdrift
