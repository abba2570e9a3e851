// Acceptance criteria: one PASS/FAIL line each. Exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fracdrift/config.hpp"
#include "fracdrift/io.hpp"
#include "fracdrift/kernels.hpp"
#include "fracdrift/particles.hpp"
#include "fracdrift/random.hpp"
#include "fracdrift/runner.hpp"
#include "fracdrift/spectral.hpp"

using namespace fracdrift;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

fs::path g_root;
std::ostringstream g_log;

RunReport run_suite(Experiment e, const std::string& config_text, const std::string& dir) {
    const RunConfig cfg = resolve_config(ConfigDoc::parse(config_text, dir + ".toml"), e);
    const fs::path out = g_root / dir;
    fs::remove_all(out);
    return run_experiment(cfg, out, g_log);
}

std::map<std::string, std::string> hashes(const RunReport& r) {
    std::map<std::string, std::string> h;
    for (const auto& f : r.manifest.at("files")) h[f.at("name").get<std::string>()] = f.at("sha256").get<std::string>();
    return h;
}

const Check* find_check(const RunReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string failed_checks(const RunReport& r) {
    std::string s;
    for (const auto& c : r.checks)
        if (!c.passed) s += " [" + c.name + ": " + c.detail + "]";
    return s;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::istringstream in(read_text(p));
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

double rel_l2(const Field& a, const Field& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------

Verdict definition_equivalence() {
    const GridSpec g{1, 256, 2.0 * kPi};
    const double eps = 2.0 * g.spacing();
    double worst = 0.0;
    for (double alpha : {1.2, 1.5, 1.8}) {
        const auto s = StableParams::make(alpha, 1);
        for (std::uint64_t seed : {1, 2, 3}) {
            Rng rng(seed);
            const Field f = random_bandlimited(g, 8, rng);
            worst = std::max(worst, rel_l2(frac_laplacian(f, s, LaplacianForm::quadrature, eps),
                                           frac_laplacian(f, s, LaplacianForm::spectral)));
        }
    }
    return {worst < 1e-4, "max relative L2 " + fmt(worst) + " < 1e-4 over alpha {1.2,1.5,1.8}, 3 fields, n=256"};
}

Verdict semigroup_decay() {
    const RunReport r = run_suite(Experiment::decay, "", "decay");
    const auto rows = read_csv(g_root / "decay" / "decay_slopes.csv");
    double worst = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        // Independent oracle: -(d/alpha)(1/q - 1/m), minus 1/alpha for the gradient.
        const double alpha = std::stod(rows[i][0]), q = std::stod(rows[i][1]), m = std::stod(rows[i][2]);
        const bool grad = rows[i][3] == "1";
        const double theo = -(1.0 / alpha) * (1.0 / q - (std::isinf(m) ? 0.0 : 1.0 / m)) - (grad ? 1.0 / alpha : 0.0);
        worst = std::max(worst, std::abs(std::stod(rows[i][5]) - theo) / std::abs(theo));
    }
    const bool ok = r.status == 0 && rows.size() == 1 + 3 * 3 * 2 && worst <= 0.1;
    return {ok, std::to_string(rows.size() - 1) + " slopes, worst relative error " + fmt(worst) + " <= 0.1" +
                    failed_checks(r)};
}

Verdict bilinear_scaling() {
    const RunReport r = run_suite(Experiment::eta, "", "eta");
    const json fit = json::parse(read_text(g_root / "eta" / "eta_fit.json"));
    const double res = fit.at("fit_residual").get<double>();
    const std::string match = fit.at("matches").get<std::string>();
    const double e = fit.at("fitted_exponent").get<double>();
    // Both exponent readings are accepted outcomes; the flag itself must be one of them.
    const bool flagged = match == "claimed" || match == "integrated" || match == "both";
    return {r.status == 0 && res < 0.05 && flagged,
            "fit residual " + fmt(res) + " < 0.05, exponent " + fmt(e) + " matches '" + match + "' (claimed " +
                fmt(fit.at("exponent_claimed").get<double>()) + ", integrated " +
                fmt(fit.at("exponent_integrated").get<double>()) + ")"};
}

RunReport g_solve;

Verdict local_fixed_point() {
    g_solve = run_suite(Experiment::solve, "", "solve");
    const json cert = json::parse(read_text(g_root / "solve" / "certificate.json"));
    std::string detail = "T* " + fmt(cert.at("T_star").get<double>()) + ", iterations " +
                         std::to_string(cert.at("iterations").get<int>());
    for (const char* name : {"contraction ratio bound", "norm bound", "weak residual near baseline"})
        if (const Check* c = find_check(g_solve, name)) detail += "; " + c->detail;
    return {g_solve.status == 0, detail + failed_checks(g_solve)};
}

std::string particle_text(double amplitude) {
    std::ostringstream s;
    s << "[stable]\nalpha = 1.5\n[kernel]\nname = \"hilbert\"\n[solve]\nT = 0.5\n"
      << "[initial]\namplitude = " << amplitude << "\n[particles]\nN = 5000\niters = 6\n";
    return s.str();
}

Verdict mass_conservation() {
    const RunReport part = run_suite(Experiment::particles, particle_text(0.5), "particles_half");
    const Check* pde = find_check(g_solve, "mass conserved");
    const Check* pm = find_check(part, "signed mass exact");
    const bool ok = pde && pm && pde->passed && pm->passed;
    return {ok, std::string("PDE ") + (pde ? pde->detail : "missing") + " (<= 1e-8); particles " +
                    (pm ? pm->detail : "missing")};
}

// Empirical characteristic function within 3 standard errors; KS at 1% for alpha = 2.
Verdict stable_sampler() {
    const std::size_t n = 100000;
    double worst = 0.0;
    for (double alpha : {1.2, 1.5, 1.8}) {
        const auto S = sample_stable(StableParams::make(alpha, 1), n, 2024);
        for (double xi : {0.5, 1.0, 2.0}) {
            double m = 0.0, m2 = 0.0;
            for (double x : S) {
                const double c = std::cos(xi * x);
                m += c;
                m2 += c * c;
            }
            m /= static_cast<double>(n);
            const double se = std::sqrt((m2 / static_cast<double>(n) - m * m) / static_cast<double>(n));
            worst = std::max(worst, std::abs(m - std::exp(-std::pow(xi, alpha))) / se);
        }
    }
    auto S = sample_stable(StableParams::make(2.0, 1), n, 2025);
    std::sort(S.begin(), S.end());
    double D = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = 0.5 * std::erfc(-S[i] / 2.0);  // Normal(0, 2)
        D = std::max({D, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
    }
    const double crit = 1.628 / std::sqrt(static_cast<double>(n));
    return {worst < 3.0 && D < crit, "max |ECF error| " + fmt(worst) + " SE < 3; KS D " + fmt(D) + " < " + fmt(crit)};
}

Verdict contraction() {
    const RunReport r = run_suite(Experiment::particles, particle_text(1.0), "particles");
    const json c = json::parse(read_text(g_root / "particles" / "contraction.json"));
    std::vector<double> d;
    for (const auto& v : c.at("d")) d.push_back(v.get<double>());
    bool dec = d.size() == 6;
    for (std::size_t n = 2; n < d.size(); ++n) dec = dec && d[n] < d[n - 1];
    bool finite = c.contains("C_hat");
    if (finite)
        for (const auto& v : c.at("C_hat")) finite = finite && v.is_number() && std::isfinite(v.get<double>());
    const double dev = c.at("shape_deviation").get<double>();
    std::string ds;
    for (double v : d) ds += " " + fmt(v);
    return {dec && finite && dev < 0.2 && r.status == 0,
            "d_n:" + ds + "; strictly decreasing n=1..5 " + (dec ? "yes" : "no") + ", finite C_hat " +
                (finite ? "yes" : "no") + ", factorial shape residual " + fmt(dev) + " < 0.2 (fitted C " +
                fmt(c.at("fitted_C").get<double>()) + ")"};
}

Verdict cross_route() {
    const RunReport r = run_suite(Experiment::compare, "", "compare");
    const auto rows = read_csv(g_root / "compare" / "n_sweep.csv");
    std::vector<double> l1;
    std::string detail = "final L1 by N:";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        l1.push_back(std::stod(rows[i][1]));
        detail += " " + rows[i][0] + ":" + fmt(l1.back());
    }
    bool dec = l1.size() == 3;
    for (std::size_t i = 1; i < l1.size(); ++i) dec = dec && l1[i] < l1[i - 1];
    const bool lip = r.manifest.at("diagnostics").value("lip1_initial", false);
    return {dec && lip && r.status == 0, detail + (lip ? "; positive Lip(1) initial data" : "; initial data not Lip(1)") +
                                             failed_checks(r)};
}

Verdict reproducibility() {
    const std::vector<std::pair<Experiment, std::string>> runs = {
        {Experiment::decay, "[decay]\nalphas = [1.5]\n"},
        {Experiment::eta, ""},
        {Experiment::solve, ""},
        {Experiment::particles, "[particles]\nN = 1000\n"},
        {Experiment::compare, "[compare]\nN = [300, 600]\niters = 2\n"},
    };
    std::string detail;
    bool ok = true;
    for (const auto& [e, text] : runs) {
        const auto a = hashes(run_suite(e, text, "repro_a_" + experiment_name(e)));
        const auto b = hashes(run_suite(e, text, "repro_b_" + experiment_name(e)));
        const bool same = a == b && !a.empty();
        ok = ok && same;
        detail += experiment_name(e) + (same ? " identical (" + std::to_string(a.size()) + " files) " : " DIFFER ");
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    g_root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fracdrift_acceptance";
    fs::create_directories(g_root);

    int failures = 0;
    auto report = [&](int id, const std::string& name, double budget_s, const std::function<Verdict()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool timely = budget_s <= 0.0 || secs < budget_s;
        const bool pass = v.pass && timely;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << v.detail;
        if (budget_s > 0.0) std::cout << " (runtime " << fmt(secs) << " s < " << budget_s << " s)";
        std::cout << std::endl;
    };

    report(1, "definition equivalence", 10, definition_equivalence);
    report(2, "semigroup decay", 60, semigroup_decay);
    report(3, "bilinear scaling", 300, bilinear_scaling);
    report(4, "local fixed point", 300, local_fixed_point);
    report(5, "mass conservation", 0, mass_conservation);
    report(6, "stable sampler", 0, stable_sampler);
    report(7, "global Picard contraction", 600, contraction);
    if (fs::exists(g_root / "particles_half" / "contraction.json")) {
        const json half = json::parse(read_text(g_root / "particles_half" / "contraction.json"));
        std::cout << "     [7] note: peak 0.5 initial data gives factorial shape residual "
                  << fmt(half.at("shape_deviation").get<double>()) << std::endl;
    }
    report(8, "cross-route agreement", 900, cross_route);
    report(9, "reproducibility", 0, reproducibility);
    std::cout << (failures == 0 ? "all acceptance criteria pass" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
