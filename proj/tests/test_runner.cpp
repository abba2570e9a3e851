#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fracdrift/io.hpp"
#include "fracdrift/runner.hpp"

using namespace fracdrift;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "fracdrift_test_runner" / name;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fresh_dir(name + "_cfg").replace_extension(".toml");
    write_text(p, text);
    return p;
}

struct CliResult {
    int status = 0;
    std::string log, err;
};

CliResult run(Experiment e, const std::string& config_text, const fs::path& out, const std::string& tag) {
    std::ostringstream log, err;
    CliResult r;
    r.status = run_cli(e, write_config(tag, config_text), out, std::nullopt, log, err);
    r.log = log.str();
    r.err = err.str();
    return r;
}

json manifest(const fs::path& dir) { return json::parse(read_text(dir / "manifest.json")); }

std::map<std::string, std::string> hashes(const fs::path& dir) {
    std::map<std::string, std::string> h;
    const json m = manifest(dir);
    for (const auto& f : m.at("files")) h[f.at("name").get<std::string>()] = f.at("sha256").get<std::string>();
    return h;
}

std::vector<std::string> lines(const fs::path& p) {
    std::istringstream in(read_text(p));
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const std::string kZeroSolve =
    "[grid]\nn = 64\n[kernel]\nname = \"zero\"\n[solve]\nT = 0.2\nsteps = 16\n";
const std::string kSmallParticles =
    "[grid]\nn = 64\n[solve]\nT = 0.2\n[particles]\nN = 200\nsteps = 8\niters = 4\n";

}  // namespace

TEST_CASE("zero-kernel solve succeeds with a vanishing residual") {
    const fs::path out = fresh_dir("zero_solve");
    const auto r = run(Experiment::solve, kZeroSolve, out, "zero_solve");
    CHECK_MESSAGE(r.status == 0, r.err);
    const auto rows = lines(out / "residuals.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(rows.front() == "iter,residual,norm");
    const std::string last = rows.back();
    const double residual = std::stod(last.substr(last.find(',') + 1));
    CHECK(residual < 1e-6);

    const json m = manifest(out);
    CHECK(m.at("schema_version") == kManifestSchema);
    CHECK(m.at("status") == "pass");
    CHECK(m.at("config").at("kernel") == "zero");
    // Every file in the directory except the manifest itself is listed with its hash.
    std::size_t on_disk = 0;
    const auto listed = hashes(out);
    for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        ++on_disk;
        REQUIRE(listed.count(name) == 1);
        CHECK(listed.at(name) == sha256_file(entry.path()));
    }
    CHECK(on_disk == listed.size());
    const auto traj = read_field_trajectory(out / "solution.fdfield");
    CHECK(traj.frames.size() == 17);
}

TEST_CASE("invalid configuration exits 2 and writes nothing") {
    const fs::path out = fresh_dir("bad_kernel");
    const auto r = run(Experiment::solve, "[kernel]\nname = \"no_such_kernel\"\n", out, "bad_kernel");
    CHECK(r.status == 2);
    CHECK(r.err.find(":2:") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    const auto missing = run_cli(Experiment::solve, fresh_dir("missing") / "none.toml", out, std::nullopt,
                                 std::cout, std::cerr);
    CHECK(missing == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("identical config and seed give identical artifact hashes") {
    const fs::path a = fresh_dir("repro_a"), b = fresh_dir("repro_b"), c = fresh_dir("repro_c");
    REQUIRE(run(Experiment::particles, kSmallParticles, a, "repro_a").status == 0);
    REQUIRE(run(Experiment::particles, kSmallParticles, b, "repro_b").status == 0);
    CHECK(hashes(a) == hashes(b));
    CHECK(hashes(a).size() == 6);
    REQUIRE(run(Experiment::particles, kSmallParticles + "\n", c, "repro_c").status == 0);
    std::ostringstream log, err;
    CHECK(run_cli(Experiment::particles, write_config("repro_d", kSmallParticles), c, 5, log, err) == 0);
    CHECK(hashes(c).at("paths.fdpath") != hashes(a).at("paths.fdpath"));
}

TEST_CASE("particles artifacts follow the documented schemas") {
    const fs::path out = fresh_dir("schema");
    REQUIRE(run(Experiment::particles, kSmallParticles, out, "schema").status == 0);
    const auto dist = lines(out / "distances.csv");
    CHECK(dist.front() == "iter,t_horizon,rho,lp_density,d_Tp,C_hat");
    CHECK(dist.size() == 5);
    CHECK(lines(out / "distances_time.csv").front() == "iter,t,d");
    const auto w = lines(out / "weights.csv");
    CHECK(w.front() == "particle,sign,weight");
    CHECK(w.size() == 201);
    const ParticleEnsemble e = read_paths(out / "paths.fdpath");
    CHECK(e.N == 200);
    CHECK(e.t_grid.size() == 9);
    const json c = json::parse(read_text(out / "contraction.json"));
    CHECK(c.at("window_start") == 1);
    CHECK(c.at("d").size() == 4);
    CHECK(c.contains("C_hat"));
    const json m = manifest(out);
    CHECK(m.at("diagnostics").at("eps_kernel").get<double>() > 0.0);
    CHECK(m.at("config").at("particles").at("N") == 200);
}

TEST_CASE("decay suite emits slopes against the closed-form exponent") {
    const fs::path out = fresh_dir("decay");
    const auto r = run(Experiment::decay, "[decay]\nalphas = [1.5]\nq = [1]\nm = [2]\n", out, "decay");
    CHECK_MESSAGE(r.status == 0, r.err);
    const auto rows = lines(out / "decay_slopes.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "alpha,q,m,gradient,theoretical_slope,fitted_slope,rel_err");
    // -(d/alpha)(1/q - 1/m), then minus 1/alpha for the gradient.
    auto theo = [](const std::string& row) {
        std::vector<std::string> cells;
        std::istringstream in(row);
        for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
        return std::stod(cells[4]);
    };
    CHECK(theo(rows[1]) == doctest::Approx(-1.0 / 3.0));
    CHECK(theo(rows[2]) == doctest::Approx(-1.0));
}

TEST_CASE("output directory is cleaned from its manifest, foreign files refuse") {
    const fs::path out = fresh_dir("reuse");
    REQUIRE(run(Experiment::solve, kZeroSolve, out, "reuse").status == 0);
    write_text(out / "residuals.csv", "stale");
    REQUIRE(run(Experiment::solve, kZeroSolve, out, "reuse").status == 0);
    CHECK(lines(out / "residuals.csv").front() == "iter,residual,norm");

    write_text(out / "notes.txt", "mine");
    CHECK(run(Experiment::solve, kZeroSolve, out, "reuse").status == 2);
    CHECK(fs::exists(out / "notes.txt"));
    CHECK(fs::exists(out / "residuals.csv"));
}

TEST_CASE("compare refuses prior runs with different physics and accepts matching ones") {
    const fs::path solve = fresh_dir("cmp_solve"), parts = fresh_dir("cmp_parts"), parts18 = fresh_dir("cmp_parts18");
    const std::string common = "[grid]\nn = 64\n[kernel]\nname = \"zero\"\n";
    REQUIRE(run(Experiment::solve, common + "[solve]\nT = 0.2\nsteps = 16\n", solve, "cmp_solve").status == 0);
    REQUIRE(run(Experiment::particles, common + "[solve]\nT = 0.2\n[particles]\nN = 300\nsteps = 8\niters = 2\n",
                parts, "cmp_parts")
                .status == 0);
    REQUIRE(run(Experiment::particles,
                common + "[stable]\nalpha = 1.8\n[solve]\nT = 0.2\n[particles]\nN = 300\nsteps = 8\niters = 2\n",
                parts18, "cmp_parts18")
                .status == 0);

    const fs::path out = fresh_dir("cmp_out");
    auto cfg = [&](const fs::path& p) {
        return common + "[compare]\nsolve_dir = \"" + solve.string() + "\"\nparticles_dir = \"" + p.string() + "\"\n";
    };
    const auto refused = run(Experiment::compare, cfg(parts18), out, "cmp_refuse");
    CHECK(refused.status == 2);
    CHECK(refused.err.find("alpha") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    const auto ok = run(Experiment::compare, cfg(parts), out, "cmp_ok");
    CHECK_MESSAGE(ok.status == 0, ok.err);
    const auto rows = lines(out / "comparison.csv");
    CHECK(rows.front() == "N,t,l1,l2");
    CHECK(rows.size() == 10);
    CHECK(lines(out / "n_sweep.csv").size() == 2);
}

TEST_CASE("zero-kernel compare sweep: KDE error shrinks with N") {
    const fs::path out = fresh_dir("cmp_sweep");
    const auto r = run(Experiment::compare,
                       "[grid]\nn = 128\n[kernel]\nname = \"zero\"\n[solve]\nT = 0.2\nsteps = 8\n"
                       "[particles]\nsteps = 8\n[compare]\nN = [200, 2000, 20000]\niters = 2\n",
                       out, "cmp_sweep");
    CHECK_MESSAGE(r.status == 0, r.err);
    CHECK(lines(out / "n_sweep.csv").size() == 4);
}
