#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "fracdrift/errors.hpp"
#include "fracdrift/io.hpp"

using namespace fracdrift;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "fracdrift_test_io";
    fs::create_directories(dir);
    return dir / name;
}

FieldTrajectory ramp_trajectory(const GridSpec& g, std::size_t frames) {
    FieldTrajectory u;
    u.grid = g;
    u.t_grid = uniform_times(0.5, frames - 1);
    for (std::size_t k = 0; k < frames; ++k)
        u.frames.push_back(sample(g, [&](auto x) { return std::sin(x[0] + 0.1 * k) + 1e-300 * x[1]; }));
    return u;
}

}  // namespace

TEST_CASE("field trajectory container round-trips bitwise") {
    for (int d : {1, 2}) {
        const GridSpec g{d, 16, 2.0 * kPi};
        const FieldTrajectory u = ramp_trajectory(g, 5);
        const fs::path p = scratch("traj" + std::to_string(d) + ".fdfield");
        write_field_trajectory(p, u);
        CHECK(fs::file_size(p) == 8 + 4 + 4 + 8 + 8 + 8 + 5 * 8 + 5 * g.size() * 8);
        const FieldTrajectory v = read_field_trajectory(p);
        CHECK(v.grid == g);
        CHECK(v.t_grid == u.t_grid);
        REQUIRE(v.frames.size() == u.frames.size());
        for (std::size_t k = 0; k < u.frames.size(); ++k) CHECK(v.frames[k].values == u.frames[k].values);
    }
}

TEST_CASE("field container rejects foreign and truncated files") {
    const fs::path bad = scratch("bad.fdfield");
    write_text(bad, "NOTAFILE and some more bytes");
    CHECK_THROWS_AS(read_field_trajectory(bad), ConfigError);

    const fs::path p = scratch("trunc.fdfield");
    write_field_trajectory(p, ramp_trajectory(GridSpec{1, 16, 1.0}, 3));
    fs::resize_file(p, fs::file_size(p) - 8);
    CHECK_THROWS_AS(read_field_trajectory(p), ConfigError);
    CHECK_THROWS_AS(read_paths(p), ConfigError);
}

TEST_CASE("path container round-trips and stores particle-major trajectories") {
    ParticleEnsemble e;
    e.L = 3.0;
    e.d = 2;
    e.N = 3;
    e.t_grid = {0.0, 0.5};
    e.paths.resize(2 * 2 * 3);
    for (std::size_t k = 0; k < 2; ++k)
        for (int c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < 3; ++i) e.component(k, c)[i] = 100.0 * i + 10.0 * k + c;
    e.weights = {1.0, -1.0, 1.0};
    e.mass = 2.0;
    const fs::path p = scratch("paths.fdpath");
    write_paths(p, e);

    // Header {magic, N, steps, d, dtype, L, t}, then particle 0: (k0 c0, k0 c1, k1 c0, k1 c1).
    std::ifstream in(p, std::ios::binary);
    in.seekg(8 + 8 + 8 + 4 + 4 + 8 + 2 * 8);
    double first[4];
    in.read(reinterpret_cast<char*>(first), sizeof(first));
    CHECK(first[0] == 0.0);
    CHECK(first[1] == 1.0);
    CHECK(first[2] == 10.0);
    CHECK(first[3] == 11.0);

    const ParticleEnsemble r = read_paths(p);
    CHECK(r.N == 3);
    CHECK(r.d == 2);
    CHECK(r.L == 3.0);
    CHECK(r.t_grid == e.t_grid);
    CHECK(r.paths == e.paths);
    CHECK(r.weights == std::vector<double>(3, 1.0));
}

TEST_CASE("csv table formats cells reproducibly") {
    CsvTable t({"a", "b", "c"});
    t.add({0.1, std::int64_t{-3}, std::string("x")});
    t.add({1e-300, std::int64_t{0}, std::string("")});
    t.add({std::numeric_limits<double>::infinity(), std::int64_t{7}, std::string("y")});
    t.add({std::nan(""), std::int64_t{1}, std::string("z")});
    CHECK(t.rows() == 4);
    CHECK(t.str() == "a,b,c\n0.1,-3,x\n1e-300,0,\ninf,7,y\nnan,1,z\n");
    CHECK_THROWS_AS(t.add({1.0}), ParameterError);
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(format_double(std::exp(1.0))) == std::exp(1.0));
}

TEST_CASE("sha256 matches published digests") {
    CHECK(sha256_bytes("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_bytes("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const fs::path p = scratch("abc.txt");
    write_text(p, "abc");
    CHECK(sha256_file(p) == sha256_bytes("abc"));
    CHECK(read_text(p) == "abc");
    CHECK_THROWS_AS(read_text(scratch("missing.txt")), ConfigError);
}
