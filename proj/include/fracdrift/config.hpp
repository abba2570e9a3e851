#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fracdrift/grid.hpp"
#include "json.hpp"

namespace fracdrift {

/// Key-value configuration in a TOML subset: [section] headers, key = value,
/// values are numbers (or real expressions such as 2*pi), "strings", true/false,
/// and single-line arrays of numbers or strings. '#' starts a comment.
/// Keys are addressed as "section.key"; keys before any header have no prefix.
class ConfigDoc {
public:
    using Value = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;
    struct Entry {
        Value value;
        int line = 0;
    };

    // Throws ConfigError("<source>:<line>: ...").
    static ConfigDoc parse(std::string_view text, const std::string& source = "config");
    static ConfigDoc load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    int line_of(const std::string& key) const;

    double number(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

    // Throws ConfigError naming the first key never read.
    void reject_unused() const;
    // ConfigError prefixed with the key's location.
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const Entry* find(const std::string& key) const;
    std::string source_;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
};

enum class Experiment { decay, eta, solve, particles, compare };

std::string experiment_name(Experiment e);
// Throws ConfigError for unknown names.
Experiment parse_experiment(const std::string& name);

/// Named initial data. lip_bump is A (1 + cos(2 pi (x - L/2) / L)) / 2 per axis
/// (Lipschitz constant A pi / L); gaussian and signed_double_bump use `width` and
/// the nearest periodic image;
/// bandlimited draws modes up to kmax and scales the sup norm to A.
struct InitialSpec {
    std::string preset = "lip_bump";
    double amplitude = 0.5;
    double width = 0.5;
    std::size_t kmax = 4;
    std::uint64_t seed = 1;
};

Field make_initial(const InitialSpec& spec, const GridSpec& g);
// Largest forward-difference slope on the grid.
double lipschitz_constant(const Field& f);

struct RunConfig {
    Experiment experiment = Experiment::solve;
    std::uint64_t seed = 1;
    GridSpec grid{1, 256, 2.0 * std::numbers::pi};
    double alpha = 1.5;
    std::string kernel = "hilbert";
    InitialSpec u0;
    double p = 3.0;
    double T = 0.5;

    struct Decay {
        std::vector<double> alphas{1.2, 1.5, 1.8};
        std::vector<std::array<double, 2>> pairs{{1.0, 2.0}, {1.0, kInf}, {2.0, 4.0}};
        GridSpec grid{1, 65536, 200.0};
        double t_min = 0.015;
        double t_max = 2.8;
        std::size_t times = 8;
        double tolerance = 0.1;
    } decay;

    struct Eta {
        std::vector<double> T_list{};  // empty selects logspace(0.05, 0.8, 6)
        int trials = 16;
        GridSpec grid{1, 4096, 32.0};
        int intermediate = 24;
        double match_tolerance = 0.1;
        double residual_tolerance = 0.05;
    } eta;

    struct Solve {
        std::size_t steps = 64;
        std::size_t n_max = 50;
        double tol = 1e-10;
        bool relax = false;
        int nodes = 32;
        std::size_t test_functions = 5;
        int eta_trials = 16;
        std::size_t horizon_points = 6;
        double ratio_slack = 0.1;
        double weak_factor = 10.0;
    } solve;

    struct Particles {
        std::size_t N = 5000;
        std::size_t steps = 32;
        std::size_t iters = 6;
        double eps_kernel = 0.0;
        double p = 2.0;
        double bandwidth = 0.0;
        double tol = 0.0;
        double shape_tolerance = 0.2;
    } particles;

    struct Compare {
        std::vector<std::size_t> N_list{1000, 10000, 30000};
        std::size_t iters = 4;
        std::string solve_dir;
        std::string particles_dir;
    } compare;

    // Fully resolved configuration, defaults included.
    nlohmann::ordered_json to_json() const;
};

/// Resolves defaults and validates every field; unknown keys and bad values
/// raise ConfigError with the line number. `experiment` in the file, if
/// present, must agree with the requested one.
RunConfig resolve_config(const ConfigDoc& doc, Experiment experiment, std::optional<std::uint64_t> seed = {});
RunConfig load_run_config(const std::filesystem::path& path, Experiment experiment,
                          std::optional<std::uint64_t> seed = {});

}  // namespace fracdrift
