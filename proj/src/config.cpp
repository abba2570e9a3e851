#include "fracdrift/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracdrift/errors.hpp"
#include "fracdrift/expr.hpp"
#include "fracdrift/kernels.hpp"
#include "fracdrift/particles.hpp"
#include "fracdrift/random.hpp"
#include "fracdrift/spectral.hpp"

namespace fracdrift {

namespace {

constexpr double kPi = std::numbers::pi;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class LineParser {
public:
    LineParser(std::string_view text, std::string where) : s_(text), where_(std::move(where)) {}

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string string_literal() {
        expect('"');
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) fail("unterminated string");
                const char e = s_[pos_++];
                c = e == 'n' ? '\n' : e == 't' ? '\t' : e;
            }
            out += c;
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    // Bare token up to ',', ']', '#' or end of line.
    std::string bare() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#') ++pos_;
        return std::string(trim(s_.substr(start, pos_ - start)));
    }

    double number(const std::string& tok) const {
        if (tok.empty()) fail("missing value");
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec == std::errc() && res.ptr == tok.data() + tok.size()) return v;
        if (tok == "inf") return kInf;
        try {
            const auto z = Expression::parse(tok).eval(0.0, 0.0);
            if (z.imag() != 0.0 || !std::isfinite(z.real())) fail("'" + tok + "' is not a real number");
            return z.real();
        } catch (const ConfigError& e) {
            fail("cannot read '" + tok + "' as a number (" + e.what() + ")");
        }
    }

    ConfigDoc::Value value() {
        const char c = peek();
        if (c == '"') return string_literal();
        if (c == '[') {
            ++pos_;
            std::vector<double> nums;
            std::vector<std::string> strs;
            while (peek() != ']') {
                if (pos_ >= s_.size()) fail("unterminated array");
                if (peek() == '"') {
                    strs.push_back(string_literal());
                } else {
                    nums.push_back(number(bare()));
                }
                if (peek() == ',') ++pos_;
                else if (peek() != ']') fail("expected ',' or ']' in array");
            }
            ++pos_;
            if (!nums.empty() && !strs.empty()) fail("arrays must not mix numbers and strings");
            if (!strs.empty()) return strs;
            return nums;
        }
        const std::string tok = bare();
        if (tok == "true") return true;
        if (tok == "false") return false;
        return number(tok);
    }

    std::string key() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (is_key_char(s_[pos_]) || s_[pos_] == '.')) ++pos_;
        if (start == pos_) fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::string where_;
};

std::string type_name(const ConfigDoc::Value& v) {
    switch (v.index()) {
        case 0: return "number";
        case 1: return "boolean";
        case 2: return "string";
        default: return "array";
    }
}

}  // namespace

ConfigDoc ConfigDoc::parse(std::string_view text, const std::string& source) {
    ConfigDoc doc;
    doc.source_ = source;
    std::string section;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view raw = text.substr(start, end - start);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        ++line_no;
        start = end + 1;
        LineParser lp(raw, source + ":" + std::to_string(line_no));
        if (lp.at_end()) {
            if (end == text.size()) break;
            continue;
        }
        if (lp.peek() == '[') {
            lp.expect('[');
            section = lp.key();
            lp.expect(']');
            if (!lp.at_end()) lp.fail("unexpected text after section header");
        } else {
            const std::string k = lp.key();
            lp.expect('=');
            Value v = lp.value();
            if (!lp.at_end()) lp.fail("unexpected text after value");
            const std::string full = section.empty() ? k : section + "." + k;
            if (doc.entries_.count(full)) lp.fail("duplicate key '" + full + "'");
            doc.entries_[full] = Entry{std::move(v), line_no};
        }
        if (end == text.size()) break;
    }
    return doc;
}

ConfigDoc ConfigDoc::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return parse(s.str(), path.string());
}

int ConfigDoc::line_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

const ConfigDoc::Entry* ConfigDoc::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

void ConfigDoc::fail(const std::string& key, const std::string& message) const {
    const int line = line_of(key);
    if (line > 0) throw ConfigError(source_ + ":" + std::to_string(line) + ": " + key + ": " + message);
    throw ConfigError(source_ + ": " + key + ": " + message);
}

double ConfigDoc::number(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (const auto* d = std::get_if<double>(&e->value)) return *d;
    fail(key, "expected a number, got " + type_name(e->value));
}

std::int64_t ConfigDoc::integer(const std::string& key, std::int64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    const auto* d = std::get_if<double>(&e->value);
    if (!d || *d != std::floor(*d) || std::abs(*d) > 9.0e15) fail(key, "expected an integer");
    return static_cast<std::int64_t>(*d);
}

bool ConfigDoc::boolean(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (const auto* b = std::get_if<bool>(&e->value)) return *b;
    fail(key, "expected true or false");
}

std::string ConfigDoc::string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (const auto* s = std::get_if<std::string>(&e->value)) return *s;
    fail(key, "expected a string, got " + type_name(e->value));
}

std::vector<double> ConfigDoc::numbers(const std::string& key, const std::vector<double>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (const auto* v = std::get_if<std::vector<double>>(&e->value)) return *v;
    if (const auto* d = std::get_if<double>(&e->value)) return {*d};
    fail(key, "expected an array of numbers");
}

void ConfigDoc::reject_unused() const {
    for (const auto& [k, e] : entries_)
        if (!used_.count(k)) fail(k, "unknown key");
}

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::decay: return "decay";
        case Experiment::eta: return "eta";
        case Experiment::solve: return "solve";
        case Experiment::particles: return "particles";
        case Experiment::compare: return "compare";
    }
    return "?";
}

Experiment parse_experiment(const std::string& name) {
    for (auto e : {Experiment::decay, Experiment::eta, Experiment::solve, Experiment::particles, Experiment::compare})
        if (experiment_name(e) == name) return e;
    throw ConfigError("unknown experiment '" + name + "' (decay, eta, solve, particles, compare)");
}

Field make_initial(const InitialSpec& spec, const GridSpec& g) {
    const double A = spec.amplitude, w = spec.width, L = g.L;
    auto gauss = [&](const std::array<double, 2>& x, double c) {
        double r2 = 0.0;
        for (int i = 0; i < g.d; ++i) {
            const double r = std::remainder(x[i] - c, L);
            r2 += r * r;
        }
        return std::exp(-0.5 * r2 / (w * w));
    };
    if (spec.preset == "lip_bump")
        return sample(g, [&](auto x) {
            double v = A;
            for (int i = 0; i < g.d; ++i) v *= 0.5 * (1.0 + std::cos(2.0 * kPi * (x[i] - 0.5 * L) / L));
            return v;
        });
    if (spec.preset == "gaussian") return sample(g, [&](auto x) { return A * gauss(x, 0.5 * L); });
    if (spec.preset == "signed_double_bump")
        return sample(g, [&](auto x) { return A * (gauss(x, L / 3.0) - gauss(x, 2.0 * L / 3.0)); });
    if (spec.preset == "bandlimited") {
        Rng rng(derive_seed(spec.seed, 7));
        Field f = random_bandlimited(g, spec.kmax, rng);
        const double m = lp_norm(f, kInf);
        if (m > 0.0) f *= A / m;
        return f;
    }
    throw ConfigError("unknown initial preset '" + spec.preset +
                      "' (lip_bump, gaussian, signed_double_bump, bandlimited)");
}

double lipschitz_constant(const Field& f) {
    const GridSpec& g = f.grid;
    const double h = g.spacing();
    double m = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        if (g.d == 1) {
            m = std::max(m, std::abs(f[(i + 1) % g.n] - f[i]) / h);
            continue;
        }
        for (std::size_t j = 0; j < g.n; ++j) {
            const double v = f[i * g.n + j];
            m = std::max(m, std::abs(f[((i + 1) % g.n) * g.n + j] - v) / h);
            m = std::max(m, std::abs(f[i * g.n + (j + 1) % g.n] - v) / h);
        }
    }
    return m;
}

namespace {

GridSpec read_grid(const ConfigDoc& doc, const std::string& prefix, GridSpec g) {
    g.d = static_cast<int>(doc.integer(prefix + "d", g.d));
    const auto n = doc.integer(prefix + "n", static_cast<std::int64_t>(g.n));
    if (n < 0) doc.fail(prefix + "n", "must be positive");
    g.n = static_cast<std::size_t>(n);
    g.L = doc.number(prefix + "L", g.L);
    try {
        g.validate();
    } catch (const std::exception& e) {
        doc.fail(prefix + "n", e.what());
    }
    return g;
}

std::size_t read_count(const ConfigDoc& doc, const std::string& key, std::size_t fallback, std::size_t min_value) {
    const auto v = doc.integer(key, static_cast<std::int64_t>(fallback));
    if (v < static_cast<std::int64_t>(min_value)) doc.fail(key, "must be at least " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
}

double read_positive(const ConfigDoc& doc, const std::string& key, double fallback) {
    const double v = doc.number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) doc.fail(key, "must be positive and finite");
    return v;
}

double read_nonneg(const ConfigDoc& doc, const std::string& key, double fallback) {
    const double v = doc.number(key, fallback);
    if (!(v >= 0.0) || !std::isfinite(v)) doc.fail(key, "must be nonnegative and finite");
    return v;
}

void check_alpha(const ConfigDoc& doc, const std::string& key, double a) {
    if (!(a > 1.0 && a <= 2.0)) doc.fail(key, "alpha must lie in (1, 2]");
}

}  // namespace

RunConfig resolve_config(const ConfigDoc& doc, Experiment experiment, std::optional<std::uint64_t> seed) {
    RunConfig c;
    c.experiment = experiment;
    if (doc.has("experiment")) {
        const std::string named = doc.string("experiment", "");
        Experiment e{};
        try {
            e = parse_experiment(named);
        } catch (const ConfigError& err) {
            doc.fail("experiment", err.what());
        }
        if (e != experiment)
            doc.fail("experiment", "file is for '" + named + "' but '" + experiment_name(experiment) + "' was requested");
    }
    const auto file_seed = doc.integer("seed", 1);
    if (file_seed < 0) doc.fail("seed", "must be nonnegative");
    c.seed = seed ? *seed : static_cast<std::uint64_t>(file_seed);

    c.grid = read_grid(doc, "grid.", c.grid);
    c.alpha = doc.number("stable.alpha", c.alpha);
    check_alpha(doc, "stable.alpha", c.alpha);
    c.kernel = doc.string("kernel.name", c.kernel);
    try {
        parse_kernel(c.kernel, c.grid.d, c.grid.L);
    } catch (const ConfigError& e) {
        doc.fail("kernel.name", e.what());
    }

    c.u0.preset = doc.string("initial.preset", c.u0.preset);
    c.u0.amplitude = doc.number("initial.amplitude", c.u0.amplitude);
    c.u0.width = read_positive(doc, "initial.width", c.u0.width);
    c.u0.kmax = read_count(doc, "initial.kmax", c.u0.kmax, 1);
    c.u0.seed = static_cast<std::uint64_t>(doc.integer("initial.seed", static_cast<std::int64_t>(c.u0.seed)));
    try {
        make_initial(c.u0, GridSpec{c.grid.d, 8, c.grid.L});
    } catch (const ConfigError& e) {
        doc.fail("initial.preset", e.what());
    }

    c.p = doc.number("solve.p", c.p);
    c.T = read_positive(doc, "solve.T", c.T);

    auto& d = c.decay;
    d.alphas = doc.numbers("decay.alphas", d.alphas);
    for (double a : d.alphas) check_alpha(doc, "decay.alphas", a);
    if (doc.has("decay.q") || doc.has("decay.m")) {
        const auto q = doc.numbers("decay.q", {});
        const auto m = doc.numbers("decay.m", {});
        if (q.size() != m.size() || q.empty()) doc.fail("decay.q", "decay.q and decay.m must have equal nonzero length");
        d.pairs.clear();
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (!(q[i] >= 1.0 && m[i] >= q[i])) doc.fail("decay.q", "need 1 <= q <= m");
            d.pairs.push_back({q[i], m[i]});
        }
    }
    d.grid = read_grid(doc, "decay.", d.grid);
    d.t_min = read_positive(doc, "decay.t_min", d.t_min);
    d.t_max = read_positive(doc, "decay.t_max", d.t_max);
    if (!(d.t_max > d.t_min)) doc.fail("decay.t_max", "must exceed decay.t_min");
    d.times = read_count(doc, "decay.times", d.times, 4);
    d.tolerance = read_positive(doc, "decay.tolerance", d.tolerance);

    auto& e = c.eta;
    e.T_list = doc.numbers("eta.T", e.T_list);
    if (!e.T_list.empty() && e.T_list.size() < 3) doc.fail("eta.T", "needs at least 3 horizons");
    for (double t : e.T_list)
        if (!(t > 0.0)) doc.fail("eta.T", "horizons must be positive");
    e.trials = static_cast<int>(read_count(doc, "eta.trials", static_cast<std::size_t>(e.trials), 16));
    e.grid = read_grid(doc, "eta.", e.grid);
    e.intermediate = static_cast<int>(read_count(doc, "eta.intermediate", static_cast<std::size_t>(e.intermediate), 1));
    e.match_tolerance = read_positive(doc, "eta.match_tolerance", e.match_tolerance);
    e.residual_tolerance = read_positive(doc, "eta.residual_tolerance", e.residual_tolerance);
    if (experiment == Experiment::eta || experiment == Experiment::solve || experiment == Experiment::compare) {
        const int dd = experiment == Experiment::eta ? e.grid.d : c.grid.d;
        if (!(c.p > 2.0) || !(c.p > dd / (c.alpha - 1.0)))
            doc.fail("solve.p", "needs p > 2 and p > d / (alpha - 1)");
        if (experiment == Experiment::eta && c.alpha >= 2.0) doc.fail("stable.alpha", "eta needs alpha < 2");
    }

    auto& s = c.solve;
    s.steps = read_count(doc, "solve.steps", s.steps, 2);
    s.n_max = read_count(doc, "solve.n_max", s.n_max, 1);
    s.tol = read_positive(doc, "solve.tol", s.tol);
    s.relax = doc.boolean("solve.relax", s.relax);
    s.nodes = static_cast<int>(doc.integer("solve.nodes", s.nodes));
    if (s.nodes != 8 && s.nodes != 16 && s.nodes != 32 && s.nodes != 64) doc.fail("solve.nodes", "must be 8, 16, 32 or 64");
    s.test_functions = read_count(doc, "solve.test_functions", s.test_functions, 1);
    s.eta_trials = static_cast<int>(read_count(doc, "solve.eta_trials", static_cast<std::size_t>(s.eta_trials), 16));
    s.horizon_points = read_count(doc, "solve.horizon_points", s.horizon_points, 3);
    s.ratio_slack = read_nonneg(doc, "solve.ratio_slack", s.ratio_slack);
    s.weak_factor = read_positive(doc, "solve.weak_factor", s.weak_factor);

    auto& pc = c.particles;
    pc.N = read_count(doc, "particles.N", pc.N, 1);
    pc.steps = read_count(doc, "particles.steps", pc.steps, 1);
    pc.iters = read_count(doc, "particles.iters", pc.iters, 2);
    pc.eps_kernel = read_nonneg(doc, "particles.eps_kernel", pc.eps_kernel);
    pc.p = doc.number("particles.p", pc.p);
    if (!(pc.p >= 1.0)) doc.fail("particles.p", "must be >= 1");
    pc.bandwidth = read_nonneg(doc, "particles.bandwidth", pc.bandwidth);
    if (pc.bandwidth > 0.0 && pc.bandwidth < c.grid.spacing())
        doc.fail("particles.bandwidth", "below the grid spacing");
    pc.tol = read_nonneg(doc, "particles.tol", pc.tol);
    pc.shape_tolerance = read_positive(doc, "particles.shape_tolerance", pc.shape_tolerance);

    auto& cc = c.compare;
    const auto Ns = doc.numbers("compare.N", {});
    if (doc.has("compare.N")) {
        cc.N_list.clear();
        for (double n : Ns) {
            if (!(n >= 1.0) || n != std::floor(n)) doc.fail("compare.N", "entries must be positive integers");
            if (!cc.N_list.empty() && n <= static_cast<double>(cc.N_list.back()))
                doc.fail("compare.N", "particle counts must be strictly increasing");
            cc.N_list.push_back(static_cast<std::size_t>(n));
        }
        if (cc.N_list.size() < 2) doc.fail("compare.N", "needs at least two particle counts");
    }
    cc.iters = read_count(doc, "compare.iters", cc.iters, 2);
    cc.solve_dir = doc.string("compare.solve_dir", cc.solve_dir);
    cc.particles_dir = doc.string("compare.particles_dir", cc.particles_dir);
    if (cc.solve_dir.empty() != cc.particles_dir.empty())
        doc.fail(cc.solve_dir.empty() ? "compare.particles_dir" : "compare.solve_dir",
                 "solve_dir and particles_dir must be given together");

    if (experiment == Experiment::particles || experiment == Experiment::compare) {
        const CZKernel k = parse_kernel(c.kernel, c.grid.d, c.grid.L);
        try {
            ParticleKernel(k, c.grid.L, 0.25 * c.grid.L);
        } catch (const UnsupportedError& err) {
            doc.fail("kernel.name", err.what());
        }
        const double eps = pc.eps_kernel > 0.0 ? pc.eps_kernel : 0.0;
        if (eps >= 0.5 * c.grid.L) doc.fail("particles.eps_kernel", "must be below L/2");
    }
    if (experiment == Experiment::solve || experiment == Experiment::compare) {
        const CZKernel k = parse_kernel(c.kernel, c.grid.d, c.grid.L);
        if (!k.is_multiplier()) doc.fail("kernel.name", "the mild solver needs a multiplier kernel");
    }
    doc.reject_unused();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, Experiment experiment, std::optional<std::uint64_t> seed) {
    return resolve_config(ConfigDoc::load(path), experiment, seed);
}

nlohmann::ordered_json RunConfig::to_json() const {
    using nlohmann::ordered_json;
    auto grid_json = [](const GridSpec& g) { return ordered_json{{"d", g.d}, {"n", g.n}, {"L", g.L}}; };
    auto num = [](double v) -> ordered_json {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    ordered_json pairs = ordered_json::array();
    for (const auto& pr : decay.pairs) pairs.push_back({num(pr[0]), num(pr[1])});
    ordered_json j;
    j["experiment"] = experiment_name(experiment);
    j["seed"] = seed;
    j["grid"] = grid_json(grid);
    j["alpha"] = alpha;
    j["kernel"] = kernel;
    j["initial"] = {{"preset", u0.preset}, {"amplitude", u0.amplitude}, {"width", u0.width},
                    {"kmax", u0.kmax},     {"seed", u0.seed}};
    j["p"] = p;
    j["T"] = T;
    j["decay"] = {{"alphas", decay.alphas}, {"pairs", pairs},          {"grid", grid_json(decay.grid)},
                  {"t_min", decay.t_min},   {"t_max", decay.t_max},    {"times", decay.times},
                  {"tolerance", decay.tolerance}};
    j["eta"] = {{"T", eta.T_list},
                {"trials", eta.trials},
                {"grid", grid_json(eta.grid)},
                {"intermediate", eta.intermediate},
                {"match_tolerance", eta.match_tolerance},
                {"residual_tolerance", eta.residual_tolerance}};
    j["solve"] = {{"steps", solve.steps},
                  {"n_max", solve.n_max},
                  {"tol", solve.tol},
                  {"relax", solve.relax},
                  {"nodes", solve.nodes},
                  {"test_functions", solve.test_functions},
                  {"eta_trials", solve.eta_trials},
                  {"horizon_points", solve.horizon_points},
                  {"ratio_slack", solve.ratio_slack},
                  {"weak_factor", solve.weak_factor}};
    j["particles"] = {{"N", particles.N},
                      {"steps", particles.steps},
                      {"iters", particles.iters},
                      {"eps_kernel", particles.eps_kernel},
                      {"p", particles.p},
                      {"bandwidth", particles.bandwidth},
                      {"tol", particles.tol},
                      {"shape_tolerance", particles.shape_tolerance}};
    j["compare"] = {{"N", compare.N_list},
                    {"iters", compare.iters},
                    {"solve_dir", compare.solve_dir},
                    {"particles_dir", compare.particles_dir}};
    return j;
}

}  // namespace fracdrift
