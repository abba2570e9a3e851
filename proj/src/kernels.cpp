#include "fracdrift/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracdrift/errors.hpp"

namespace fracdrift {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double r, double L) { return r - L * std::round(r / L); }

std::array<double, 2> unit(const std::array<double, 2>& k, int d) {
    if (d == 1) return {k[0] > 0.0 ? 1.0 : -1.0, 0.0};
    const double m = std::hypot(k[0], k[1]);
    return {k[0] / m, k[1] / m};
}

bool is_zero(const std::array<double, 2>& k) { return k[0] == 0.0 && k[1] == 0.0; }

void check_dim(int d) {
    if (d != 1 && d != 2) throw ParameterError("kernel: d must be 1 or 2");
}

}  // namespace

const MultiplierKernel& CZKernel::multiplier() const {
    if (!is_multiplier()) throw UnsupportedError("kernel '" + name() + "' is pointwise, not a multiplier");
    return std::get<MultiplierKernel>(form_);
}

const PointwiseKernel& CZKernel::pointwise() const {
    if (is_multiplier()) throw UnsupportedError("kernel '" + name() + "' is a multiplier, not pointwise");
    return std::get<PointwiseKernel>(form_);
}

const std::string& CZKernel::name() const {
    return std::visit([](const auto& k) -> const std::string& { return k.name; }, form_);
}

int CZKernel::dim() const {
    return std::visit([](const auto& k) { return k.d; }, form_);
}

int CZKernel::components() const {
    if (is_multiplier()) return static_cast<int>(multiplier().components.size());
    return pointwise().components;
}

double CZKernel::delta() const {
    return std::visit([](const auto& k) { return k.delta; }, form_);
}

namespace catalog {

CZKernel zero(int d) {
    check_dim(d);
    return CZKernel(MultiplierKernel{"zero", d, {[](const std::array<double, 2>&) { return cplx{}; }}, 2.0});
}

CZKernel hilbert() {
    Symbol m = [](const std::array<double, 2>& k) {
        if (k[0] == 0.0) return cplx{};
        return cplx(0.0, k[0] > 0.0 ? -1.0 : 1.0);
    };
    return CZKernel(MultiplierKernel{"hilbert", 1, {m}, 2.0});
}

CZKernel riesz(int j, int d) {
    check_dim(d);
    if (j < 1 || j > d) throw ParameterError("riesz: component index out of range");
    Symbol m = [j, d](const std::array<double, 2>& k) {
        if (is_zero(k)) return cplx{};
        return cplx(0.0, -unit(k, d)[j - 1]);
    };
    return CZKernel(MultiplierKernel{"riesz:" + std::to_string(j), d, {m}, static_cast<double>(d + 1)});
}

CZKernel riesz_pair() {
    MultiplierKernel k{"riesz", 2, {}, 3.0};
    for (int j = 1; j <= 2; ++j) k.components.push_back(riesz(j, 2).multiplier().components[0]);
    return CZKernel(std::move(k));
}

CZKernel smooth_h0(const std::string& expr, int d) {
    check_dim(d);
    auto e = std::make_shared<Expression>(Expression::parse(expr));
    Symbol m = [e, d](const std::array<double, 2>& k) {
        if (is_zero(k)) return cplx{};
        const auto u = unit(k, d);
        return e->eval(u[0], u[1]);
    };
    // |m| <= 1 on the unit sphere.
    const int samples = d == 1 ? 2 : 720;
    for (int s = 0; s < samples; ++s) {
        const double th = 2.0 * kPi * s / samples;
        const std::array<double, 2> k = d == 1 ? std::array<double, 2>{s == 0 ? 1.0 : -1.0, 0.0}
                                               : std::array<double, 2>{std::cos(th), std::sin(th)};
        const cplx v = m(k);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ParameterError("smooth_h0: multiplier is not finite on the unit sphere");
        if (std::abs(v) > 1.0 + 1e-12) throw ParameterError("smooth_h0: multiplier exceeds 1 in modulus");
    }
    return CZKernel(MultiplierKernel{"smooth_h0:" + expr, d, {m}, 1.0});
}

CZKernel pointwise_hilbert(double L) {
    if (!(L > 0.0)) throw ParameterError("pointwise_hilbert: L must be positive");
    PointwiseKernel k;
    k.name = "pointwise:hilbert";
    k.d = 1;
    k.components = 1;
    k.L = L;
    k.b = [L](const std::array<double, 2>& x, const std::array<double, 2>& y) {
        const double r = wrap(x[0] - y[0], L);
        return std::array<double, 2>{1.0 / (L * std::tan(kPi * r / L)), 0.0};
    };
    k.C = 3.0;
    k.delta = 2.0;
    return CZKernel(std::move(k));
}

namespace {
PointwiseKernel riesz_pointwise(double L) {
    if (!(L > 0.0)) throw ParameterError("pointwise_riesz: L must be positive");
    PointwiseKernel k;
    k.d = 2;
    k.L = L;
    k.b = [L](const std::array<double, 2>& x, const std::array<double, 2>& y) {
        const double r1 = wrap(x[0] - y[0], L), r2 = wrap(x[1] - y[1], L);
        const double r = std::hypot(r1, r2);
        const double c = 1.0 / (2.0 * kPi * r * r * r);
        return std::array<double, 2>{c * r1, c * r2};
    };
    k.C = 8.0;
    k.delta = 3.0;
    return k;
}
}  // namespace

CZKernel pointwise_riesz(int j, double L) {
    if (j < 1 || j > 2) throw ParameterError("pointwise_riesz: component index out of range");
    PointwiseKernel k = riesz_pointwise(L);
    k.name = "pointwise:riesz:" + std::to_string(j);
    k.components = 1;
    auto pair = k.b;
    k.b = [pair, j](const std::array<double, 2>& x, const std::array<double, 2>& y) {
        return std::array<double, 2>{pair(x, y)[j - 1], 0.0};
    };
    return CZKernel(std::move(k));
}

CZKernel pointwise_riesz_pair(double L) {
    PointwiseKernel k = riesz_pointwise(L);
    k.name = "pointwise:riesz";
    k.components = 2;
    return CZKernel(std::move(k));
}

}  // namespace catalog

CZKernel parse_kernel(const std::string& spec, int d, double L) {
    check_dim(d);
    auto need = [&](int want) {
        if (d != want)
            throw ConfigError("kernel '" + spec + "' requires d = " + std::to_string(want));
    };
    auto index = [&](const std::string& s) {
        if (s == "1") return 1;
        if (s == "2") return 2;
        throw ConfigError("kernel '" + spec + "': component must be 1 or 2");
    };
    if (spec == "zero") return catalog::zero(d);
    if (spec == "hilbert") {
        need(1);
        return catalog::hilbert();
    }
    if (spec == "riesz") {
        need(2);
        return catalog::riesz_pair();
    }
    if (spec.rfind("riesz:", 0) == 0) return catalog::riesz(index(spec.substr(6)), d);
    if (spec.rfind("smooth_h0:", 0) == 0) {
        try {
            return catalog::smooth_h0(spec.substr(10), d);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("kernel '") + spec + "': " + e.what());
        }
    }
    if (spec == "pointwise:hilbert") {
        need(1);
        return catalog::pointwise_hilbert(L);
    }
    if (spec == "pointwise:riesz") {
        need(2);
        return catalog::pointwise_riesz_pair(L);
    }
    if (spec.rfind("pointwise:riesz:", 0) == 0) {
        need(2);
        return catalog::pointwise_riesz(index(spec.substr(16)), L);
    }
    throw ConfigError("unknown kernel '" + spec +
                      "' (expected hilbert, riesz, riesz:j, zero, smooth_h0:<expr>, pointwise:hilbert, "
                      "pointwise:riesz, pointwise:riesz:j)");
}

std::vector<cplx> kernel_table(const CZKernel& k, const GridSpec& g, int component) {
    const auto& m = k.multiplier();
    if (m.d != g.d) throw ConfigError("kernel '" + m.name + "' dimension does not match grid");
    if (component < 0 || component >= static_cast<int>(m.components.size()))
        throw ParameterError("kernel_table: component out of range");
    return multiplier_table(g, m.components[static_cast<std::size_t>(component)]);
}

double multiplier_sup(const CZKernel& k, const GridSpec& g) {
    double s = 0.0;
    for (int c = 0; c < k.components(); ++c)
        for (const cplx& v : kernel_table(k, g, c)) s = std::max(s, std::abs(v));
    return s;
}

Field cz_apply(const CZKernel& k, const Field& f) {
    if (!k.is_multiplier())
        throw UnsupportedError("cz_apply: kernel '" + k.name() + "' is pointwise; use cz_apply_pv");
    if (k.components() != 1)
        throw UnsupportedError("cz_apply: kernel '" + k.name() + "' is vector-valued; use cz_apply_vector");
    return apply_multiplier(f, kernel_table(k, f.grid, 0));
}

VectorField cz_apply_vector(const CZKernel& k, const Field& f) {
    if (!k.is_multiplier())
        throw UnsupportedError("cz_apply_vector: kernel '" + k.name() + "' is pointwise; use cz_apply_pv");
    VectorField out;
    for (int c = 0; c < k.components(); ++c) out.push_back(apply_multiplier(f, kernel_table(k, f.grid, c)));
    return out;
}

VectorField cz_apply_pv(const CZKernel& k, const Field& f, double eps) {
    const auto& pk = k.pointwise();
    const GridSpec& g = f.grid;
    if (pk.d != g.d) throw ConfigError("cz_apply_pv: kernel dimension does not match grid");
    const double h = g.spacing();
    if (!(eps >= h * (1.0 - 1e-12))) throw ParameterError("cz_apply_pv: eps must be at least the grid spacing");
    const double dv = g.cell_volume();
    const std::size_t N = g.size();
    const int nc = pk.components;

    const double eps_cells2 = (eps / h) * (eps / h) * (1.0 + 1e-9);
    const long n = static_cast<long>(g.n);
    auto wrap_index = [n](std::size_t a, std::size_t b) {
        long o = (static_cast<long>(a) - static_cast<long>(b)) % n;
        if (o >= n / 2) o -= n;
        if (o < -n / 2) o += n;
        return o;
    };
    auto point = [&](std::size_t i) -> std::array<double, 2> {
        if (g.d == 1) return {g.coord(i), 0.0};
        return {g.coord(i / g.n), g.coord(i % g.n)};
    };

    VectorField out(static_cast<std::size_t>(nc), Field(g));
    for (std::size_t i = 0; i < N; ++i) {
        const auto x = point(i);
        std::array<double, 2> acc{0.0, 0.0};
        for (std::size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const auto y = point(j);
            // Classify by integer offsets so that +r and -r always land on the same side.
            const long o1 = g.d == 1 ? wrap_index(i, j) : wrap_index(i / g.n, j / g.n);
            const long o2 = g.d == 1 ? 0 : wrap_index(i % g.n, j % g.n);
            const bool far = double(o1 * o1 + o2 * o2) > eps_cells2;
            const auto b = pk.b(x, y);
            const double w = far ? f[j] : f[j] - f[i];
            for (int c = 0; c < nc; ++c) acc[static_cast<std::size_t>(c)] += b[static_cast<std::size_t>(c)] * w;
        }
        for (int c = 0; c < nc; ++c) out[static_cast<std::size_t>(c)][i] = acc[static_cast<std::size_t>(c)] * dv;
    }
    return out;
}

Field random_bandlimited(const GridSpec& g, std::size_t kmax, Rng& rng) {
    g.validate();
    kmax = std::min(kmax, g.n / 2 - 1);
    const double decay = rng.uniform(0.0, 2.0);
    SpectralField F{g, std::vector<cplx>(g.size())};
    const long km = static_cast<long>(kmax);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const long k0 = g.freq_index(g.d == 1 ? idx : idx / g.n);
        const long k1 = g.d == 1 ? 0 : g.freq_index(idx % g.n);
        if (std::abs(k0) > km || std::abs(k1) > km || (k0 == 0 && k1 == 0)) continue;
        const std::size_t mir = g.mirror_index(idx);
        if (mir < idx) continue;
        const double amp = std::pow(1.0 + std::hypot(double(k0), double(k1)), -decay);
        const cplx c(amp * rng.normal(), amp * rng.normal());
        F.coeffs[idx] = c;
        F.coeffs[mir] = std::conj(c);
    }
    return from_spectral(F);
}

double operator_norm_probe(const CZKernel& k, const GridSpec& g, double p, int trials, std::uint64_t seed) {
    g.validate();
    if (!(p >= 1.1 && p <= 16.0)) throw ParameterError("operator_norm_probe: p must lie in [1.1, 16]");
    if (trials < 32) throw ParameterError("operator_norm_probe: trials must be >= 32");
    if (k.dim() != g.d) throw ConfigError("operator_norm_probe: kernel dimension does not match grid");
    Rng rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::size_t kmax = 1 + rng.below(std::max<std::size_t>(1, g.n / 8));
        const Field f = random_bandlimited(g, kmax, rng);
        const double nf = lp_norm(f, p);
        if (!(nf > 1e-14)) continue;
        const VectorField Kf = k.is_multiplier() ? cz_apply_vector(k, f) : cz_apply_pv(k, f, g.spacing());
        for (const Field& c : Kf) best = std::max(best, lp_norm(c, p) / nf);
    }
    return best;
}

double holder_seminorm(const Field& f, double eps) {
    const GridSpec& g = f.grid;
    const double h = g.spacing();
    const long reach = static_cast<long>(g.n / 4);
    const long n = static_cast<long>(g.n);
    // Offsets with distance <= L/4, half-space only (pairs are symmetric).
    std::vector<std::pair<std::array<long, 2>, double>> offsets;
    for (long a = (g.d == 2 ? -reach : 0); a <= reach; ++a)
        for (long b = -reach; b <= reach; ++b) {
            const long o0 = g.d == 1 ? b : a, o1 = g.d == 1 ? 0 : b;
            if (g.d == 1 && a != 0) continue;
            if (o0 < 0 || (o0 == 0 && o1 <= 0)) continue;
            const double r = h * std::hypot(double(o0), double(o1));
            if (r > 0.25 * g.L * (1.0 + 1e-12)) continue;
            offsets.push_back({{o0, o1}, std::pow(r, -eps)});
        }
    double best = 0.0;
    if (g.d == 1) {
        for (long i = 0; i < n; ++i)
            for (const auto& [o, w] : offsets)
                best = std::max(best, std::abs(f[i] - f[(i + o[0]) % n]) * w);
    } else {
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                for (const auto& [o, w] : offsets) {
                    const long i2 = ((i + o[0]) % n + n) % n, j2 = ((j + o[1]) % n + n) % n;
                    best = std::max(best, std::abs(f[i * n + j] - f[i2 * n + j2]) * w);
                }
    }
    return best;
}

double lipschitz_probe(const CZKernel& k, const GridSpec& g, double eps_holder, int trials, std::uint64_t seed) {
    g.validate();
    if (!(eps_holder > 0.0 && eps_holder <= std::min(k.delta(), 1.0)))
        throw ParameterError("lipschitz_probe: need 0 < eps <= min(delta, 1)");
    if (trials < 1) throw ParameterError("lipschitz_probe: trials must be positive");
    if (k.dim() != g.d) throw ConfigError("lipschitz_probe: kernel dimension does not match grid");
    Rng rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::size_t kmax = 1 + rng.below(std::max<std::size_t>(1, g.n / 16));
        const Field f = random_bandlimited(g, kmax, rng);
        const double sf = holder_seminorm(f, eps_holder);
        if (!(sf > 1e-14)) continue;
        const VectorField Kf = k.is_multiplier() ? cz_apply_vector(k, f) : cz_apply_pv(k, f, g.spacing());
        for (const Field& c : Kf) best = std::max(best, holder_seminorm(c, eps_holder) / sf);
    }
    return best;
}

CZConditionReport validate_cz_conditions(const CZKernel& k, std::size_t pairs, std::uint64_t seed) {
    const auto& pk = k.pointwise();
    const double L = pk.L;
    const int d = pk.d;
    Rng rng(seed);
    CZConditionReport rep;
    rep.pairs = pairs;

    auto rand_dir = [&](double len) -> std::array<double, 2> {
        if (d == 1) return {rng.sign() * len, 0.0};
        const double th = rng.uniform(0.0, 2.0 * kPi);
        return {len * std::cos(th), len * std::sin(th)};
    };
    auto add = [](std::array<double, 2> a, const std::array<double, 2>& b) {
        a[0] += b[0];
        a[1] += b[1];
        return a;
    };
    auto dist = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        return std::hypot(wrap(a[0] - b[0], L), d == 2 ? wrap(a[1] - b[1], L) : 0.0);
    };
    auto diff = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        double m = 0.0;
        for (int c = 0; c < pk.components; ++c) m = std::max(m, std::abs(a[std::size_t(c)] - b[std::size_t(c)]));
        return m;
    };
    auto mag = [&](const std::array<double, 2>& a) { return diff(a, {0.0, 0.0}); };

    for (std::size_t s = 0; s < pairs; ++s) {
        const std::array<double, 2> y{rng.uniform(0.0, L), d == 2 ? rng.uniform(0.0, L) : 0.0};
        // |x - y| log-uniform in [L/2000, L/4]; the shift stays below half of it.
        const double r = L / 4.0 * std::pow(500.0, -rng.uniform());
        const auto x = add(y, rand_dir(r));
        const auto bxy = pk.b(x, y);
        rep.size_ratio = std::max(rep.size_ratio, mag(bxy) * std::pow(dist(x, y), d) / pk.C);

        const double hlen = 0.5 * r * rng.uniform();
        const auto xp = add(x, rand_dir(hlen));
        const double dx = dist(x, xp);
        const double denom_x = std::pow(dist(x, y) + dist(xp, y), pk.delta);
        rep.x_smooth_ratio = std::max(rep.x_smooth_ratio, diff(bxy, pk.b(xp, y)) * denom_x / (pk.C * dx));

        const auto yp = add(y, rand_dir(hlen));
        const double dy = dist(y, yp);
        const double denom_y = std::pow(dist(x, y) + dist(x, yp), pk.delta);
        rep.y_smooth_ratio = std::max(rep.y_smooth_ratio, diff(pk.b(x, yp), bxy) * denom_y / (pk.C * dy));
    }
    return rep;
}

}  // namespace fracdrift
