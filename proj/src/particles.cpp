#include "fracdrift/particles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <span>

#include "fracdrift/errors.hpp"
#include "fracdrift/random.hpp"

namespace fracdrift {

namespace {

constexpr double kPi = std::numbers::pi;

// Chambers-Mallows-Stuck, symmetric case.
double cms_symmetric(double alpha, Rng& rng) {
    const double v = kPi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

// Kanter: positive a-stable with Laplace transform exp(-lambda^a), a in (0, 1].
double kanter_positive(double a, Rng& rng) {
    const double u = kPi * rng.uniform();
    const double w = rng.exponential();
    if (a >= 1.0) return 1.0;
    return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) * std::pow(std::sin((1.0 - a) * u) / w, (1.0 - a) / a);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return derive_seed(h ^ v, 0x51ed27ULL); }

std::uint64_t mix(std::uint64_t h, double v) { return mix(h, std::bit_cast<std::uint64_t>(v)); }

void check_times(const std::vector<double>& t) {
    if (t.size() < 2) throw ConfigError("time grid needs at least two points");
    if (t.front() != 0.0) throw ConfigError("time grid must start at 0");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1])) throw ConfigError("time grid must be strictly increasing");
}

}  // namespace

std::vector<double> sample_stable(const StableParams& s, std::size_t n, std::uint64_t seed) {
    s.validate();
    Rng rng(seed);
    std::vector<double> out(n * static_cast<std::size_t>(s.d));
    if (s.d == 1) {
        for (auto& x : out) x = cms_symmetric(s.alpha, rng);
        return out;
    }
    const double a = 0.5 * s.alpha;
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = std::sqrt(2.0 * kanter_positive(a, rng));
        out[2 * i] = scale * rng.normal();
        out[2 * i + 1] = scale * rng.normal();
    }
    return out;
}

InitialSample sample_initial(const Field& u0, std::size_t N, std::uint64_t seed) {
    u0.validate();
    const GridSpec& g = u0.grid;
    const double dv = g.cell_volume();
    std::vector<double> cdf(u0.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) {
        acc += std::abs(u0[i]) * dv;
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) throw ParameterError("sample_initial: u0 must have positive L^1 norm");
    if (N == 0) throw ParameterError("sample_initial: N must be positive");

    InitialSample out;
    out.mass = acc;
    out.positions.resize(N * static_cast<std::size_t>(g.d));
    out.weights.resize(N);
    Rng rng(seed);
    const double h = g.spacing();
    for (std::size_t j = 0; j < N; ++j) {
        const double target = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t cell = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
        while (u0[cell] == 0.0 && cell + 1 < cdf.size()) ++cell;
        out.weights[j] = u0[cell] < 0.0 ? -1.0 : 1.0;
        if (g.d == 1) {
            out.positions[j] = (static_cast<double>(cell) + rng.uniform()) * h;
        } else {
            const std::size_t r = cell / g.n;
            const std::size_t c = cell % g.n;
            out.positions[2 * j] = (static_cast<double>(r) + rng.uniform()) * h;
            out.positions[2 * j + 1] = (static_cast<double>(c) + rng.uniform()) * h;
        }
    }
    return out;
}

NoiseBundle make_noise(const Field& u0, std::size_t N, const std::vector<double>& t_grid, const StableParams& s,
                       std::uint64_t seed) {
    check_times(t_grid);
    if (s.d != u0.grid.d) throw ConfigError("noise: stable dimension does not match u0 grid");
    NoiseBundle nb;
    nb.seed = seed;
    nb.N = N;
    nb.d = s.d;
    nb.t_grid = t_grid;

    const auto init = sample_initial(u0, N, derive_seed(seed, 0));
    nb.weights = init.weights;
    nb.mass = init.mass;
    nb.initials.resize(N * nb.d);
    for (std::size_t i = 0; i < N; ++i)
        for (int c = 0; c < nb.d; ++c) nb.initials[c * N + i] = init.positions[i * nb.d + c];

    const std::size_t steps = t_grid.size() - 1;
    nb.increments.resize(steps * nb.d * N);
    for (std::size_t k = 0; k < steps; ++k) {
        const double scale = std::pow(t_grid[k + 1] - t_grid[k], 1.0 / s.alpha);
        const auto draws = sample_stable(s, N, derive_seed(seed, 1 + k));
        for (std::size_t i = 0; i < N; ++i)
            for (int c = 0; c < nb.d; ++c) nb.increments[(k * nb.d + c) * N + i] = scale * draws[i * nb.d + c];
    }
    return nb;
}

std::uint64_t lineage_of(const NoiseBundle& noise) {
    std::uint64_t h = mix(noise.seed, static_cast<std::uint64_t>(noise.N));
    h = mix(h, static_cast<std::uint64_t>(noise.d));
    for (double t : noise.t_grid) h = mix(h, t);
    for (double x : noise.initials) h = mix(h, x);
    return h;
}

double ParticleEnsemble::signed_mass() const {
    if (N == 0) return 0.0;
    double s = 0.0;
    for (double w : weights) s += w;
    return mass * s / static_cast<double>(N);
}

ParticleKernel::ParticleKernel(const CZKernel& k, double L, double eps) : d_(k.dim()), eps_(eps) {
    const std::string& name = k.name();
    if (name == "zero") {
        zero_ = true;
        return;
    }
    if (name == "hilbert" || name == "pointwise:hilbert") {
        hilbert_ = simd::HilbertTorus::make(L, eps);
        return;
    }
    if (name == "riesz" || name == "pointwise:riesz") {
        riesz_ = simd::RieszTorus2::make(L, eps);
        return;
    }
    throw UnsupportedError("particles: kernel '" + name +
                           "' has no particle form (supported: zero, hilbert, riesz, pointwise:hilbert, "
                           "pointwise:riesz)");
}

double ParticleKernel::max_magnitude() const {
    if (zero_) return 0.0;
    if (d_ == 1) return std::abs(hilbert_(eps_));
    return 0.5 / kPi / (eps_ * eps_);
}

std::array<double, 2> ParticleKernel::sum(const double* x, const std::vector<const double*>& ys, const double* sign,
                                          std::size_t begin, std::size_t end) const {
    if (zero_ || end <= begin) return {0.0, 0.0};
    const std::size_t n = end - begin;
    if (d_ == 1) {
        const double v = simd::hilbert_sum(hilbert_, x[0], std::span<const double>(ys[0] + begin, n),
                                           std::span<const double>(sign + begin, n));
        return {v, 0.0};
    }
    return simd::riesz2_sum(riesz_, x[0], x[1], std::span<const double>(ys[0] + begin, n),
                            std::span<const double>(ys[1] + begin, n), std::span<const double>(sign + begin, n));
}

double SimConfig::resolved_eps() const {
    if (eps_kernel > 0.0) return eps_kernel;
    return grid.L * std::pow(static_cast<double>(N), -1.0 / (grid.d + 2));
}

void SimConfig::validate() const {
    grid.validate();
    s.validate();
    check_times(t_grid);
    if (N == 0) throw ConfigError("particles: N must be positive");
    if (eps_kernel < 0.0) throw ConfigError("particles: eps_kernel must be positive");
    if (s.d != grid.d || kern.dim() != grid.d) throw ConfigError("particles: dimension mismatch");
    if (!(u0.grid == grid)) throw ConfigError("particles: u0 grid does not match");
    const double eps = resolved_eps();
    if (!(eps < 0.5 * grid.L)) throw ConfigError("particles: eps_kernel must be below L/2");
}

std::array<double, 2> drift_eval(const double* x, const ParticleEnsemble& marginal, std::size_t k,
                                 const ParticleKernel& kern, std::optional<std::size_t> self) {
    if (marginal.N == 0 || kern.is_zero()) return {0.0, 0.0};
    std::vector<const double*> ys(marginal.d);
    for (int c = 0; c < marginal.d; ++c) ys[c] = marginal.component(k, c);
    const double* w = marginal.weights.data();
    std::array<double, 2> acc{};
    if (self && *self < marginal.N) {
        const auto lo = kern.sum(x, ys, w, 0, *self);
        const auto hi = kern.sum(x, ys, w, *self + 1, marginal.N);
        acc = {lo[0] + hi[0], lo[1] + hi[1]};
    } else {
        acc = kern.sum(x, ys, w, 0, marginal.N);
    }
    const double scale = marginal.mass / static_cast<double>(marginal.N);
    return {scale * acc[0], scale * acc[1]};
}

namespace {

ParticleEnsemble empty_like(const NoiseBundle& noise, const SimConfig& cfg) {
    ParticleEnsemble out;
    out.L = cfg.grid.L;
    out.d = noise.d;
    out.N = noise.N;
    out.t_grid = noise.t_grid;
    out.paths.assign(noise.t_grid.size() * noise.d * noise.N, 0.0);
    out.weights = noise.weights;
    out.mass = noise.mass;
    out.lineage = lineage_of(noise);
    for (int c = 0; c < noise.d; ++c)
        std::copy_n(noise.initials.data() + c * noise.N, noise.N, out.component(0, c));
    return out;
}

void check_noise(const NoiseBundle& noise, const SimConfig& cfg) {
    if (noise.N != cfg.N || noise.t_grid != cfg.t_grid || noise.d != cfg.grid.d)
        throw ConfigError("particles: noise bundle does not match the configuration");
}

}  // namespace

ParticleEnsemble free_paths(const NoiseBundle& noise, const SimConfig& cfg) {
    check_noise(noise, cfg);
    ParticleEnsemble out = empty_like(noise, cfg);
    for (std::size_t k = 0; k + 1 < out.frames(); ++k)
        for (int c = 0; c < out.d; ++c) {
            const double* x = out.component(k, c);
            const double* ds = noise.increment(k, c);
            double* next = out.component(k + 1, c);
            for (std::size_t i = 0; i < out.N; ++i) next[i] = x[i] + ds[i];
        }
    return out;
}

ParticleEnsemble psi_apply(const ParticleEnsemble& Y, const NoiseBundle& noise, const SimConfig& cfg) {
    check_noise(noise, cfg);
    if (Y.N != noise.N || Y.t_grid != noise.t_grid || Y.d != noise.d)
        throw ConfigError("psi_apply: ensemble and noise must share N, d and the time grid");
    const double eps = cfg.resolved_eps();
    const ParticleKernel kern(cfg.kern, cfg.grid.L, eps);
    if (kern.is_zero()) return free_paths(noise, cfg);
    ParticleEnsemble out = empty_like(noise, cfg);

    const double bound = Y.mass * kern.max_magnitude();
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < out.frames(); ++k) worst = std::max(worst, out.t_grid[k + 1] - out.t_grid[k]);
    if (worst * bound >= 0.5 * eps)
        out.warnings.push_back("step bound violated: dt * max|drift| = " + std::to_string(worst * bound) +
                               " >= eps / 2 = " + std::to_string(0.5 * eps));

    const std::ptrdiff_t N = static_cast<std::ptrdiff_t>(out.N);
    const int d = out.d;
    for (std::size_t k = 0; k + 1 < out.frames(); ++k) {
        const double dt = out.t_grid[k + 1] - out.t_grid[k];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < N; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            double x[2] = {out.component(k, 0)[ui], d == 2 ? out.component(k, 1)[ui] : 0.0};
            const auto b = drift_eval(x, Y, k, kern, ui);
            for (int c = 0; c < d; ++c)
                out.component(k + 1, c)[ui] = x[c] + noise.increment(k, c)[ui] + dt * b[c];
        }
    }
    return out;
}

Field density_from_ensemble(const ParticleEnsemble& ens, std::size_t k, double bandwidth, const GridSpec& g) {
    g.validate();
    if (k >= ens.frames()) throw ParameterError("density_from_ensemble: frame out of range");
    if (g.d != ens.d || g.L != ens.L) throw ConfigError("density_from_ensemble: grid does not match ensemble");
    const double h = g.spacing();
    if (!(bandwidth >= h * (1.0 - 1e-12)))
        throw ParameterError("density_from_ensemble: bandwidth below grid spacing");
    Field out(g);
    if (ens.N == 0) return out;

    const long n = static_cast<long>(g.n);
    const long reach = static_cast<long>(std::ceil(8.0 * bandwidth / h));
    const std::size_t width = static_cast<std::size_t>(2 * reach + 1);
    const double inv2h2 = 0.5 / (bandwidth * bandwidth);
    const double scale = ens.mass / static_cast<double>(ens.N);

    // Normalized 1-d stencil centered at the nearest grid point below x.
    auto stencil = [&](double x, std::vector<double>& w, long& base) {
        const double pos = x / h;
        const long j0 = static_cast<long>(std::floor(pos));
        base = j0 - reach;
        // exp(-(r + h)^2 c) = exp(-r^2 c) exp(-2 r h c) exp(-h^2 c), stepped multiplicatively.
        const double r0 = (static_cast<double>(base) - pos) * h;
        const double q = std::exp(-2.0 * h * h * inv2h2);
        double g = std::exp(-r0 * r0 * inv2h2);
        double ratio = std::exp(-(2.0 * r0 * h + h * h) * inv2h2);
        double total = 0.0;
        for (std::size_t m = 0; m < width; ++m) {
            w[m] = g;
            total += g;
            g *= ratio;
            ratio *= q;
        }
        for (auto& v : w) v /= total * h;
    };
    auto wrap = [n](long j) { return static_cast<std::size_t>(((j % n) + n) % n); };

    std::vector<double> w1(width), w2(width);
    for (std::size_t i = 0; i < ens.N; ++i) {
        const double a = scale * ens.weights[i];
        long b1 = 0, b2 = 0;
        stencil(ens.component(k, 0)[i], w1, b1);
        if (g.d == 1) {
            for (std::size_t m = 0; m < width; ++m) out[wrap(b1 + static_cast<long>(m))] += a * w1[m];
        } else {
            stencil(ens.component(k, 1)[i], w2, b2);
            for (std::size_t m = 0; m < width; ++m) {
                const std::size_t row = wrap(b1 + static_cast<long>(m)) * g.n;
                const double am = a * w1[m];
                for (std::size_t q = 0; q < width; ++q) out[row + wrap(b2 + static_cast<long>(q))] += am * w2[q];
            }
        }
    }
    return out;
}

double default_bandwidth(const ParticleEnsemble& ens, std::size_t k, const GridSpec& g) {
    if (k >= ens.frames()) throw ParameterError("default_bandwidth: frame out of range");
    if (ens.N == 0) return g.spacing();
    double h = 0.0;
    for (int c = 0; c < ens.d; ++c) {
        std::vector<double> x(ens.component(k, c), ens.component(k, c) + ens.N);
        const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
        std::nth_element(x.begin(), mid, x.end());
        const double med = *mid;
        for (auto& v : x) v = std::abs(v - med);
        std::nth_element(x.begin(), mid, x.end());
        h = std::max(h, 1.06 * (*mid) * std::pow(static_cast<double>(ens.N), -0.2));
    }
    return std::max(h, g.spacing());
}

}  // namespace fracdrift
