#include "fracdrift/mild.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "fracdrift/errors.hpp"
#include "fracdrift/fft.hpp"
#include "fracdrift/spectral.hpp"

namespace fracdrift {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rule {
    std::vector<double> x;  // nodes on [0, 1]
    std::vector<double> w;
};

template <unsigned N>
Rule make_rule() {
    using Q = boost::math::quadrature::gauss<double, N>;
    const auto& a = Q::abscissa();
    const auto& wt = Q::weights();
    Rule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double xi = a[i];
        if (xi == 0.0) {
            r.x.push_back(0.5);
            r.w.push_back(0.5 * wt[i]);
            continue;
        }
        r.x.push_back(0.5 * (1.0 - xi));
        r.w.push_back(0.5 * wt[i]);
        r.x.push_back(0.5 * (1.0 + xi));
        r.w.push_back(0.5 * wt[i]);
    }
    return r;
}

const Rule& rule(int nodes) {
    static const Rule r8 = make_rule<8>(), r16 = make_rule<16>(), r32 = make_rule<32>(), r64 = make_rule<64>();
    switch (nodes) {
        case 8: return r8;
        case 16: return r16;
        case 32: return r32;
        case 64: return r64;
        default: throw ParameterError("duhamel: nodes must be 8, 16, 32 or 64");
    }
}

std::vector<cplx> fft_of(const Field& f) {
    std::vector<cplx> c(f.values.begin(), f.values.end());
    fft_forward(f.grid, c);
    return c;
}

Field real_ifft(const GridSpec& g, std::vector<cplx> c) {
    fft_inverse(g, c);
    Field f(g);
    for (std::size_t i = 0; i < c.size(); ++i) f[i] = c[i].real();
    return f;
}

std::vector<double> symbol_power(const GridSpec& g, double alpha) {
    std::vector<double> lam(g.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const auto k = g.wavevector(i);
        lam[i] = std::pow(std::hypot(k[0], k[1]), alpha);
    }
    return lam;
}

}  // namespace

// ---- trajectories ----------------------------------------------------------

void FieldTrajectory::validate() const {
    if (frames.empty()) throw ParameterError("trajectory is empty");
    if (frames.size() != t_grid.size()) throw ConfigError("trajectory: frame count does not match time grid");
    if (t_grid.front() != 0.0) throw ConfigError("trajectory: time grid must start at 0");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw ConfigError("trajectory: time grid must be strictly increasing");
    for (const Field& f : frames) require_same_grid(f.grid, grid, "trajectory");
}

std::vector<double> uniform_times(double T, std::size_t steps) {
    if (!(T > 0.0)) throw ParameterError("horizon T must be positive");
    if (steps < 1) throw ParameterError("steps must be >= 1");
    std::vector<double> t(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(steps);
    t.back() = T;
    return t;
}

FieldTrajectory constant_trajectory(const Field& f, const std::vector<double>& t_grid) {
    FieldTrajectory u{f.grid, t_grid, std::vector<Field>(t_grid.size(), f)};
    u.validate();
    return u;
}

FieldTrajectory heat_trajectory(const Field& u0, const std::vector<double>& t_grid, const StableParams& s) {
    s.validate();
    const GridSpec& g = u0.grid;
    const auto lam = symbol_power(g, s.alpha);
    const auto hat = fft_of(u0);
    FieldTrajectory y{g, t_grid, {}};
    y.frames.reserve(t_grid.size());
    for (double t : t_grid) {
        std::vector<cplx> c(hat);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::exp(-t * lam[i]);
        y.frames.push_back(real_ifft(g, std::move(c)));
    }
    y.validate();
    return y;
}

double traj_norm(const FieldTrajectory& u, double p) {
    if (u.frames.empty()) throw ParameterError("traj_norm: empty trajectory");
    if (!(p >= 1.0)) throw ParameterError("traj_norm: p must be >= 1");
    double m = 0.0;
    for (const Field& f : u.frames) m = std::max(m, lp_norm(f, p));
    return m;
}

double traj_distance(const FieldTrajectory& a, const FieldTrajectory& b, double p) {
    if (a.frames.size() != b.frames.size()) throw ConfigError("traj_distance: frame count mismatch");
    if (a.frames.empty()) throw ParameterError("traj_distance: empty trajectory");
    double m = 0.0;
    for (std::size_t k = 0; k < a.frames.size(); ++k) m = std::max(m, lp_norm(a.frames[k] - b.frames[k], p));
    return m;
}

// ---- drift -----------------------------------------------------------------

DriftOperator::DriftOperator(const CZKernel& k, const GridSpec& g, std::array<double, 2> direction) : grid_(g) {
    g.validate();
    if (k.dim() != g.d) throw ConfigError("drift: kernel '" + k.name() + "' dimension does not match grid");
    if (!k.is_multiplier())
        throw UnsupportedError("drift: the mild solver needs a multiplier kernel, got '" + k.name() + "'");
    if (g.d == 1 || k.components() == g.d) {
        for (int c = 0; c < k.components(); ++c) tables_.push_back(kernel_table(k, g, c));
    } else {
        const double nrm = std::hypot(direction[0], direction[1]);
        if (!(nrm > 0.0)) throw ParameterError("drift: direction must be nonzero");
        const auto base = kernel_table(k, g, 0);
        for (int j = 0; j < 2; ++j) {
            std::vector<cplx> t(base);
            for (auto& v : t) v *= direction[static_cast<std::size_t>(j)] / nrm;
            tables_.push_back(std::move(t));
        }
    }
    for (int j = 0; j < g.d; ++j)
        grad_.push_back(multiplier_table(g, [j](const std::array<double, 2>& kk) { return cplx(0.0, kk[j]); }));
    zero_ = std::all_of(tables_.begin(), tables_.end(), [](const auto& t) {
        return std::all_of(t.begin(), t.end(), [](cplx v) { return v == cplx{}; });
    });
}

VectorField DriftOperator::apply(const Field& u) const {
    require_same_grid(u.grid, grid_, "drift");
    const auto hat = fft_of(u);
    VectorField out;
    for (const auto& t : tables_) {
        std::vector<cplx> c(hat);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= t[i];
        out.push_back(real_ifft(grid_, std::move(c)));
    }
    return out;
}

std::vector<cplx> DriftOperator::flux_divergence_hat(const Field& u, const Field& v) const {
    require_same_grid(u.grid, grid_, "drift");
    std::vector<cplx> acc(grid_.size());
    if (zero_) return acc;
    const VectorField B = apply(v);
    for (std::size_t j = 0; j < B.size(); ++j) {
        Field prod(grid_);
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u[i] * B[j][i];
        const auto hat = fft_of(prod);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += grad_[j][i] * hat[i];
    }
    acc[0] = 0.0;
    return acc;
}

// ---- Duhamel bilinear map --------------------------------------------------

FieldTrajectory duhamel_bilinear(const FieldTrajectory& u, const FieldTrajectory& v, const DriftOperator& drift,
                                 const StableParams& s, const DuhamelOptions& opt) {
    s.validate();
    u.validate();
    v.validate();
    require_same_grid(u.grid, v.grid, "duhamel_bilinear");
    require_same_grid(u.grid, drift.grid(), "duhamel_bilinear");
    if (u.t_grid != v.t_grid) throw ConfigError("duhamel_bilinear: time grids differ");
    const GridSpec& g = u.grid;
    const std::size_t F = u.size();
    const Rule& r = rule(opt.nodes);

    FieldTrajectory out{g, u.t_grid, std::vector<Field>(F, Field(g))};
    if (drift.is_zero()) return out;

    std::vector<std::vector<cplx>> D(F);
    for (std::size_t k = 0; k < F; ++k) D[k] = drift.flux_divergence_hat(u.frames[k], v.frames[k]);

    const auto lam = symbol_power(g, s.alpha);
    const double gamma = s.alpha / (s.alpha - 1.0);
    const auto& tg = u.t_grid;
    const std::size_t N = g.size();

#pragma omp parallel for schedule(dynamic)
    for (std::size_t m = 1; m < F; ++m) {
        const double t = tg[m];
        std::vector<cplx> acc(N), Ds(N);
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            const double sig = r.x[q];
            const double tau = t * std::pow(sig, gamma);  // t - s
            const double sv = t - tau;
            const double wq = r.w[q] * gamma * t * std::pow(sig, gamma - 1.0);

            // Causal cubic Lagrange stencil inside frames [0, m].
            std::size_t i = static_cast<std::size_t>(std::upper_bound(tg.begin(), tg.begin() + long(m) + 1, sv) -
                                                     tg.begin());
            i = i == 0 ? 0 : i - 1;
            if (i >= m) i = m - 1;
            const std::size_t npts = std::min<std::size_t>(4, m + 1);
            long lo = static_cast<long>(i) - 1;
            lo = std::clamp(lo, 0L, static_cast<long>(m + 1 - npts));
            std::array<double, 4> ell{};
            for (std::size_t a = 0; a < npts; ++a) {
                double l = 1.0;
                for (std::size_t b = 0; b < npts; ++b)
                    if (b != a) l *= (sv - tg[lo + b]) / (tg[lo + a] - tg[lo + b]);
                ell[a] = l;
            }
            std::fill(Ds.begin(), Ds.end(), cplx{});
            for (std::size_t a = 0; a < npts; ++a) {
                const auto& Dk = D[static_cast<std::size_t>(lo) + a];
                for (std::size_t n = 0; n < N; ++n) Ds[n] += ell[a] * Dk[n];
            }
            for (std::size_t n = 0; n < N; ++n) acc[n] += (wq * std::exp(-tau * lam[n])) * Ds[n];
        }
        out.frames[m] = real_ifft(g, std::move(acc));
    }
    return out;
}

FieldTrajectory duhamel_bilinear(const FieldTrajectory& u, const FieldTrajectory& v, const CZKernel& kern,
                                 const StableParams& s, const DuhamelOptions& opt) {
    return duhamel_bilinear(u, v, DriftOperator(kern, u.grid), s, opt);
}

// ---- eta -------------------------------------------------------------------

namespace {

// Sum of signed Gaussian bumps, periodized by nearest image.
Field bump_field(const GridSpec& g, const std::vector<std::array<double, 4>>& bumps) {
    return sample(g, [&](const std::array<double, 2>& x) {
        double v = 0.0;
        for (const auto& b : bumps) {
            const double r1 = x[0] - b[0] - g.L * std::round((x[0] - b[0]) / g.L);
            const double r2 = g.d == 2 ? x[1] - b[1] - g.L * std::round((x[1] - b[1]) / g.L) : 0.0;
            v += b[3] * std::exp(-(r1 * r1 + r2 * r2) / (2.0 * b[2] * b[2]));
        }
        return v;
    });
}

// Random pair of bump fields at scale ell; the same rng stream gives the same shape at every scale.
std::pair<Field, Field> scaled_pair(const GridSpec& g, double ell, Rng& rng) {
    const double c0 = 0.5 * g.L;
    auto make = [&] {
        std::vector<std::array<double, 4>> b;
        const int count = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < count; ++i) {
            const double w = ell * rng.uniform(0.5, 1.5);
            const double o1 = ell * rng.uniform(-1.0, 1.0);
            const double o2 = g.d == 2 ? ell * rng.uniform(-1.0, 1.0) : 0.0;
            b.push_back({c0 + o1, c0 + o2, w, rng.normal()});
        }
        return bump_field(g, b);
    };
    Field u = make();
    Field v = make();
    return {std::move(u), std::move(v)};
}

}  // namespace

EtaEstimate eta_estimate(const CZKernel& kern, const StableParams& s, double p, std::vector<double> T_list,
                         int trials, std::uint64_t seed, const EtaOptions& opt) {
    s.validate();
    const GridSpec& g = opt.grid;
    g.validate();
    if (!(p >= 2.0)) throw ParameterError("eta_estimate: p must be >= 2");
    if (!(p > g.d / (s.alpha - 1.0))) throw ParameterError("eta_estimate: p must exceed d / (alpha - 1)");
    if (trials < 16) throw ParameterError("eta_estimate: trials must be >= 16");
    if (T_list.size() < 3) throw ParameterError("eta_estimate: need at least 3 horizons");
    std::sort(T_list.begin(), T_list.end());
    if (!(T_list.front() > 0.0)) throw ParameterError("eta_estimate: horizons must be positive");

    std::vector<double> tg{0.0};
    for (double t : logspace(T_list.front() / 8.0, T_list.back(), std::size_t(std::max(opt.intermediate_times, 2))))
        tg.push_back(t);
    tg.insert(tg.end(), T_list.begin(), T_list.end());
    std::sort(tg.begin(), tg.end());
    tg.erase(std::unique(tg.begin(), tg.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
             tg.end());

    const DriftOperator drift(kern, g);
    EtaEstimate est;
    est.T = T_list;
    est.eta.assign(T_list.size(), 0.0);

    auto account = [&](const Field& u, const Field& v) {
        const double nu = lp_norm(u, p), nv = lp_norm(v, p);
        if (!(nu > 1e-300 && nv > 1e-300)) return;
        const auto B = duhamel_bilinear(constant_trajectory(u, tg), constant_trajectory(v, tg), drift, s, opt.duhamel);
        double run = 0.0;
        std::size_t j = 0;
        for (std::size_t k = 0; k < tg.size() && j < T_list.size(); ++k) {
            run = std::max(run, lp_norm(B.frames[k], p) / (nu * nv));
            while (j < T_list.size() && T_list[j] <= tg[k] * (1.0 + 1e-12)) {
                est.eta[j] = std::max(est.eta[j], run);
                ++j;
            }
        }
    };

    for (int r = 0; r < trials; ++r) {
        for (double T : T_list) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            const double rho = rng.uniform(0.5, 2.0);
            const auto [u, v] = scaled_pair(g, rho * std::pow(T, 1.0 / s.alpha), rng);
            account(u, v);
        }
        Rng rng(derive_seed(seed, 1000003ULL + static_cast<std::uint64_t>(r)));
        const Field u = random_bandlimited(g, 8, rng);
        const Field v = random_bandlimited(g, 8, rng);
        account(u, v);
    }

    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < T_list.size(); ++j) {
        lx.push_back(std::log(T_list[j]));
        ly.push_back(std::log(std::max(est.eta[j], 1e-300)));
    }
    const LineFit fit = fit_line(lx, ly);
    est.fitted_exponent = fit.slope;
    est.fitted_log_constant = fit.intercept;
    est.fit_residual = fit.residual;
    est.exponent_claimed = 1.0 - 1.0 / s.alpha;
    est.exponent_integrated = 1.0 - 1.0 / s.alpha - g.d / (s.alpha * p);
    const bool a = std::abs(fit.slope - est.exponent_claimed) <= opt.match_tolerance;
    const bool b = std::abs(fit.slope - est.exponent_integrated) <= opt.match_tolerance;
    est.matches = a && b ? "both" : a ? "claimed" : b ? "integrated" : "neither";
    return est;
}

double EtaModel::operator()(double T) const { return safety * C * std::pow(T, exponent); }

EtaModel EtaModel::from_fit(const EtaEstimate& e, double safety) {
    return EtaModel{std::exp(e.fitted_log_constant), e.fitted_exponent, safety};
}

double ball_radius(double eta, double y_norm) {
    if (y_norm == 0.0) return 0.0;
    const double disc = 1.0 - 4.0 * eta * y_norm;
    if (disc < 0.0) throw ParameterError("ball_radius: 4 eta ||y|| exceeds 1");
    if (eta == 0.0) return y_norm;
    return (1.0 - std::sqrt(disc)) / (2.0 * eta);
}

LocalExistenceCert local_horizon(const Field& u0, const StableParams& s, double p, const EtaModel& eta,
                                 const std::vector<double>& T_search, std::size_t steps) {
    if (!(p > 2.0)) throw ParameterError("local_horizon: p must exceed 2");
    if (T_search.empty()) throw ParameterError("local_horizon: empty search grid");
    LocalExistenceCert cert;
    for (double T : T_search) {
        const double y = traj_norm(heat_trajectory(u0, uniform_times(T, steps), s), p);
        const double e = eta(T);
        if (4.0 * e * y < 1.0 && T >= cert.T_star) {
            cert.certified = true;
            cert.T_star = T;
            cert.eta_at_T_star = e;
            cert.y_norm = y;
            cert.R = ball_radius(e, y);
        }
    }
    if (!cert.certified) cert.note = "no certified horizon on the search grid";
    return cert;
}

// ---- Picard ----------------------------------------------------------------

PicardResult picard_solve(const Field& u0, const DriftOperator& drift, const StableParams& s, double p, double T,
                          std::size_t steps, const PicardOptions& opt, const std::optional<LocalExistenceCert>& cert) {
    if (!(p >= 1.0)) throw ParameterError("picard_solve: p must be >= 1");
    if (opt.n_max < 1) throw ParameterError("picard_solve: n_max must be >= 1");
    PicardResult res;
    res.y = heat_trajectory(u0, uniform_times(T, steps), s);
    res.y_norm = traj_norm(res.y, p);
    if (cert && (!cert->certified || T > cert->T_star))
        res.warnings.push_back("horizon T exceeds the certified T*");

    FieldTrajectory cur = res.y;
    const double limit = 10.0 * 2.0 * res.y_norm;
    for (std::size_t it = 0; it < opt.n_max; ++it) {
        const FieldTrajectory B = duhamel_bilinear(cur, cur, drift, s, opt.duhamel);
        FieldTrajectory next = res.y;
        for (std::size_t k = 0; k < next.size(); ++k) {
            next.frames[k] -= B.frames[k];
            if (opt.relax) {
                next.frames[k] += cur.frames[k];
                next.frames[k] *= 0.5;
            }
        }
        const double r = traj_distance(next, cur, p);
        const double nrm = traj_norm(next, p);
        res.residuals.push_back(r);
        res.norms.push_back(nrm);
        if (!std::isfinite(nrm) || nrm > limit)
            throw DivergenceError("picard_solve diverged at iteration " + std::to_string(it + 1) + ": norm " +
                                  std::to_string(nrm) + " exceeds 10x the bound ||x||_X <= 2||y||_X = " +
                                  std::to_string(2.0 * res.y_norm));
        cur = std::move(next);
        if (r < opt.tol) {
            res.converged = true;
            break;
        }
    }
    res.u = std::move(cur);
    if (!res.converged) res.warnings.push_back("reached n_max without meeting tol");
    return res;
}

// ---- weak form -------------------------------------------------------------

double TestFunction::chi_at(double s) const {
    double v = 0.0;
    for (std::size_t j = chi.size(); j-- > 0;) v = v * s + chi[j];
    return v;
}

double TestFunction::dchi_at(double s) const {
    double v = 0.0;
    for (std::size_t j = chi.size(); j-- > 1;) v = v * s + static_cast<double>(j) * chi[j];
    return v;
}

Field TestFunction::phi(const GridSpec& g) const {
    return sample(g, [&](const std::array<double, 2>& x) {
        double v = 0.0;
        for (const auto& m : modes) {
            const double th = m.k[0] * x[0] + m.k[1] * x[1];
            v += m.a * std::cos(th) + m.b * std::sin(th);
        }
        return v;
    });
}

VectorField TestFunction::grad_phi(const GridSpec& g) const {
    VectorField out;
    for (int j = 0; j < g.d; ++j)
        out.push_back(sample(g, [&](const std::array<double, 2>& x) {
            double v = 0.0;
            for (const auto& m : modes) {
                const double th = m.k[0] * x[0] + m.k[1] * x[1];
                v += m.k[static_cast<std::size_t>(j)] * (-m.a * std::sin(th) + m.b * std::cos(th));
            }
            return v;
        }));
    return out;
}

Field TestFunction::frac_phi(const GridSpec& g, double alpha) const {
    return sample(g, [&](const std::array<double, 2>& x) {
        double v = 0.0;
        for (const auto& m : modes) {
            const double th = m.k[0] * x[0] + m.k[1] * x[1];
            v += std::pow(std::hypot(m.k[0], m.k[1]), alpha) * (m.a * std::cos(th) + m.b * std::sin(th));
        }
        return v;
    });
}

TestFunction unit_test_function() { return TestFunction{{TestFunction::Mode{{0.0, 0.0}, 1.0, 0.0}}, {1.0}}; }

std::vector<TestFunction> random_test_functions(const GridSpec& g, std::size_t count, double T, std::uint64_t seed) {
    if (!(T > 0.0)) throw ParameterError("random_test_functions: T must be positive");
    Rng rng(seed);
    const double k0 = 2.0 * kPi / g.L;
    std::vector<TestFunction> out;
    for (std::size_t c = 0; c < count; ++c) {
        TestFunction psi;
        const int nm = 1 + static_cast<int>(rng.below(3));
        for (int m = 0; m < nm; ++m) {
            long i1 = 0, i2 = 0;
            while (i1 == 0 && i2 == 0) {
                i1 = static_cast<long>(rng.below(7)) - 3;
                i2 = g.d == 2 ? static_cast<long>(rng.below(7)) - 3 : 0;
            }
            psi.modes.push_back({{k0 * double(i1), k0 * double(i2)}, rng.normal(), rng.normal()});
        }
        for (int j = 0; j <= 4; ++j) psi.chi.push_back(rng.normal() / std::pow(T, j));
        out.push_back(std::move(psi));
    }
    return out;
}

double simpson(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size()) throw ConfigError("simpson: size mismatch");
    const std::size_t n = t.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
    double acc = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        const double h0 = t[i + 1] - t[i], h1 = t[i + 2] - t[i + 1];
        acc += (h0 + h1) / 6.0 *
               ((2.0 - h1 / h0) * f[i] + (h0 + h1) * (h0 + h1) / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
    }
    if (i + 1 < n) {
        // Last interval: quadratic through the final three points.
        const double h0 = t[n - 2] - t[n - 3], h1 = t[n - 1] - t[n - 2];
        const double d0 = (f[n - 2] - f[n - 3]) / h0, d1 = (f[n - 1] - f[n - 2]) / h1;
        const double C = (d1 - d0) / (h0 + h1);
        const double B = d0 + C * h0;
        acc += f[n - 2] * h1 + B * h1 * h1 / 2.0 + C * h1 * h1 * h1 / 3.0;
    }
    return acc;
}

std::vector<double> weak_residual(const FieldTrajectory& u, const DriftOperator& drift, const StableParams& s,
                                  const std::vector<TestFunction>& psi_set) {
    u.validate();
    s.validate();
    require_same_grid(u.grid, drift.grid(), "weak_residual");
    const GridSpec& g = u.grid;
    std::vector<VectorField> B;
    B.reserve(u.size());
    for (const Field& f : u.frames) B.push_back(drift.apply(f));

    std::vector<double> out;
    for (const TestFunction& psi : psi_set) {
        const Field phi = psi.phi(g);
        const Field lphi = psi.frac_phi(g, s.alpha);
        const VectorField gphi = psi.grad_phi(g);
        std::vector<double> integrand(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double t = u.t_grid[k];
            const double c = psi.chi_at(t), dc = psi.dchi_at(t);
            const Field& uk = u.frames[k];
            double acc = 0.0;
            for (std::size_t i = 0; i < uk.size(); ++i) {
                double drift_term = 0.0;
                for (std::size_t j = 0; j < B[k].size(); ++j) drift_term += B[k][j][i] * gphi[j][i];
                acc += (dc * phi[i] - c * lphi[i] + c * drift_term) * uk[i];
            }
            integrand[k] = acc * g.cell_volume();
        }
        const double lhs = psi.chi_at(u.horizon()) * inner(phi, u.frames.back()) - psi.chi_at(0.0) * inner(phi, u.frames.front());
        out.push_back(std::abs(lhs - simpson(u.t_grid, integrand)));
    }
    return out;
}

}  // namespace fracdrift
