#include "fracdrift/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "fracdrift/errors.hpp"
#include "fracdrift/simd/dispatch.hpp"

namespace fracdrift {
namespace {

using std::numbers::pi;
using boost::math::quadrature::gauss;

constexpr int kImages1 = 64;
constexpr int kImages2 = 6;

double norm_k(const std::array<double, 2>& k) { return std::hypot(k[0], k[1]); }

double sphere_area(int d) { return d == 1 ? 2.0 : 2.0 * pi; }

// Second derivative along `axis` with the 8th-order central stencil.
Field second_derivative(const Field& f, int axis) {
    static constexpr double c[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    const GridSpec& g = f.grid;
    const std::size_t n = g.n;
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    Field out(g);
    auto at = [&](std::size_t i, std::size_t j, long shift) {
        if (g.d == 1) return f[(i + n + shift) % n];
        if (axis == 0) return f[((i + n + shift) % n) * n + j];
        return f[i * n + (j + n + shift) % n];
    };
    const std::size_t rows = g.d == 1 ? n : n;
    const std::size_t cols = g.d == 1 ? 1 : n;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double acc = c[0] * at(i, j, 0);
            for (long s = 1; s <= 4; ++s) acc += c[s] * (at(i, j, s) + at(i, j, -s));
            out[g.d == 1 ? i : i * n + j] = acc * inv_h2;
        }
    return out;
}

Field fd_laplacian(const Field& f) {
    Field out = second_derivative(f, 0);
    if (f.grid.d == 2) out += second_derivative(f, 1);
    return out;
}

// Integral over the cell minus the eps-ball of (1 - cos(k1 y_1))/k1^2 times the image kernel.
double subtracted_quadratic_integral(const GridSpec& g, double alpha, double eps) {
    const double L = g.L;
    const double k1 = 2.0 * pi / L;
    auto phi = [k1](double y1) {
        const double s = std::sin(0.5 * k1 * y1);
        return 2.0 * s * s / (k1 * k1);
    };
    auto radial_panels = [](double lo, double hi, auto&& fn) {
        // geometric panels resolve the r^{1-alpha} growth near lo
        double acc = 0.0;
        const int panels = 24;
        const double ratio = std::pow(hi / lo, 1.0 / panels);
        double a = lo;
        for (int p = 0; p < panels; ++p) {
            const double b = p == panels - 1 ? hi : a * ratio;
            acc += gauss<double, 20>::integrate(fn, a, b);
            a = b;
        }
        return acc;
    };
    if (g.d == 1) {
        auto fn = [&](double y) {
            const double yy[1] = {y};
            return phi(y) * periodic_jump_kernel(yy, L, alpha);
        };
        return 2.0 * radial_panels(eps, 0.5 * L, fn);
    }
    double acc = 0.0;
    for (int oct = 0; oct < 8; ++oct) {
        const double t0 = oct * pi / 4.0;
        auto angular = [&](double theta) {
            const double c = std::cos(theta), s = std::sin(theta);
            const double rmax = 0.5 * L / std::max(std::abs(c), std::abs(s));
            auto fn = [&](double r) {
                const double yy[2] = {r * c, r * s};
                return phi(r * c) * periodic_jump_kernel(yy, L, alpha) * r;
            };
            return radial_panels(eps, rmax, fn);
        };
        acc += gauss<double, 20>::integrate(angular, t0, t0 + pi / 4.0);
    }
    return acc;
}

struct JumpWeights {
    std::vector<double> w;  // n^d weights over offsets m + n/2
    double total = 0.0;
    double tau = 0.0;  // grid sum of the subtracted quadratic surrogate
};

JumpWeights jump_weights(const GridSpec& g, double alpha, double eps) {
    const std::size_t n = g.n;
    const long half = static_cast<long>(n / 2);
    const double h = g.spacing();
    const double hd = g.cell_volume();
    const double k1 = 2.0 * pi / g.L;
    JumpWeights jw;
    jw.w.assign(g.size(), 0.0);
    auto surrogate = [&](double y1) {
        const double s = std::sin(0.5 * k1 * y1);
        return 2.0 * s * s / (k1 * k1);
    };
    if (g.d == 1) {
        const long e = std::lround(eps / h);
        for (long m = -half; m < half; ++m) {
            const long am = std::labs(m);
            if (am < e || m == 0) continue;
            const double y[1] = {m * h};
            double wt = periodic_jump_kernel(y, g.L, alpha) * hd;
            if (am == e) wt *= 0.5;
            jw.w[m + half] = wt;
            jw.total += wt;
            jw.tau += wt * surrogate(y[0]);
        }
        return jw;
    }
    for (long m1 = -half; m1 < half; ++m1)
        for (long m2 = -half; m2 < half; ++m2) {
            const double y[2] = {m1 * h, m2 * h};
            if (std::hypot(y[0], y[1]) < eps || (m1 == 0 && m2 == 0)) continue;
            const double wt = periodic_jump_kernel(y, g.L, alpha) * hd;
            jw.w[(m1 + half) * n + (m2 + half)] = wt;
            jw.total += wt;
            jw.tau += wt * surrogate(y[0]);
        }
    return jw;
}

// out(x) = sum_m w[m] f(x + y_m) on the torus, via the SIMD correlation kernel.
Field periodic_correlation(const Field& f, std::span<const double> w) {
    const GridSpec& g = f.grid;
    const std::size_t n = g.n;
    const std::size_t half = n / 2;
    const std::size_t ext_len = 2 * n - 1;
    auto extend = [&](const double* row, std::vector<double>& ext) {
        ext.resize(ext_len);
        for (std::size_t j = 0; j < ext_len; ++j) ext[j] = row[(j + n - half) % n];
    };
    Field out(g);
    if (g.d == 1) {
        std::vector<double> ext;
        extend(f.values.data(), ext);
        simd::correlate_accumulate(ext, w, out.values);
        return out;
    }
    std::vector<std::vector<double>> exts(n);
    for (std::size_t r = 0; r < n; ++r) extend(f.values.data() + r * n, exts[r]);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<double> out_row(out.values.data() + i * n, n);
        for (std::size_t q = 0; q < n; ++q) {
            std::span<const double> wrow(w.data() + q * n, n);
            if (std::all_of(wrow.begin(), wrow.end(), [](double v) { return v == 0.0; })) continue;
            const std::size_t r = (i + q + n - half) % n;
            simd::correlate_accumulate(exts[r], wrow, out_row);
        }
    }
    return out;
}

}  // namespace

double periodic_jump_kernel(std::span<const double> y, double L, double alpha) {
    if (y.size() == 1) {
        const double s = 1.0 + alpha;
        const double r = y[0] - L * std::nearbyint(y[0] / L);
        double acc = 0.0;
        for (int m = -kImages1; m <= kImages1; ++m) {
            const double z = std::abs(r + m * L);
            if (z > 0.0) acc += std::pow(z, -s);
        }
        const double a = (kImages1 + 0.5) * L;
        return acc + 2.0 / (alpha * L * std::pow(a, alpha));
    }
    const double e = -0.5 * (2.0 + alpha);
    const double r1 = y[0] - L * std::nearbyint(y[0] / L);
    const double r2 = y[1] - L * std::nearbyint(y[1] / L);
    double acc = 0.0;
    for (int m1 = -kImages2; m1 <= kImages2; ++m1)
        for (int m2 = -kImages2; m2 <= kImages2; ++m2) {
            const double a = r1 + m1 * L, b = r2 + m2 * L;
            const double q = a * a + b * b;
            if (q > 0.0) acc += std::pow(q, e);
        }
    // Lattice tail outside the square of half-width a, as a continuum integral.
    static thread_local double cached_alpha = -1.0, cached_angular = 0.0;
    if (cached_alpha != alpha) {
        cached_alpha = alpha;
        cached_angular = 8.0 * gauss<double, 20>::integrate(
                                   [alpha](double t) { return std::pow(std::cos(t), alpha); }, 0.0, pi / 4.0);
    }
    const double a = (kImages2 + 0.5) * L;
    return acc + cached_angular * std::pow(a, -alpha) / (alpha * L * L);
}

Field jump_integral(const Field& f, double alpha, double eps) {
    const GridSpec& g = f.grid;
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ParameterError("quadrature fractional Laplacian needs alpha in (1, 2)");
    if (!(eps > 0.0) || eps >= 0.5 * g.L) throw ParameterError("quadrature eps must lie in (0, L/2)");
    const double h = g.spacing();
    if (g.d == 1) eps = std::max(1.0, std::round(eps / h)) * h;
    else eps = std::max(eps, h);

    const JumpWeights jw = jump_weights(g, alpha, eps);
    const double J = subtracted_quadratic_integral(g, alpha, eps);
    const int d = g.d;
    const double area = sphere_area(d);
    // Image part of the kernel at the origin (the m = 0 term excluded).
    std::vector<double> probe(static_cast<std::size_t>(d), 0.0);
    probe[0] = g.L;
    const double k_img0 = periodic_jump_kernel(probe, g.L, alpha);
    const double c2 = area / (2.0 * d) *
                      (std::pow(eps, 2.0 - alpha) / (2.0 - alpha) + k_img0 * std::pow(eps, d + 2.0) / (d + 2.0));
    const double c4 = area * std::pow(eps, 4.0 - alpha) / (8.0 * d * (d + 2.0) * (4.0 - alpha));

    const Field lap = fd_laplacian(f);
    const Field bilap = fd_laplacian(lap);
    Field out = periodic_correlation(f, jw.w);
    const double lap_coeff = J - jw.tau + c2;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += -jw.total * f[i] + lap_coeff * lap[i] + c4 * bilap[i];
    return out;
}

double calibrate_jump_constant(const GridSpec& g, double alpha, double eps) {
    const double k1 = 2.0 * pi / g.L;
    const Field wave = sample(g, [k1](const std::array<double, 2>& x) { return std::cos(k1 * x[0]); });
    const Field q = jump_integral(wave, alpha, eps);
    return -std::pow(k1, alpha) * inner(wave, wave) / inner(q, wave);
}

Field frac_laplacian(const Field& f, const StableParams& s, LaplacianForm form, double eps) {
    s.validate();
    f.validate();
    if (form == LaplacianForm::spectral) {
        const double a = s.alpha;
        return apply_multiplier(f, [a](const std::array<double, 2>& k) { return cplx(-std::pow(norm_k(k), a)); });
    }
    if (!(eps > 0.0) || eps >= 0.5 * f.grid.L)
        throw ParameterError("quadrature form needs eps in (0, L/2), got " + std::to_string(eps));
    Field out = jump_integral(f, s.alpha, eps);
    out *= calibrate_jump_constant(f.grid, s.alpha, eps);
    return out;
}

Field semigroup_apply(const Field& f, double t, const StableParams& s) {
    s.validate();
    if (!(t >= 0.0)) throw ParameterError("semigroup time must be >= 0");
    if (t == 0.0) return f;
    const double a = s.alpha;
    return apply_multiplier(f, [a, t](const std::array<double, 2>& k) { return cplx(std::exp(-t * std::pow(norm_k(k), a))); });
}

VectorField semigroup_gradient(const Field& f, double t, const StableParams& s) {
    s.validate();
    if (!(t >= 0.0)) throw ParameterError("semigroup time must be >= 0");
    const double a = s.alpha;
    VectorField out;
    const SpectralField F = to_spectral(f);
    for (int j = 0; j < f.grid.d; ++j) {
        const auto table = multiplier_table(f.grid, [a, t, j](const std::array<double, 2>& k) {
            return cplx(0.0, k[j]) * std::exp(-t * std::pow(norm_k(k), a));
        });
        SpectralField G = F;
        for (std::size_t i = 0; i < table.size(); ++i) G.coeffs[i] *= table[i];
        out.push_back(from_spectral(G));
    }
    return out;
}

Field magnitude(const VectorField& v) {
    if (v.empty()) throw ConfigError("magnitude: empty vector field");
    Field out(v.front().grid);
    for (const Field& c : v) {
        require_same_grid(c.grid, out.grid, "magnitude");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
    }
    for (double& x : out.values) x = std::sqrt(x);
    return out;
}

VectorField spectral_gradient(const Field& f) {
    VectorField out;
    for (int j = 0; j < f.grid.d; ++j)
        out.push_back(apply_multiplier(f, [j](const std::array<double, 2>& k) { return cplx(0.0, k[j]); }));
    return out;
}

Field spectral_divergence(const VectorField& v) {
    if (v.empty()) throw ConfigError("divergence: empty vector field");
    Field out(v.front().grid);
    for (std::size_t j = 0; j < v.size(); ++j)
        out += apply_multiplier(v[j], [j](const std::array<double, 2>& k) { return cplx(0.0, k[j]); });
    return out;
}

double decay_exponent(int d, double alpha, double q, double m, bool gradient) {
    const double inv_m = std::isinf(m) ? 0.0 : 1.0 / m;
    double e = -(d / alpha) * (1.0 / q - inv_m);
    if (gradient) e -= 1.0 / alpha;
    return e;
}

DecayFit decay_rate_probe(const Field& f, double q, double m, const StableParams& s,
                          std::span<const double> t_grid, bool gradient) {
    if (!(q >= 1.0 && m >= q)) throw ParameterError("decay probe needs m >= q >= 1");
    if (t_grid.size() < 4) throw ParameterError("decay probe needs at least 4 times");
    DecayFit fit;
    std::vector<double> lx, ly;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw ParameterError("decay probe times must be positive");
        const double nrm = gradient ? lp_norm(magnitude(semigroup_gradient(f, t, s)), m)
                                    : lp_norm(semigroup_apply(f, t, s), m);
        fit.norms.push_back(nrm);
        lx.push_back(std::log(t));
        ly.push_back(std::log(nrm));
    }
    const LineFit lf = fit_line(lx, ly);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.residual = lf.residual;
    return fit;
}

Field point_mass(const GridSpec& g) {
    Field f(g);
    const std::size_t c = g.n / 2;
    f[g.d == 1 ? c : c * g.n + c] = 1.0 / g.cell_volume();
    return f;
}

Field homogeneous_profile(const GridSpec& g, double a, double R) {
    if (!(a >= 0.0 && a < g.d)) throw ParameterError("homogeneous profile needs 0 <= a < d");
    const double h = g.spacing();
    const double centre = 0.5 * g.L;
    Field f = sample(g, [&](const std::array<double, 2>& x) {
        const double r = g.d == 1 ? std::abs(x[0] - centre) : std::hypot(x[0] - centre, x[1] - centre);
        if (r == 0.0) return 0.0;
        return std::pow(r, -a) * std::exp(-r / R);
    });
    const std::size_t c = g.n / 2;
    if (g.d == 1) {
        f[c] = 2.0 / h * std::pow(0.5 * h, 1.0 - a) / (1.0 - a);
    } else {
        const double r0 = h / std::sqrt(pi);
        f[c * g.n + c] = 2.0 * pi * std::pow(r0, 2.0 - a) / ((2.0 - a) * h * h);
    }
    return f;
}

Field extremal_profile(const GridSpec& g, double q) {
    if (q == 1.0) return point_mass(g);
    return homogeneous_profile(g, g.d / q, g.L / 8.0);
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
    }
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_line: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

}  // namespace fracdrift
