#pragma once

#include <span>
#include <vector>

#include "fracdrift/fft.hpp"
#include "fracdrift/grid.hpp"
#include "fracdrift/stable.hpp"

namespace fracdrift {

enum class LaplacianForm { spectral, quadrature };

/// Returns -(-Delta)^{alpha/2} f (negative semidefinite).
///
/// spectral:   F^{-1}(-|k|^alpha F f).
/// quadrature: the jump integral K \int (f(x+y) - f(x) - grad f . y 1_{|y|<=1}) |y|^{-d-alpha} dy,
///             evaluated on the periodic cell |y_i| <= L/2 with the image-summed kernel
///             sum_m |y + mL|^{-d-alpha}. Offsets y and -y are paired, which removes the
///             compensator exactly. Inside |y| < eps the integrand is replaced by its Taylor
///             expansion; outside, the quadratic part of f is subtracted through the periodic
///             surrogate (2 - 2cos(k1 y_i))/k1^2 and added back via an independently integrated
///             constant, leaving an O(|y|^4) remainder for the trapezoid sum. K is calibrated
///             on the first plane wave (see calibrate_jump_constant). In d = 1, eps is snapped
///             to the nearest multiple of the grid spacing. d = 2 costs O(n^4).
Field frac_laplacian(const Field& f, const StableParams& s, LaplacianForm form, double eps = 0.0);

// Unnormalized jump integral (K = 1) used by the quadrature form.
Field jump_integral(const Field& f, double alpha, double eps);

// K that makes the quadrature form reproduce -|k1|^alpha on cos(k1 x_1), k1 = 2 pi / L.
double calibrate_jump_constant(const GridSpec& g, double alpha, double eps);

// Image-summed kernel sum_m |y + mL|^{-d-alpha} (y != 0 modulo L).
double periodic_jump_kernel(std::span<const double> y, double L, double alpha);

/// F^{-1}(e^{-t|k|^alpha} F f): linear, mass preserving, L^p contracting.
Field semigroup_apply(const Field& f, double t, const StableParams& s);

/// Component j = F^{-1}(i k_j e^{-t|k|^alpha} F f); Nyquist derivative modes are zero.
VectorField semigroup_gradient(const Field& f, double t, const StableParams& s);

// Pointwise Euclidean magnitude of a vector field.
Field magnitude(const VectorField& v);
// Spectral divergence sum_j d_j v_j.
Field spectral_divergence(const VectorField& v);
// Spectral gradient.
VectorField spectral_gradient(const Field& f);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS deviation of log-norms from the fitted line
    std::vector<double> norms;
};

/// Least-squares slope of log ||p_t * f||_m (or of the gradient) against log t.
/// q only enters the theoretical exponent; it is validated as m >= q >= 1.
DecayFit decay_rate_probe(const Field& f, double q, double m, const StableParams& s,
                          std::span<const double> t_grid, bool gradient);

// -(d/alpha)(1/q - 1/m), minus 1/alpha for the gradient.
double decay_exponent(int d, double alpha, double q, double m, bool gradient);

// Unit-mass discrete point mass at the grid centre.
Field point_mass(const GridSpec& g);
// |x - c|^{-a} e^{-|x - c|/R} around the grid centre; the singular cell holds its cell average.
Field homogeneous_profile(const GridSpec& g, double a, double R);
// Profile whose smoothing norms realise the L^q -> L^m exponent: point mass for q = 1,
// |x|^{-d/q} otherwise.
Field extremal_profile(const GridSpec& g, double q);

// log-spaced points in [lo, hi].
std::vector<double> logspace(double lo, double hi, std::size_t count);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace fracdrift
