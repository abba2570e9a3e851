#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "fracdrift/expr.hpp"
#include "fracdrift/fft.hpp"
#include "fracdrift/grid.hpp"
#include "fracdrift/random.hpp"

namespace fracdrift {

/// Convolution-type kernel given by its Fourier multiplier(s). Scalar kernels
/// carry one symbol; the 2-d Riesz pair carries one per axis.
struct MultiplierKernel {
    std::string name;
    int d = 1;
    std::vector<Symbol> components;
    double delta = 1.0;  // regularity exponent of the associated kernel
};

/// Kernel evaluated pointwise, b(x, y), on a torus of side L. Returns one value
/// for scalar kernels or d values for vector kernels. Evaluated only at x != y.
struct PointwiseKernel {
    using Eval = std::function<std::array<double, 2>(const std::array<double, 2>& x, const std::array<double, 2>& y)>;
    std::string name;
    int d = 1;
    int components = 1;
    double L = 0.0;
    Eval b;
    double C = 1.0;      // size constant in |b| <= C / |x - y|^d
    double delta = 1.0;  // regularity exponent
    bool experimental = false;
};

class CZKernel {
public:
    CZKernel() = default;
    explicit CZKernel(MultiplierKernel m) : form_(std::move(m)) {}
    explicit CZKernel(PointwiseKernel p) : form_(std::move(p)) {}

    bool is_multiplier() const { return std::holds_alternative<MultiplierKernel>(form_); }
    const MultiplierKernel& multiplier() const;
    const PointwiseKernel& pointwise() const;

    const std::string& name() const;
    int dim() const;
    int components() const;
    double delta() const;

private:
    std::variant<MultiplierKernel, PointwiseKernel> form_;
};

// Built-in kernels. Every multiplier entry has m(0) = 0 and |m| <= 1.
namespace catalog {
CZKernel zero(int d);
CZKernel hilbert();                       // -i sgn(k), d = 1
CZKernel riesz(int j, int d);             // -i k_j / |k|, j in {1, .., d}
CZKernel riesz_pair();                    // (R_1, R_2), d = 2
CZKernel smooth_h0(const std::string& expr, int d);  // expr in the unit direction u1, u2
// Periodized pointwise kernels on a torus of side L.
CZKernel pointwise_hilbert(double L);          // cot(pi r / L) / L
CZKernel pointwise_riesz(int j, double L);     // nearest image, r_j / (2 pi |r|^3)
CZKernel pointwise_riesz_pair(double L);
}  // namespace catalog

/// Parses hilbert | riesz | riesz:j | zero | smooth_h0:<expr> | pointwise:hilbert |
/// pointwise:riesz | pointwise:riesz:j. Throws ConfigError on unknown names.
CZKernel parse_kernel(const std::string& spec, int d, double L);

// Symmetrized multiplier table of scalar component c.
std::vector<cplx> kernel_table(const CZKernel& k, const GridSpec& g, int component = 0);
// sup over grid modes of |m(k)| (largest across components).
double multiplier_sup(const CZKernel& k, const GridSpec& g);

/// F^{-1}(m F f) for a scalar multiplier kernel. Pointwise kernels throw
/// UnsupportedError (use cz_apply_pv).
Field cz_apply(const CZKernel& k, const Field& f);
// All components of a multiplier kernel.
VectorField cz_apply_vector(const CZKernel& k, const Field& f);

/// Principal-value quadrature for pointwise kernels: far field sum over
/// |x - y| > eps of b f(y) dV, near field sum over 0 < |x - y| <= eps of
/// b (f(y) - f(x)) dV. Distances use the nearest periodic image. Requires
/// eps >= grid spacing. Returns one field per kernel component.
VectorField cz_apply_pv(const CZKernel& k, const Field& f, double eps);

/// Lower bound on the L^p operator norm: max over random band-limited fields
/// of ||K f||_p / ||f||_p. Pointwise kernels go through cz_apply_pv with
/// eps = grid spacing.
double operator_norm_probe(const CZKernel& k, const GridSpec& g, double p, int trials, std::uint64_t seed);

// max over grid pairs with periodic distance in (0, L/4] of |f(x) - f(y)| / |x - y|^eps.
double holder_seminorm(const Field& f, double eps);

/// max over random smooth fields of holder_seminorm(K f) / holder_seminorm(f).
double lipschitz_probe(const CZKernel& k, const GridSpec& g, double eps_holder, int trials, std::uint64_t seed);

struct CZConditionReport {
    std::size_t pairs = 0;
    double size_ratio = 0.0;     // max |b| |x - y|^d / C
    double x_smooth_ratio = 0.0; // max of the x-regularity ratio / C
    double y_smooth_ratio = 0.0;
    bool holds() const { return size_ratio <= 1.0 && x_smooth_ratio <= 1.0 && y_smooth_ratio <= 1.0; }
};

/// Checks the size and both regularity conditions, as
///   |b(x,y) - b(x',y)| <= C |x - x'| / (|x - y| + |x' - y|)^delta  when |x - x'| <= max(|x - y|, |x' - y|)/2,
/// and the analogous y condition, on random pairs inside the torus cell.
CZConditionReport validate_cz_conditions(const CZKernel& k, std::size_t pairs, std::uint64_t seed);

// Random real band-limited field with modes |k_i| <= kmax; mean removed.
Field random_bandlimited(const GridSpec& g, std::size_t kmax, Rng& rng);

}  // namespace fracdrift
