#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// intrinsics variants (AVX2+FMA on x86-64, NEON on aarch64) chosen at runtime.
// The scalar path is the numerical reference; every variant is tested against it.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace fracdrift::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

// Best available ISA, unless FRACDRIFT_SIMD=scalar|avx2|neon overrides it.
Isa active_isa();
// Forces an ISA for the current process (tests, benchmarking). Throws
// UnsupportedError when the CPU or the build lacks it.
void set_isa(Isa isa);
void reset_isa();

/// cot(z) = 1/z + z Q(z^2) on |z| <= pi/2, Q as a Chebyshev series in z^2.
struct CotApprox {
    static constexpr int kTerms = 20;
    std::array<double, kTerms> coeffs{};  // coeffs[0] already halved
    double wmax = 0.0;                    // (pi/2)^2
};
const CotApprox& cot_approx();
double cot_reference(double z);  // same expansion, scalar

/// Periodized Hilbert kernel on a torus of side L, b(r) = cot(pi r / L) / L,
/// linearly tapered through zero for |r| < eps.
struct HilbertTorus {
    double L = 0.0;
    double eps = 0.0;
    double taper_slope = 0.0;  // b(eps) / eps
    static HilbertTorus make(double L, double eps);
    double operator()(double r) const;
};

/// Nearest-image 2-d Riesz pair kernel c r / |r|^3, c = 1/(2 pi), tapered as
/// c r / eps^3 inside |r| < eps.
struct RieszTorus2 {
    double L = 0.0;
    double eps = 0.0;
    static RieszTorus2 make(double L, double eps);
    std::array<double, 2> operator()(double r1, double r2) const;
};

// out[i] += sum_{m < w.size()} w[m] * ext[i + m], i in [0, out.size()).
// ext must hold out.size() + w.size() - 1 values.
void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out);

// sum_j sign[j] * b(x - y[j]) over the given sources.
double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign);

// Component-wise sum_j sign[j] * b(x - y_j).
std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign);

// Per-ISA entry points, exposed for equivalence tests.
namespace scalar {
void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out);
double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign);
std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign);
}  // namespace scalar

#if defined(FRACDRIFT_HAVE_AVX2)
namespace avx2 {
void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out);
double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign);
std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign);
}  // namespace avx2
#endif

#if defined(FRACDRIFT_HAVE_NEON)
namespace neon {
void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out);
double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign);
std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign);
}  // namespace neon
#endif

}  // namespace fracdrift::simd
