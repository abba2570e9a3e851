#include "fracdrift/simd/dispatch.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "fracdrift/errors.hpp"

namespace fracdrift::simd {
namespace {

constexpr int kUnset = -1;
std::atomic<int> g_forced{kUnset};

bool cpu_has_avx2() {
#if defined(FRACDRIFT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("FRACDRIFT_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
        if (v == "neon" && isa_available(Isa::neon)) return Isa::neon;
    }
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

// Q(w) = (cot(z) - 1/z) / z with w = z^2.
double cot_remainder(double w) {
    if (w < 1e-2) {
        // -1/3 - w/45 - 2w^2/945 - w^3/4725 - 2w^4/93555
        return -1.0 / 3.0 - w * (1.0 / 45.0 + w * (2.0 / 945.0 + w * (1.0 / 4725.0 + w * 2.0 / 93555.0)));
    }
    const double z = std::sqrt(w);
    return (std::cos(z) / std::sin(z) - 1.0 / z) / z;
}

CotApprox build_cot() {
    CotApprox a;
    a.wmax = std::numbers::pi * std::numbers::pi / 4.0;
    constexpr int N = 64;  // interpolation nodes; truncated to kTerms coefficients
    std::array<double, N> f{};
    for (int k = 0; k < N; ++k) {
        const double t = std::cos(std::numbers::pi * (k + 0.5) / N);
        f[k] = cot_remainder(0.5 * a.wmax * (t + 1.0));
    }
    for (int j = 0; j < CotApprox::kTerms; ++j) {
        double s = 0.0;
        for (int k = 0; k < N; ++k) s += f[k] * std::cos(std::numbers::pi * j * (k + 0.5) / N);
        a.coeffs[j] = 2.0 * s / N;
    }
    a.coeffs[0] *= 0.5;
    return a;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: {
            static const bool ok = cpu_has_avx2();
            return ok;
        }
        case Isa::neon:
#if defined(FRACDRIFT_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    const int forced = g_forced.load(std::memory_order_relaxed);
    if (forced != kUnset) return static_cast<Isa>(forced);
    static const Isa detected = detect();
    return detected;
}

void set_isa(Isa isa) {
    if (!isa_available(isa)) throw UnsupportedError("simd: ISA not available: " + std::string(isa_name(isa)));
    g_forced.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void reset_isa() { g_forced.store(kUnset, std::memory_order_relaxed); }

const CotApprox& cot_approx() {
    static const CotApprox a = build_cot();
    return a;
}

double cot_reference(double z) {
    const CotApprox& a = cot_approx();
    const double w = z * z;
    const double t = 2.0 * w / a.wmax - 1.0;
    double b1 = 0.0, b2 = 0.0;
    for (int j = CotApprox::kTerms - 1; j >= 1; --j) {
        const double b0 = a.coeffs[j] + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    const double q = a.coeffs[0] + t * b1 - b2;
    return 1.0 / z + z * q;
}

HilbertTorus HilbertTorus::make(double L, double eps) {
    if (!(L > 0.0)) throw ParameterError("hilbert kernel: L must be positive");
    if (!(eps > 0.0) || eps >= 0.5 * L) throw ParameterError("hilbert kernel: eps must lie in (0, L/2)");
    HilbertTorus k{L, eps, 0.0};
    k.taper_slope = cot_reference(std::numbers::pi * eps / L) / L / eps;
    return k;
}

double HilbertTorus::operator()(double r) const {
    const double rw = r - L * std::nearbyint(r / L);
    if (std::abs(rw) < eps) return taper_slope * rw;
    return cot_reference(std::numbers::pi * rw / L) / L;
}

RieszTorus2 RieszTorus2::make(double L, double eps) {
    if (!(L > 0.0)) throw ParameterError("riesz kernel: L must be positive");
    if (!(eps > 0.0) || eps >= 0.5 * L) throw ParameterError("riesz kernel: eps must lie in (0, L/2)");
    return RieszTorus2{L, eps};
}

std::array<double, 2> RieszTorus2::operator()(double r1, double r2) const {
    constexpr double c = 0.5 / std::numbers::pi;
    const double a = r1 - L * std::nearbyint(r1 / L);
    const double b = r2 - L * std::nearbyint(r2 / L);
    const double rho2 = a * a + b * b;
    const double inv = rho2 < eps * eps ? 1.0 / (eps * eps * eps) : 1.0 / (rho2 * std::sqrt(rho2));
    return {c * a * inv, c * b * inv};
}

void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out) {
    switch (active_isa()) {
#if defined(FRACDRIFT_HAVE_AVX2)
        case Isa::avx2: return avx2::correlate_accumulate(ext, w, out);
#endif
#if defined(FRACDRIFT_HAVE_NEON)
        case Isa::neon: return neon::correlate_accumulate(ext, w, out);
#endif
        default: return scalar::correlate_accumulate(ext, w, out);
    }
}

double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign) {
    switch (active_isa()) {
#if defined(FRACDRIFT_HAVE_AVX2)
        case Isa::avx2: return avx2::hilbert_sum(k, x, y, sign);
#endif
#if defined(FRACDRIFT_HAVE_NEON)
        case Isa::neon: return neon::hilbert_sum(k, x, y, sign);
#endif
        default: return scalar::hilbert_sum(k, x, y, sign);
    }
}

std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign) {
    switch (active_isa()) {
#if defined(FRACDRIFT_HAVE_AVX2)
        case Isa::avx2: return avx2::riesz2_sum(k, x1, x2, y1, y2, sign);
#endif
#if defined(FRACDRIFT_HAVE_NEON)
        case Isa::neon: return neon::riesz2_sum(k, x1, x2, y1, y2, sign);
#endif
        default: return scalar::riesz2_sum(k, x1, x2, y1, y2, sign);
    }
}

}  // namespace fracdrift::simd
