#include <cmath>
#include <numbers>

#include "fracdrift/simd/dispatch.hpp"

namespace fracdrift::simd::scalar {

void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out) {
    const std::size_t m_count = w.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) acc += w[m] * ext[i + m];
        out[i] += acc;
    }
}

double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign) {
    const CotApprox& a = cot_approx();
    const double inv_L = 1.0 / k.L;
    const double scale = std::numbers::pi * inv_L;
    double acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double r = x - y[j];
        const double rw = r - k.L * std::nearbyint(r * inv_L);
        double b;
        if (std::abs(rw) < k.eps) {
            b = k.taper_slope * rw;
        } else {
            const double z = scale * rw;
            const double t = 2.0 * z * z / a.wmax - 1.0;
            double b1 = 0.0, b2 = 0.0;
            for (int c = CotApprox::kTerms - 1; c >= 1; --c) {
                const double b0 = a.coeffs[c] + 2.0 * t * b1 - b2;
                b2 = b1;
                b1 = b0;
            }
            const double q = a.coeffs[0] + t * b1 - b2;
            b = (1.0 / z + z * q) * inv_L;
        }
        acc += sign[j] * b;
    }
    return acc;
}

std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign) {
    constexpr double c = 0.5 / std::numbers::pi;
    const double inv_L = 1.0 / k.L;
    const double eps2 = k.eps * k.eps;
    const double inv_eps3 = 1.0 / (eps2 * k.eps);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < y1.size(); ++j) {
        double a = x1 - y1[j];
        double b = x2 - y2[j];
        a -= k.L * std::nearbyint(a * inv_L);
        b -= k.L * std::nearbyint(b * inv_L);
        const double rho2 = a * a + b * b;
        const double inv = rho2 < eps2 ? inv_eps3 : 1.0 / (rho2 * std::sqrt(rho2));
        s1 += sign[j] * a * inv;
        s2 += sign[j] * b * inv;
    }
    return {c * s1, c * s2};
}

}  // namespace fracdrift::simd::scalar
