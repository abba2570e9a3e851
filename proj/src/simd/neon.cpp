#include <arm_neon.h>

#include <cmath>
#include <numbers>

#include "fracdrift/simd/dispatch.hpp"

namespace fracdrift::simd::neon {
namespace {

inline float64x2_t wrap(float64x2_t r, float64x2_t L, float64x2_t inv_L) {
    return vfmsq_f64(r, L, vrndnq_f64(vmulq_f64(r, inv_L)));
}

}  // namespace

void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out) {
    const std::size_t count = out.size();
    const double* src = ext.data();
    double* dst = out.data();
    std::size_t i = 0;
    for (; i + 8 <= count; i += 8) {
        float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
        float64x2_t a2 = vdupq_n_f64(0.0), a3 = vdupq_n_f64(0.0);
        for (std::size_t m = 0; m < w.size(); ++m) {
            const float64x2_t wm = vdupq_n_f64(w[m]);
            const double* p = src + i + m;
            a0 = vfmaq_f64(a0, wm, vld1q_f64(p));
            a1 = vfmaq_f64(a1, wm, vld1q_f64(p + 2));
            a2 = vfmaq_f64(a2, wm, vld1q_f64(p + 4));
            a3 = vfmaq_f64(a3, wm, vld1q_f64(p + 6));
        }
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), a0));
        vst1q_f64(dst + i + 2, vaddq_f64(vld1q_f64(dst + i + 2), a1));
        vst1q_f64(dst + i + 4, vaddq_f64(vld1q_f64(dst + i + 4), a2));
        vst1q_f64(dst + i + 6, vaddq_f64(vld1q_f64(dst + i + 6), a3));
    }
    if (i < count) scalar::correlate_accumulate(ext.subspan(i), w, out.subspan(i));
}

double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign) {
    const CotApprox& a = cot_approx();
    const std::size_t count = y.size();
    const float64x2_t vx = vdupq_n_f64(x);
    const float64x2_t vL = vdupq_n_f64(k.L);
    const float64x2_t vinvL = vdupq_n_f64(1.0 / k.L);
    const float64x2_t vscale = vdupq_n_f64(std::numbers::pi / k.L);
    const float64x2_t veps = vdupq_n_f64(k.eps);
    const float64x2_t vslope = vdupq_n_f64(k.taper_slope);
    const float64x2_t vtw = vdupq_n_f64(2.0 / a.wmax);
    const float64x2_t one = vdupq_n_f64(1.0);

    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= count; j += 2) {
        const float64x2_t rw = wrap(vsubq_f64(vx, vld1q_f64(&y[j])), vL, vinvL);
        const float64x2_t z = vmulq_f64(vscale, rw);
        const float64x2_t t = vsubq_f64(vmulq_f64(vtw, vmulq_f64(z, z)), one);
        const float64x2_t t2 = vaddq_f64(t, t);
        float64x2_t b1 = vdupq_n_f64(0.0), b2 = vdupq_n_f64(0.0);
        for (int c = CotApprox::kTerms - 1; c >= 1; --c) {
            const float64x2_t b0 = vsubq_f64(vfmaq_f64(vdupq_n_f64(a.coeffs[c]), t2, b1), b2);
            b2 = b1;
            b1 = b0;
        }
        const float64x2_t q = vsubq_f64(vfmaq_f64(vdupq_n_f64(a.coeffs[0]), t, b1), b2);
        const float64x2_t far = vmulq_f64(vfmaq_f64(vdivq_f64(one, z), z, q), vinvL);
        const float64x2_t near = vmulq_f64(vslope, rw);
        const uint64x2_t is_near = vcltq_f64(vabsq_f64(rw), veps);
        acc = vfmaq_f64(acc, vld1q_f64(&sign[j]), vbslq_f64(is_near, near, far));
    }
    double total = vaddvq_f64(acc);
    if (j < count) total += scalar::hilbert_sum(k, x, y.subspan(j), sign.subspan(j));
    return total;
}

std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign) {
    constexpr double c = 0.5 / std::numbers::pi;
    const std::size_t count = y1.size();
    const float64x2_t vx1 = vdupq_n_f64(x1);
    const float64x2_t vx2 = vdupq_n_f64(x2);
    const float64x2_t vL = vdupq_n_f64(k.L);
    const float64x2_t vinvL = vdupq_n_f64(1.0 / k.L);
    const float64x2_t veps2 = vdupq_n_f64(k.eps * k.eps);
    const float64x2_t vinv_eps3 = vdupq_n_f64(1.0 / (k.eps * k.eps * k.eps));
    const float64x2_t one = vdupq_n_f64(1.0);

    float64x2_t s1 = vdupq_n_f64(0.0), s2 = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= count; j += 2) {
        const float64x2_t a = wrap(vsubq_f64(vx1, vld1q_f64(&y1[j])), vL, vinvL);
        const float64x2_t b = wrap(vsubq_f64(vx2, vld1q_f64(&y2[j])), vL, vinvL);
        const float64x2_t rho2 = vfmaq_f64(vmulq_f64(b, b), a, a);
        const float64x2_t far = vdivq_f64(one, vmulq_f64(rho2, vsqrtq_f64(rho2)));
        const float64x2_t inv = vbslq_f64(vcltq_f64(rho2, veps2), vinv_eps3, far);
        const float64x2_t sw = vmulq_f64(vld1q_f64(&sign[j]), inv);
        s1 = vfmaq_f64(s1, sw, a);
        s2 = vfmaq_f64(s2, sw, b);
    }
    std::array<double, 2> out{c * vaddvq_f64(s1), c * vaddvq_f64(s2)};
    if (j < count) {
        const auto tail = scalar::riesz2_sum(k, x1, x2, y1.subspan(j), y2.subspan(j), sign.subspan(j));
        out[0] += tail[0];
        out[1] += tail[1];
    }
    return out;
}

}  // namespace fracdrift::simd::neon
