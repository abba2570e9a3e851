#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "fracdrift/simd/dispatch.hpp"

namespace fracdrift::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d wrap(__m256d r, __m256d L, __m256d inv_L) {
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(r, inv_L), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    return _mm256_fnmadd_pd(L, k, r);
}

}  // namespace

void correlate_accumulate(std::span<const double> ext, std::span<const double> w, std::span<double> out) {
    const std::size_t count = out.size();
    const std::size_t m_count = w.size();
    const double* src = ext.data();
    double* dst = out.data();
    std::size_t i = 0;
    for (; i + 16 <= count; i += 16) {
        __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
        for (std::size_t m = 0; m < m_count; ++m) {
            const __m256d wm = _mm256_broadcast_sd(&w[m]);
            const double* p = src + i + m;
            a0 = _mm256_fmadd_pd(wm, _mm256_loadu_pd(p), a0);
            a1 = _mm256_fmadd_pd(wm, _mm256_loadu_pd(p + 4), a1);
            a2 = _mm256_fmadd_pd(wm, _mm256_loadu_pd(p + 8), a2);
            a3 = _mm256_fmadd_pd(wm, _mm256_loadu_pd(p + 12), a3);
        }
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), a0));
        _mm256_storeu_pd(dst + i + 4, _mm256_add_pd(_mm256_loadu_pd(dst + i + 4), a1));
        _mm256_storeu_pd(dst + i + 8, _mm256_add_pd(_mm256_loadu_pd(dst + i + 8), a2));
        _mm256_storeu_pd(dst + i + 12, _mm256_add_pd(_mm256_loadu_pd(dst + i + 12), a3));
    }
    for (; i + 4 <= count; i += 4) {
        __m256d a0 = _mm256_setzero_pd();
        for (std::size_t m = 0; m < m_count; ++m)
            a0 = _mm256_fmadd_pd(_mm256_broadcast_sd(&w[m]), _mm256_loadu_pd(src + i + m), a0);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), a0));
    }
    if (i < count) scalar::correlate_accumulate(ext.subspan(i), w, out.subspan(i));
}

double hilbert_sum(const HilbertTorus& k, double x, std::span<const double> y, std::span<const double> sign) {
    const CotApprox& a = cot_approx();
    const std::size_t count = y.size();
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d vL = _mm256_set1_pd(k.L);
    const __m256d vinvL = _mm256_set1_pd(1.0 / k.L);
    const __m256d vscale = _mm256_set1_pd(std::numbers::pi / k.L);
    const __m256d veps = _mm256_set1_pd(k.eps);
    const __m256d vslope = _mm256_set1_pd(k.taper_slope);
    const __m256d vtw = _mm256_set1_pd(2.0 / a.wmax);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

    // Four independent Clenshaw chains per iteration to hide FMA latency.
    constexpr int kLanes = 4;
    __m256d acc[kLanes] = {_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd()};
    auto block = [&](std::size_t j0, int lanes) {
        __m256d rw[kLanes], z[kLanes], t[kLanes], t2[kLanes], b1[kLanes], b2[kLanes];
        for (int l = 0; l < lanes; ++l) {
            rw[l] = wrap(_mm256_sub_pd(vx, _mm256_loadu_pd(&y[j0 + 4 * l])), vL, vinvL);
            z[l] = _mm256_mul_pd(vscale, rw[l]);
            t[l] = _mm256_fmsub_pd(vtw, _mm256_mul_pd(z[l], z[l]), one);
            t2[l] = _mm256_mul_pd(two, t[l]);
            b1[l] = _mm256_setzero_pd();
            b2[l] = _mm256_setzero_pd();
        }
        for (int c = CotApprox::kTerms - 1; c >= 1; --c) {
            const __m256d cc = _mm256_set1_pd(a.coeffs[c]);
            for (int l = 0; l < lanes; ++l) {
                const __m256d b0 = _mm256_sub_pd(_mm256_fmadd_pd(t2[l], b1[l], cc), b2[l]);
                b2[l] = b1[l];
                b1[l] = b0;
            }
        }
        const __m256d c0 = _mm256_set1_pd(a.coeffs[0]);
        for (int l = 0; l < lanes; ++l) {
            const __m256d q = _mm256_sub_pd(_mm256_fmadd_pd(t[l], b1[l], c0), b2[l]);
            const __m256d far = _mm256_mul_pd(_mm256_fmadd_pd(z[l], q, _mm256_div_pd(one, z[l])), vinvL);
            const __m256d near = _mm256_mul_pd(vslope, rw[l]);
            const __m256d is_near = _mm256_cmp_pd(_mm256_and_pd(rw[l], absmask), veps, _CMP_LT_OQ);
            const __m256d b = _mm256_blendv_pd(far, near, is_near);
            acc[l] = _mm256_fmadd_pd(_mm256_loadu_pd(&sign[j0 + 4 * l]), b, acc[l]);
        }
    };
    std::size_t j = 0;
    for (; j + 4 * kLanes <= count; j += 4 * kLanes) block(j, kLanes);
    for (; j + 4 <= count; j += 4) block(j, 1);
    acc[0] = _mm256_add_pd(_mm256_add_pd(acc[0], acc[1]), _mm256_add_pd(acc[2], acc[3]));
    double total = hsum(acc[0]);
    if (j < count) total += scalar::hilbert_sum(k, x, y.subspan(j), sign.subspan(j));
    return total;
}

std::array<double, 2> riesz2_sum(const RieszTorus2& k, double x1, double x2, std::span<const double> y1,
                                 std::span<const double> y2, std::span<const double> sign) {
    constexpr double c = 0.5 / std::numbers::pi;
    const std::size_t count = y1.size();
    const __m256d vx1 = _mm256_set1_pd(x1);
    const __m256d vx2 = _mm256_set1_pd(x2);
    const __m256d vL = _mm256_set1_pd(k.L);
    const __m256d vinvL = _mm256_set1_pd(1.0 / k.L);
    const __m256d veps2 = _mm256_set1_pd(k.eps * k.eps);
    const __m256d vinv_eps3 = _mm256_set1_pd(1.0 / (k.eps * k.eps * k.eps));
    const __m256d one = _mm256_set1_pd(1.0);

    __m256d s1 = _mm256_setzero_pd(), s2 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= count; j += 4) {
        const __m256d a = wrap(_mm256_sub_pd(vx1, _mm256_loadu_pd(&y1[j])), vL, vinvL);
        const __m256d b = wrap(_mm256_sub_pd(vx2, _mm256_loadu_pd(&y2[j])), vL, vinvL);
        const __m256d rho2 = _mm256_fmadd_pd(a, a, _mm256_mul_pd(b, b));
        const __m256d far = _mm256_div_pd(one, _mm256_mul_pd(rho2, _mm256_sqrt_pd(rho2)));
        const __m256d inv = _mm256_blendv_pd(far, vinv_eps3, _mm256_cmp_pd(rho2, veps2, _CMP_LT_OQ));
        const __m256d sw = _mm256_mul_pd(_mm256_loadu_pd(&sign[j]), inv);
        s1 = _mm256_fmadd_pd(sw, a, s1);
        s2 = _mm256_fmadd_pd(sw, b, s2);
    }
    std::array<double, 2> out{c * hsum(s1), c * hsum(s2)};
    if (j < count) {
        const auto tail = scalar::riesz2_sum(k, x1, x2, y1.subspan(j), y2.subspan(j), sign.subspan(j));
        out[0] += tail[0];
        out[1] += tail[1];
    }
    return out;
}

}  // namespace fracdrift::simd::avx2
