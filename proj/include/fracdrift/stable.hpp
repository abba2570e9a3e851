#pragma once

namespace fracdrift {

/// Stability index of the driving noise / order of the fractional Laplacian.
/// alpha in (1, 2); alpha = 2 is accepted as the Gaussian validation mode.
struct StableParams {
    double alpha = 1.5;
    // Normalization of the jump-integral form, such that
    //   K \int (v(x+y) - v(x) - grad v . y 1_{|y|<=1}) |y|^{-d-alpha} dy = -|k|^alpha v
    // on plane waves. Zero at alpha = 2, where the jump form degenerates.
    double K_norm = 0.0;
    int d = 1;

    static StableParams make(double alpha, int d);
    void validate() const;
};

// C_{d,alpha} = alpha 2^{alpha-1} Gamma((d+alpha)/2) / (pi^{d/2} Gamma(1 - alpha/2)).
double jump_constant(double alpha, int d);

}  // namespace fracdrift
