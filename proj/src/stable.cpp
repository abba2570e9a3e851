#include "fracdrift/stable.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracdrift/errors.hpp"

namespace fracdrift {

double jump_constant(double alpha, int d) {
    if (alpha >= 2.0) return 0.0;
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (d + alpha)) /
           (std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(1.0 - 0.5 * alpha));
}

StableParams StableParams::make(double alpha, int d) {
    StableParams s{alpha, 0.0, d};
    s.validate();
    s.K_norm = jump_constant(alpha, d);
    return s;
}

void StableParams::validate() const {
    if (!(alpha > 1.0 && alpha <= 2.0))
        throw ParameterError("alpha must lie in (1, 2], got " + std::to_string(alpha));
    if (d != 1 && d != 2) throw ParameterError("stable params: d must be 1 or 2");
}

}  // namespace fracdrift
