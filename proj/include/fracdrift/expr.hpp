#pragma once

#include <complex>
#include <memory>
#include <string>
#include <string_view>

namespace fracdrift {

/// Small complex-valued expression language for user-supplied multipliers.
///
///   numbers, pi, i (imaginary unit), variables u1 u2 (unit wavevector components),
///   + - * / ^, parentheses, and sin cos exp sqrt abs sgn re im conj.
///
/// Parsing throws ConfigError with the offending column.
class Expression {
public:
    static Expression parse(std::string_view text);

    std::complex<double> eval(double u1, double u2) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace fracdrift
