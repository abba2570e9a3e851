#include "fracdrift/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracdrift/errors.hpp"

namespace fracdrift {

void GridSpec::validate() const {
    if (d != 1 && d != 2) throw ConfigError("grid: d must be 1 or 2, got " + std::to_string(d));
    if (n < 8 || (n & (n - 1)) != 0)
        throw ConfigError("grid: n must be a power of two >= 8, got " + std::to_string(n));
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid: L must be positive and finite");
}

double GridSpec::cell_volume() const {
    const double h = spacing();
    return d == 1 ? h : h * h;
}

std::array<double, 2> GridSpec::wavevector(std::size_t idx) const {
    if (d == 1) return {wavenumber(idx), 0.0};
    return {wavenumber(idx / n), wavenumber(idx % n)};
}

std::size_t GridSpec::mirror_index(std::size_t idx) const {
    auto neg = [this](std::size_t s) { return s == 0 ? 0 : n - s; };
    if (d == 1) return neg(idx);
    return neg(idx / n) * n + neg(idx % n);
}

Field::Field(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
        throw ConfigError("field: " + std::to_string(values.size()) + " samples for a grid of " +
                          std::to_string(grid.size()));
}

void Field::validate() const {
    grid.validate();
    if (values.size() != grid.size()) throw ConfigError("field: length does not match grid");
    for (double v : values)
        if (!std::isfinite(v)) throw ParameterError("field: non-finite sample");
}

Field& Field::operator+=(const Field& o) {
    require_same_grid(grid, o.grid, "field +=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(grid, o.grid, "field -=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

Field& Field::operator*=(double a) {
    for (double& v : values) v *= a;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double lp_norm(std::span<const double> values, const GridSpec& g, double p) {
    if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (p == 1.0) {
        for (double v : values) acc += std::abs(v);
        return acc * g.cell_volume();
    }
    if (p == 2.0) {
        for (double v : values) acc += v * v;
        return std::sqrt(acc * g.cell_volume());
    }
    // Scale by the max to keep large exponents in range.
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    for (double v : values) acc += std::pow(std::abs(v) / m, p);
    return m * std::pow(acc * g.cell_volume(), 1.0 / p);
}

double lp_norm(const Field& f, double p) { return lp_norm(f.values, f.grid, p); }

double integral(const Field& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc * f.grid.cell_volume();
}

double mean(const Field& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc / static_cast<double>(f.values.size());
}

double inner(const Field& a, const Field& b) {
    require_same_grid(a.grid, b.grid, "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
    return acc * a.grid.cell_volume();
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw ConfigError(std::string(what) + ": grid mismatch");
}

}  // namespace fracdrift
