#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace fracdrift {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform periodic grid on the torus [0, L)^d, d in {1, 2}, n points per axis
/// (power of two, n >= 8). Point j sits at x_j = j L / n; FFT slot j carries the
/// signed frequency index in [-n/2, n/2) and wavenumber 2 pi k / L.
struct GridSpec {
    int d = 1;
    std::size_t n = 256;
    double L = 2.0 * std::numbers::pi;

    void validate() const;

    std::size_t size() const { return d == 1 ? n : n * n; }
    double spacing() const { return L / static_cast<double>(n); }
    double cell_volume() const;
    double coord(std::size_t j) const { return static_cast<double>(j) * spacing(); }

    long freq_index(std::size_t slot) const {
        const long s = static_cast<long>(slot);
        const long half = static_cast<long>(n / 2);
        return s < half ? s : s - static_cast<long>(n);
    }
    double wavenumber(std::size_t slot) const {
        return 2.0 * std::numbers::pi * static_cast<double>(freq_index(slot)) / L;
    }
    bool is_nyquist(std::size_t slot) const { return slot == n / 2; }

    // Wavevector of flat spectral index `idx` (row-major, axis 0 slowest).
    std::array<double, 2> wavevector(std::size_t idx) const;
    // Flat index of the mode -k (mod n on every axis).
    std::size_t mirror_index(std::size_t idx) const;

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.d == b.d && a.n == b.n && a.L == b.L;
    }
};

/// Real samples of a scalar field on a grid, row-major (axis 0 slowest).
struct Field {
    GridSpec grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const GridSpec& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    Field(const GridSpec& g, std::vector<double> v);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    // Throws ConfigError on length mismatch, ParameterError on NaN/Inf.
    void validate() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double a);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

using VectorField = std::vector<Field>;

/// Complex coefficients indexed like the grid (FFT ordering per axis).
struct SpectralField {
    GridSpec grid;
    std::vector<cplx> coeffs;
};

// Samples f(x) (d = 1) or f(x1, x2) (d = 2) at the grid points.
template <class Fn>
Field sample(const GridSpec& g, Fn&& fn) {
    Field f(g);
    if (g.d == 1) {
        for (std::size_t i = 0; i < g.n; ++i) f[i] = fn(std::array<double, 2>{g.coord(i), 0.0});
    } else {
        for (std::size_t i = 0; i < g.n; ++i)
            for (std::size_t j = 0; j < g.n; ++j)
                f[i * g.n + j] = fn(std::array<double, 2>{g.coord(i), g.coord(j)});
    }
    return f;
}

// L^p norm with Riemann-sum cell volume; p = kInf gives the grid max.
double lp_norm(const Field& f, double p);
double lp_norm(std::span<const double> values, const GridSpec& g, double p);
double integral(const Field& f);
double mean(const Field& f);
// Riemann-sum inner product.
double inner(const Field& a, const Field& b);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace fracdrift
