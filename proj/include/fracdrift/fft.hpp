#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fracdrift/grid.hpp"

namespace fracdrift {

// Forward transform is unnormalized (coeffs = sum f e^{-ikx}); the inverse
// divides by n^d, so from_spectral(to_spectral(f)) == f.
SpectralField to_spectral(const Field& f);
Field from_spectral(const SpectralField& F);

// In-place complex transforms on grid-shaped buffers. FFTW plans are cached per
// (d, n, direction) behind a mutex; execution is reentrant.
void fft_forward(const GridSpec& g, std::span<cplx> data);
void fft_inverse(const GridSpec& g, std::span<cplx> data);

using Symbol = std::function<cplx(const std::array<double, 2>& k)>;

/// Tabulates a Fourier multiplier on the grid, Hermitian-symmetrized so that
/// applying it to a real field yields a real field: m(k) <- (m(k) + conj(m(-k)))/2
/// with -k taken mod n. Odd symbols (i k_j, -i sgn k) therefore vanish on the
/// Nyquist modes.
std::vector<cplx> multiplier_table(const GridSpec& g, const Symbol& symbol);

Field apply_multiplier(const Field& f, std::span<const cplx> table);
Field apply_multiplier(const Field& f, const Symbol& symbol);

}  // namespace fracdrift
