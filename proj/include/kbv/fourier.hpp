#pragma once

// Real-to-complex discrete Fourier transforms on a GridSpec, backed by FFTW.
// Half-spectrum layout: ny rows of (nx/2 + 1) complex coefficients.

#include <complex>
#include <functional>
#include <vector>

#include "kbv/grid.hpp"

namespace kbv::fourier {

using Spectrum = std::vector<std::complex<double>>;

std::size_t spectrum_size(const GridSpec& g) noexcept;

/// Signed integer frequency index of half-spectrum row ly (in [-ny/2, ny/2]).
int signed_row_frequency(const GridSpec& g, int ly) noexcept;

Spectrum forward(const ScalarField& u);
/// Normalized inverse; the result is real by construction of the c2r transform.
ScalarField inverse(const GridSpec& g, Spectrum spectrum);

/// Fills one real value per half-spectrum coefficient from (kx, ky) integer frequencies.
std::vector<double> tabulate(const GridSpec& g, const std::function<double(int, int)>& symbol);

/// Pointwise multiply by a real half-spectrum symbol and transform back.
ScalarField apply_symbol(const ScalarField& u, const std::vector<double>& symbol);

/// Eigenvalues of divergence(gradient(.)) at unit spacing on the half spectrum:
/// -4 (sin^2(pi kx/nx) + sin^2(pi ky/ny)). Divide by h^2 for the physical operator.
const std::vector<double>& unit_laplacian_symbol(const GridSpec& g);

/// Mean-zero solution of divergence(gradient(x)) = rhs - mean(rhs).
ScalarField solve_poisson(const ScalarField& rhs);

}  // namespace kbv::fourier
