#pragma once

// Smoothing kernels realized by their Fourier multipliers on the torus.
//
//   Gaussian  K^(xi) = exp(-pi t |xi|^2)
//   Poisson   K^(xi) = exp(-pi t |xi|)
//   Identity  K^(xi) = 1
//
// with xi = (kx / (nx h), ky / (ny h)). Sampling the continuum multiplier
// (rather than the kernel in space) keeps the multiplier strictly positive
// and makes the semigroup K_s * K_t = K_{s+t} exact to round-off.

#include <string>
#include <string_view>
#include <vector>

#include "kbv/grid.hpp"

namespace kbv {

enum class KernelFamily { Gaussian, Poisson, Identity };

KernelFamily parse_kernel_family(std::string_view name);
std::string to_string(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::Identity;
  double t = 0.0;

  /// Identity, or a zero scale, means no smoothing.
  bool is_identity() const noexcept { return family == KernelFamily::Identity || t == 0.0; }
};

class SpectralKernel {
 public:
  SpectralKernel(GridSpec grid, KernelSpec spec, std::vector<double> multiplier);

  const GridSpec& grid() const noexcept { return grid_; }
  const KernelSpec& spec() const noexcept { return spec_; }
  const std::vector<double>& multiplier() const noexcept { return multiplier_; }
  bool is_identity() const noexcept { return spec_.is_identity(); }

 private:
  GridSpec grid_;
  KernelSpec spec_;
  std::vector<double> multiplier_;
};

/// Rejects t < 0 (and non-finite t).
SpectralKernel build_multiplier(const KernelSpec& spec, const GridSpec& grid);

/// K * u. Throws GridMismatch if the kernel was built for another grid.
ScalarField convolve(const SpectralKernel& kernel, const ScalarField& u);

/// ||K_t * f||_1 for each t in t_list (strictly increasing, >= 0).
std::vector<double> l1_smoothing_curve(const ScalarField& f, KernelFamily family,
                                       const std::vector<double>& t_list);

/// The periodized kernel in space, normalized so that (K*u)(x) = sum_y h^2 K(x - y) u(y).
/// Entry (0, 0) holds K at the origin offset.
ScalarField spatial_kernel(const SpectralKernel& kernel);

/// ||K||_p of the spatial kernel (p in {1, 2}).
double kernel_lp_norm(const SpectralKernel& kernel, int p);

}  // namespace kbv
