#include "kbv/kernels.hpp"

#include <cmath>
#include <numbers>

#include "kbv/fourier.hpp"

namespace kbv {

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gauss" || name == "gaussian") return KernelFamily::Gaussian;
  if (name == "poisson") return KernelFamily::Poisson;
  if (name == "id" || name == "identity") return KernelFamily::Identity;
  throw Error(ErrorKind::InvalidArgument, "unknown kernel family '" + std::string(name) + "'");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gauss";
    case KernelFamily::Poisson: return "poisson";
    case KernelFamily::Identity: return "id";
  }
  return "id";
}

SpectralKernel::SpectralKernel(GridSpec grid, KernelSpec spec, std::vector<double> multiplier)
    : grid_(grid), spec_(spec), multiplier_(std::move(multiplier)) {}

SpectralKernel build_multiplier(const KernelSpec& spec, const GridSpec& grid) {
  grid.validate();
  if (!std::isfinite(spec.t) || spec.t < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "kernel scale t must be finite and >= 0");
  }
  const double lx = grid.width();
  const double ly = grid.height();
  const double t = spec.t;
  std::vector<double> m;
  switch (spec.is_identity() ? KernelFamily::Identity : spec.family) {
    case KernelFamily::Identity:
      m.assign(fourier::spectrum_size(grid), 1.0);
      break;
    case KernelFamily::Gaussian:
      m = fourier::tabulate(grid, [&](int kx, int ky) {
        const double xi2 = (kx / lx) * (kx / lx) + (ky / ly) * (ky / ly);
        return std::exp(-std::numbers::pi * t * xi2);
      });
      break;
    case KernelFamily::Poisson:
      m = fourier::tabulate(grid, [&](int kx, int ky) {
        const double xi = std::hypot(kx / lx, ky / ly);
        return std::exp(-std::numbers::pi * t * xi);
      });
      break;
  }
  return SpectralKernel(grid, spec, std::move(m));
}

ScalarField convolve(const SpectralKernel& kernel, const ScalarField& u) {
  require_same_grid(kernel.grid(), u.grid(), "convolve");
  if (kernel.is_identity()) return u;
  return fourier::apply_symbol(u, kernel.multiplier());
}

std::vector<double> l1_smoothing_curve(const ScalarField& f, KernelFamily family,
                                       const std::vector<double>& t_list) {
  std::vector<double> out;
  out.reserve(t_list.size());
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    if (t_list[k] < 0.0 || (k > 0 && !(t_list[k] > t_list[k - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "t_list must be nonnegative and strictly increasing");
    }
  }
  for (double t : t_list) {
    const SpectralKernel k = build_multiplier({family, t}, f.grid());
    out.push_back(lp_norm(convolve(k, f), 1));
  }
  return out;
}

ScalarField spatial_kernel(const SpectralKernel& kernel) {
  const GridSpec& g = kernel.grid();
  fourier::Spectrum s(kernel.multiplier().begin(), kernel.multiplier().end());
  ScalarField k = fourier::inverse(g, std::move(s));
  k *= 1.0 / g.cell_area();
  return k;
}

double kernel_lp_norm(const SpectralKernel& kernel, int p) {
  return lp_norm(spatial_kernel(kernel), p);
}

}  // namespace kbv
