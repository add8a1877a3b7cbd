#include "kbv/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

namespace kbv::fourier {
namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  std::vector<double> laplacian;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

// Plan creation is not thread safe in FFTW; execution on fresh arrays is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

Plans& plans_for(const GridSpec& g) {
  static std::map<std::pair<int, int>, std::unique_ptr<Plans>> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto& slot = cache[{g.nx, g.ny}];
  if (!slot) {
    auto p = std::make_unique<Plans>();
    std::vector<double> real(g.size());
    std::vector<std::complex<double>> cplx(spectrum_size(g));
    auto* out = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p->r2c = fftw_plan_dft_r2c_2d(g.ny, g.nx, real.data(), out, flags);
    p->c2r = fftw_plan_dft_c2r_2d(g.ny, g.nx, out, real.data(), flags);
    slot = std::move(p);
  }
  return *slot;
}

}  // namespace

std::size_t spectrum_size(const GridSpec& g) noexcept {
  return static_cast<std::size_t>(g.ny) * (g.nx / 2 + 1);
}

int signed_row_frequency(const GridSpec& g, int ly) noexcept {
  return (ly <= g.ny / 2) ? ly : ly - g.ny;
}

Spectrum forward(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const Plans& p = plans_for(g);
  std::vector<double> in(u.values().begin(), u.values().end());
  Spectrum out(spectrum_size(g));
  fftw_execute_dft_r2c(p.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

ScalarField inverse(const GridSpec& g, Spectrum spectrum) {
  const Plans& p = plans_for(g);
  std::vector<double> out(g.size());
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (double& v : out) v *= scale;
  return ScalarField(g, std::move(out));
}

std::vector<double> tabulate(const GridSpec& g, const std::function<double(int, int)>& symbol) {
  const int half = g.nx / 2 + 1;
  std::vector<double> out(spectrum_size(g));
  for (int ly = 0; ly < g.ny; ++ly) {
    const int ky = signed_row_frequency(g, ly);
    for (int kx = 0; kx < half; ++kx) {
      out[static_cast<std::size_t>(ly) * half + kx] = symbol(kx, ky);
    }
  }
  return out;
}

ScalarField apply_symbol(const ScalarField& u, const std::vector<double>& symbol) {
  Spectrum s = forward(u);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= symbol[k];
  return inverse(u.grid(), std::move(s));
}

const std::vector<double>& unit_laplacian_symbol(const GridSpec& g) {
  Plans& p = plans_for(g);
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto& lap = p.laplacian;
  if (lap.empty()) {
    lap = tabulate(g, [&](int kx, int ky) {
      const double sx = std::sin(std::numbers::pi * kx / g.nx);
      const double sy = std::sin(std::numbers::pi * ky / g.ny);
      return -4.0 * (sx * sx + sy * sy);
    });
  }
  return lap;
}

ScalarField solve_poisson(const ScalarField& rhs) {
  const GridSpec& g = rhs.grid();
  const auto& lap = unit_laplacian_symbol(g);
  const double h2 = g.h * g.h;
  Spectrum s = forward(rhs);
  s[0] = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) s[k] *= h2 / lap[k];
  return inverse(g, std::move(s));
}

}  // namespace kbv::fourier
