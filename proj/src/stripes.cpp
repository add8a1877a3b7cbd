#include <algorithm>
#include <cmath>

#include "kbv/experiments.hpp"

namespace kbv {
namespace {

constexpr double kMaxSlope = 1e3;

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

double wrap_into(double z, double period) { return z - period * std::floor(z / period + 0.5); }

// +1 on x mod 2 in [0, 1), -1 on [1, 2).
double stripe_sign(double x) {
  const double m = x - 2.0 * std::floor(0.5 * x);
  return m < 1.0 ? 1.0 : -1.0;
}

// Periodic linear interpolation of a row sampled at cell centers.
struct RowInterpolant {
  std::vector<double> values;
  GridSpec grid;
  double operator()(double x) const {
    const double s = (x + 0.5 * grid.width()) / grid.h - 0.5;
    const double fl = std::floor(s);
    const double w = s - fl;
    const int n = grid.nx;
    const int i0 = ((static_cast<int>(fl) % n) + n) % n;
    const int i1 = (i0 + 1) % n;
    return (1.0 - w) * values[i0] + w * values[i1];
  }
};

}  // namespace

std::vector<std::pair<double, double>> integrate_level_curve(const std::function<double(double)>& U, double x0,
                                                             double y0, double yp0, double x1, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "ODE step must be positive");
  const int n = static_cast<int>(std::ceil(std::abs(x1 - x0) / step - 1e-9));
  std::vector<std::pair<double, double>> out{{x0, y0}};
  if (n == 0) return out;
  const double dx = (x1 - x0) / n;
  auto rhs = [&](double x, double p) { return U(x) * std::pow(1.0 + p * p, 1.5); };
  double y = y0, p = yp0;
  for (int k = 0; k < n; ++k) {
    const double x = x0 + k * dx;
    const double k1y = p, k1p = rhs(x, p);
    const double k2y = p + 0.5 * dx * k1p, k2p = rhs(x + 0.5 * dx, p + 0.5 * dx * k1p);
    const double k3y = p + 0.5 * dx * k2p, k3p = rhs(x + 0.5 * dx, p + 0.5 * dx * k2p);
    const double k4y = p + dx * k3p, k4p = rhs(x + dx, p + dx * k3p);
    y += dx / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    p += dx / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    if (!std::isfinite(p) || !std::isfinite(y) || std::abs(p) > kMaxSlope) {
      throw Error(ErrorKind::OdeBlowup, "level curve slope exceeded 1e3 at x = " + std::to_string(x + dx));
    }
    out.emplace_back(x0 + (k + 1) * dx, y);
  }
  return out;
}

StripeCase stripe_example(const ProblemParams& params, const GridSpec& grid, const StripeInitial& init,
                          const StripeOptions& options, const SolverConfig& config) {
  grid.validate();
  if (params.p != 1 || params.q != 1) throw Error(ErrorKind::InvalidArgument, "stripe example needs p = q = 1");
  if (grid.width() < 4.0 - 1e-9 || !is_integer(grid.width() / 2.0) || !is_integer(1.0 / grid.h)) {
    throw Error(ErrorKind::InvalidArgument,
                "stripe grid needs width a multiple of 2 (at least 4) and stripe edges on cell edges");
  }
  if (!(options.ramp > 0.0) || options.offset < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "stripe ramp must be positive and offset nonnegative");
  }

  StripeCase sc;
  sc.J = ScalarField(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) sc.J(i, j) = stripe_sign(grid.x_center(i));
  }
  const SpectralKernel kernel = build_multiplier(params.kernel, grid);
  const ScalarField g = convolve(kernel, sc.J);

  double run = 0.0, lo = 0.0, hi = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    run += grid.h * g(i, 0);
    lo = std::min(lo, run);
    hi = std::max(hi, run);
  }
  sc.star_exact = 0.5 * (hi - lo);
  sc.star_computed = star_norm(g, config).value;
  sc.lambda = 1.0 / sc.star_computed;
  sc.U = sc.lambda * g;
  sc.curvature_scale = sc.lambda * sup_norm(g);

  RowInterpolant row{std::vector<double>(grid.nx), grid};
  for (int i = 0; i < grid.nx; ++i) row.values[i] = sc.U(i, 0);
  const std::function<double(double)> U = row;

  // One level curve per stripe, integrated outward from the stripe center to the
  // last cell center on either side. Samples land on cell centers every 4 steps.
  const double step = 0.25 * grid.h;
  const double reach = 0.5 - 0.5 * grid.h;
  const int stripes = static_cast<int>(std::lround(grid.width()));
  const double x_left = -0.5 * grid.width();
  std::vector<double> Y(grid.nx, init.y0);
  for (int s = 0; s < stripes; ++s) {
    const double c = x_left + s + 0.5;
    const auto right = integrate_level_curve(U, c, init.y0, init.yp0, c + reach, step);
    const auto left = integrate_level_curve(U, c, init.y0, init.yp0, c - reach, step);
    std::vector<std::pair<double, double>> curve(left.rbegin(), left.rend());
    curve.insert(curve.end(), right.begin() + 1, right.end());
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x_center(i);
      if (std::abs(x - c) > 0.5) continue;
      const auto idx = static_cast<std::size_t>(std::lround((x - curve.front().first) / step));
      Y[i] = curve[std::min(idx, curve.size() - 1)].second;
    }
    sc.level_curves.push_back(std::move(curve));
  }

  // u climbs by 1/2 across a band of height `ramp` around each level curve, on top
  // of `offset` on the +1 stripes; the drop back to the base value sits half a
  // period away in y.
  sc.u = ScalarField(grid);
  sc.window = ScalarField(grid);
  ScalarField smooth(grid);
  const double H = grid.height();
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.y_center(j);
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x_center(i);
      const double z = wrap_into(y - Y[i], H);
      const double phi = std::clamp(z / options.ramp + 0.5, 0.0, 1.0);
      sc.u(i, j) = (sc.J(i, j) > 0.0 ? options.offset : 0.0) + 0.5 * phi;
      if (options.window > 0.0 && std::abs(y - init.y0) <= options.window) sc.window(i, j) = 1.0;
      const double to_edge = std::abs(x - std::round(x));
      if (std::abs(z) < 0.5 * options.ramp - 2.0 * grid.h && to_edge > 3.0 * grid.h) smooth(i, j) = 1.0;
    }
  }
  sc.f = sc.u + sc.J;

  ProblemParams pp = params;
  pp.lambda = sc.lambda;
  sc.report = verify_optimality(sc.f, sc.u, pp, config);
  if (options.window > 0.0) sc.window_report = verify_optimality(sc.f, sc.u, pp, config, sc.window);

  const CurvatureResidual cr = curvature_residual(sc.f, sc.u, pp);
  std::vector<double> mags;
  for (std::size_t k = 0; k < smooth.size(); ++k) {
    if (smooth[k] > 0.5 && cr.mask[k] > 0.5) mags.push_back(std::abs(cr.residual[k]));
  }
  if (mags.empty()) throw Error(ErrorKind::EmptyMask, "stripe ramp has no resolved interior cells");
  auto quantile = [&](double q) {
    const std::size_t idx = std::min(mags.size() - 1, static_cast<std::size_t>(q * (mags.size() - 1) + 0.5));
    std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
    return mags[idx];
  };
  sc.curvature_median = quantile(0.5);
  sc.curvature_p95 = quantile(0.95);
  return sc;
}

}  // namespace kbv
