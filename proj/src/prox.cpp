#include "kbv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "kbv/errors.hpp"

namespace kbv::prox {
namespace {

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Largest theta with theta = c * sum_k (a_k - theta)_+ for a_k = |x_k|.
double water_level(std::span<const double> x, double c) {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  std::sort(a.begin(), a.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    prefix += a[k];
    const double candidate = c * prefix / (1.0 + c * static_cast<double>(k + 1));
    if (candidate >= a[k]) break;
    theta = candidate;
    if (k + 1 == a.size() || candidate >= a[k + 1]) break;
  }
  return theta;
}

}  // namespace

void fidelity(std::span<double> x, int p, int q, double weight, double cell_area) {
  if (weight < 0.0) throw Error(ErrorKind::InvalidArgument, "prox weight must be >= 0");
  if (weight == 0.0) return;
  if (p == 1 && q == 1) {
    for (double& v : x) v = soft(v, weight);
  } else if (p == 2 && q == 2) {
    const double s = 1.0 / (1.0 + 2.0 * weight);
    for (double& v : x) v *= s;
  } else if (p == 2 && q == 1) {
    double ss = 0.0;
    for (double v : x) ss += v * v;
    const double norm = std::sqrt(ss * cell_area);
    const double s = norm > weight ? 1.0 - weight / norm : 0.0;
    for (double& v : x) v *= s;
  } else if (p == 1 && q == 2) {
    const double theta = water_level(x, 2.0 * weight * cell_area);
    for (double& v : x) v = soft(v, theta);
  } else {
    throw Error(ErrorKind::InvalidArgument, "supported exponents are (p, q) in {1, 2}^2");
  }
}

double clip_to_budget(std::span<double> x, std::span<double> y, double budget) {
  const std::size_t n = x.size();
  std::vector<double> m(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    m[k] = std::hypot(x[k], y[k]);
    total += m[k];
  }
  if (total <= budget) {
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(y.begin(), y.end(), 0.0);
    return 0.0;
  }
  // Active-set iteration: rho = (sum_{active} m - budget) / |active|, drop m <= rho.
  std::vector<double> active = m;
  double rho = 0.0;
  for (;;) {
    double s = 0.0;
    for (double v : active) s += v;
    rho = (s - budget) / static_cast<double>(active.size());
    const auto keep = std::partition(active.begin(), active.end(), [rho](double v) { return v > rho; });
    if (keep == active.end()) break;
    active.erase(keep, active.end());
    if (active.empty()) break;
  }
  rho = std::max(rho, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (m[k] > rho) {
      const double s = rho / m[k];
      x[k] *= s;
      y[k] *= s;
    }
  }
  return rho;
}

void project_unit_ball(std::span<double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double m2 = x[k] * x[k] + y[k] * y[k];
    if (m2 > 1.0) {
      const double s = 1.0 / std::sqrt(m2);
      x[k] *= s;
      y[k] *= s;
    }
  }
}

}  // namespace kbv::prox
