#include "kbv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kbv {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateFidelity: return "DegenerateFidelity";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NonzeroMean: return "NonzeroMean";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::BadBracket: return "BadBracket";
    case ErrorKind::NoContour: return "NoContour";
    case ErrorKind::OdeBlowup: return "OdeBlowup";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void GridSpec::validate() const {
  if (nx < 4 || ny < 4) {
    throw Error(ErrorKind::InvalidArgument,
                "grid needs nx, ny >= 4 (got " + std::to_string(nx) + "x" + std::to_string(ny) + ")");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive and finite");
  }
}

GridSpec GridSpec::centered_square(int n, double half_width) {
  GridSpec g{n, n, 2.0 * half_width / n};
  g.validate();
  return g;
}

ScalarField::ScalarField(GridSpec grid, double fill) : grid_(grid) {
  grid_.validate();
  values_.assign(grid_.size(), fill);
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::InvalidArgument, "value count does not match grid size");
  }
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "operator+=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "operator-=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

VectorField::VectorField(GridSpec grid) : grid_(grid) {
  grid_.validate();
  x_.assign(grid_.size(), 0.0);
  y_.assign(grid_.size(), 0.0);
}

double VectorField::magnitude(std::size_t k) const { return std::hypot(x_[k], y_[k]); }

double VectorField::max_magnitude() const {
  double m = 0.0;
  for (std::size_t k = 0; k < x_.size(); ++k) m = std::max(m, magnitude(k));
  return m;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) {
    throw Error(ErrorKind::GridMismatch, std::string(where) + ": fields live on different grids");
  }
}

VectorField gradient(const ScalarField& u) {
  const GridSpec& g = u.grid();
  VectorField w(g);
  const double inv_h = 1.0 / g.h;
  for (int j = 0; j < g.ny; ++j) {
    const int jp = (j + 1 == g.ny) ? 0 : j + 1;
    for (int i = 0; i < g.nx; ++i) {
      const int ip = (i + 1 == g.nx) ? 0 : i + 1;
      const std::size_t k = u.index(i, j);
      w.x()[k] = (u(ip, j) - u[k]) * inv_h;
      w.y()[k] = (u(i, jp) - u[k]) * inv_h;
    }
  }
  return w;
}

ScalarField divergence(const VectorField& w) {
  const GridSpec& g = w.grid();
  ScalarField d(g);
  const double inv_h = 1.0 / g.h;
  const auto& wx = w.x();
  const auto& wy = w.y();
  for (int j = 0; j < g.ny; ++j) {
    const int jm = (j == 0) ? g.ny - 1 : j - 1;
    for (int i = 0; i < g.nx; ++i) {
      const int im = (i == 0) ? g.nx - 1 : i - 1;
      const std::size_t k = d.index(i, j);
      d[k] = (wx[k] - wx[d.index(im, j)] + wy[k] - wy[d.index(i, jm)]) * inv_h;
    }
  }
  return d;
}

double bv_seminorm(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const double inv_h = 1.0 / g.h;
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const int jp = (j + 1 == g.ny) ? 0 : j + 1;
    for (int i = 0; i < g.nx; ++i) {
      const int ip = (i + 1 == g.nx) ? 0 : i + 1;
      const double c = u(i, j);
      s += std::hypot((u(ip, j) - c) * inv_h, (u(i, jp) - c) * inv_h);
    }
  }
  return s * g.cell_area();
}

double lp_norm(const ScalarField& u, int p) {
  double s = 0.0;
  if (p == 1) {
    for (double v : u.values()) s += std::abs(v);
    return s * u.grid().cell_area();
  }
  if (p == 2) {
    for (double v : u.values()) s += v * v;
    return std::sqrt(s * u.grid().cell_area());
  }
  throw Error(ErrorKind::InvalidArgument, "lp_norm supports p in {1, 2}");
}

double sup_norm(const ScalarField& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

ScalarField threshold(const ScalarField& u, double t) {
  ScalarField out(u.grid());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k] > t ? 1.0 : 0.0;
  return out;
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().cell_area();
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.x()[k] * b.x()[k] + a.y()[k] * b.y()[k];
  return s * a.grid().cell_area();
}

ScalarField cyclic_shift(const ScalarField& u, int di, int dj) {
  const GridSpec& g = u.grid();
  ScalarField out(g);
  const int si = ((di % g.nx) + g.nx) % g.nx;
  const int sj = ((dj % g.ny) + g.ny) % g.ny;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out((i + si) % g.nx, (j + sj) % g.ny) = u(i, j);
    }
  }
  return out;
}

double mean(const ScalarField& u) { return u.sum() / static_cast<double>(u.size()); }

}  // namespace kbv
