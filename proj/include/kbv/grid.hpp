#pragma once

// Periodic uniform 2D grid fields and the discrete differential operators
// used throughout the library.
//
// Storage is row-major with x fastest: value (i, j) lives at j * nx + i,
// where i indexes x and j indexes y. Geometry helpers place the origin at
// the centre of the domain, so cell (i, j) has centre
//   x = (i + 1/2) h - nx h / 2,  y = (j + 1/2) h - ny h / 2.

#include <cstddef>
#include <span>
#include <vector>

#include "kbv/errors.hpp"

namespace kbv {

struct GridSpec {
  int nx = 0;
  int ny = 0;
  double h = 0.0;

  /// Throws InvalidArgument unless nx, ny >= 4 and h > 0.
  void validate() const;

  std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
  double cell_area() const noexcept { return h * h; }
  double width() const noexcept { return nx * h; }
  double height() const noexcept { return ny * h; }
  double area() const noexcept { return width() * height(); }
  double x_center(int i) const noexcept { return (i + 0.5) * h - 0.5 * width(); }
  double y_center(int j) const noexcept { return (j + 0.5) * h - 0.5 * height(); }

  /// Square grid covering [-half_width, half_width]^2 with n cells per side.
  static GridSpec centered_square(int n, double half_width);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec grid, double fill = 0.0);
  ScalarField(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * grid_.nx + i;
  }

  double min() const;
  double max() const;
  double sum() const;
  /// Cell-sum quadrature: sum * h^2.
  double integral() const { return sum() * grid_.cell_area(); }
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double c);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }
  friend ScalarField operator*(ScalarField a, double c) { return a *= c; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridSpec grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return x_.size(); }

  std::vector<double>& x() noexcept { return x_; }
  std::vector<double>& y() noexcept { return y_; }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }

  double magnitude(std::size_t k) const;
  /// max_k |w_k| with the pointwise Euclidean magnitude.
  double max_magnitude() const;

 private:
  GridSpec grid_;
  std::vector<double> x_;
  std::vector<double> y_;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

/// Forward differences with periodic wrap.
VectorField gradient(const ScalarField& u);
/// Backward differences with periodic wrap; the exact negative adjoint of gradient.
ScalarField divergence(const VectorField& w);

/// Isotropic discrete total variation: sum over cells of h^2 |grad u|.
double bv_seminorm(const ScalarField& u);
/// (sum h^2 |u|^p)^(1/p) for p in {1, 2}.
double lp_norm(const ScalarField& u, int p);
/// max |u|.
double sup_norm(const ScalarField& u);
/// Indicator of {u > t}.
ScalarField threshold(const ScalarField& u, double t);

/// <a, b> = h^2 sum a b.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

/// Cyclic shift by (di, dj) cells: out(i + di, j + dj) = u(i, j).
ScalarField cyclic_shift(const ScalarField& u, int di, int dj);

/// Mean value (integral / area).
double mean(const ScalarField& u);

}  // namespace kbv
