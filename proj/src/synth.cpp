#include "kbv/synth.hpp"

#include <cmath>

namespace kbv {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

// Extent (half-width in x and y) must stay within the domain minus a 10% margin.
void check_margin(const GridSpec& g, double cx, double cy, double ex, double ey) {
  const double mx = 0.5 * g.width() - 0.1 * g.width();
  const double my = 0.5 * g.height() - 0.1 * g.height();
  require(std::abs(cx) + ex <= mx + 1e-12 && std::abs(cy) + ey <= my + 1e-12,
          "shape comes within 10% of the domain width of the seam");
}

}  // namespace

Shape parse_shape(std::string_view name) {
  if (name == "disk") return Shape::Disk;
  if (name == "square") return Shape::Square;
  if (name == "stripes") return Shape::Stripes;
  if (name == "steps") return Shape::Steps;
  throw Error(ErrorKind::InvalidArgument, "unknown shape '" + std::string(name) + "'");
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::Disk: return "disk";
    case Shape::Square: return "square";
    case Shape::Stripes: return "stripes";
    case Shape::Steps: return "steps";
  }
  return "unknown";
}

ScalarField synthesize(Shape shape, const ShapeParams& p, const GridSpec& grid) {
  grid.validate();
  ScalarField f(grid);
  require(std::isfinite(p.alpha), "alpha must be finite");
  auto radius_at = [&](int i, int j) { return std::hypot(grid.x_center(i) - p.cx, grid.y_center(j) - p.cy); };

  switch (shape) {
    case Shape::Disk: {
      require(p.radius > 0.0, "disk radius must be positive");
      check_margin(grid, p.cx, p.cy, p.radius, p.radius);
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) f(i, j) = radius_at(i, j) < p.radius ? p.alpha : 0.0;
      }
      break;
    }
    case Shape::Square: {
      require(p.side > 0.0, "square side must be positive");
      const double a = 0.5 * p.side;
      check_margin(grid, p.cx, p.cy, a, a);
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
          const bool in = std::abs(grid.x_center(i) - p.cx) < a && std::abs(grid.y_center(j) - p.cy) < a;
          f(i, j) = in ? p.alpha : 0.0;
        }
      }
      break;
    }
    case Shape::Stripes: {
      require(p.period > 0.0, "stripe period must be positive");
      const double periods = grid.width() / p.period;
      require(std::abs(periods - std::round(periods)) < 1e-9 && periods >= 1.0,
              "domain width must be a multiple of the stripe period");
      const double half = 0.5 * p.period / grid.h;
      require(std::abs(half - std::round(half)) < 1e-9, "stripe edges must fall on cell edges");
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
          const double x = grid.x_center(i) + 0.5 * grid.width();
          const double m = x - p.period * std::floor(x / p.period);
          f(i, j) = m < 0.5 * p.period ? p.alpha : -p.alpha;
        }
      }
      break;
    }
    case Shape::Steps: {
      std::vector<double> radii = p.radii;
      std::vector<double> values = p.values;
      if (radii.empty()) {
        radii = {p.radius, 0.5 * p.radius};
        values = {p.alpha, p.alpha};
      }
      require(radii.size() == values.size(), "steps need one value per radius");
      double rmax = 0.0;
      for (double r : radii) {
        require(r > 0.0, "step radii must be positive");
        rmax = std::max(rmax, r);
      }
      check_margin(grid, p.cx, p.cy, rmax, rmax);
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
          const double r = radius_at(i, j);
          double v = 0.0;
          for (std::size_t k = 0; k < radii.size(); ++k) {
            if (r < radii[k]) v += values[k];
          }
          f(i, j) = v;
        }
      }
      break;
    }
  }
  if (f.max() == f.min() && shape != Shape::Stripes) {
    throw Error(ErrorKind::InvalidArgument, "shape covers no cell centers or the whole grid");
  }
  return f;
}

}  // namespace kbv
