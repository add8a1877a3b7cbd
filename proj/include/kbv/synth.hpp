#pragma once

// Synthetic test images on a centered grid.

#include <string>
#include <string_view>
#include <vector>

#include "kbv/grid.hpp"

namespace kbv {

enum class Shape { Disk, Square, Stripes, Steps };

Shape parse_shape(std::string_view name);
std::string to_string(Shape shape);

struct ShapeParams {
  /// Disk radius, or the outermost radius of a steps image when `radii` is empty.
  double radius = 0.5;
  /// Square side length.
  double side = 0.5;
  double alpha = 1.0;
  /// Stripe period in x; stripes take the values +alpha and -alpha.
  double period = 2.0;
  /// Steps: sum of values[k] * indicator(r < radii[k]).
  std::vector<double> radii;
  std::vector<double> values;
  double cx = 0.0;
  double cy = 0.0;
};

/// Cell-center membership. Bounded shapes must keep 10% of the domain width
/// clear of the seam on every side; stripes need a width that is a multiple of
/// the period. Throws InvalidArgument on degenerate or out-of-range geometry.
ScalarField synthesize(Shape shape, const ShapeParams& params, const GridSpec& grid);

}  // namespace kbv
