#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "kbv/experiments.hpp"

namespace kbv {
namespace {

using Point = std::pair<double, double>;

constexpr double kMinSpacing = 3.0;

// Lattice edges between cell centers: 2 * (j * nx + i) is the edge (i, j)-(i+1, j),
// 2 * (j * nx + i) + 1 is the edge (i, j)-(i, j+1).
struct Segment {
  long a, b;
};

}  // namespace

std::vector<Polyline> extract_contours(const ScalarField& u, double level) {
  const GridSpec& g = u.grid();
  const long nx = g.nx;
  auto hedge = [&](int i, int j) { return 2 * (static_cast<long>(j) * nx + i); };
  auto vedge = [&](int i, int j) { return 2 * (static_cast<long>(j) * nx + i) + 1; };

  std::unordered_map<long, Point> crossing;
  auto cross = [&](long id, int i0, int j0, int i1, int j1) {
    if (crossing.count(id)) return;
    const double a = u(i0, j0), b = u(i1, j1);
    const double s = (level - a) / (b - a);
    const double x = g.x_center(i0) + s * (g.x_center(i1) - g.x_center(i0));
    const double y = g.y_center(j0) + s * (g.y_center(j1) - g.y_center(j0));
    crossing[id] = {x, y};
  };

  std::vector<Segment> segs;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      // Corners counter-clockwise: (i,j) (i+1,j) (i+1,j+1) (i,j+1).
      const std::array<double, 4> v{u(i, j), u(i + 1, j), u(i + 1, j + 1), u(i, j + 1)};
      int mask = 0;
      for (int k = 0; k < 4; ++k) {
        if (v[k] > level) mask |= 1 << k;
      }
      if (mask == 0 || mask == 15) continue;
      // Edges: 0 bottom, 1 right, 2 top, 3 left.
      const std::array<long, 4> ids{hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)};
      auto edge_crosses = [&](int e) {
        const int c0 = e, c1 = (e + 1) % 4;
        return ((mask >> c0) & 1) != ((mask >> c1) & 1);
      };
      std::vector<int> es;
      for (int e = 0; e < 4; ++e) {
        if (edge_crosses(e)) es.push_back(e);
      }
      for (int e : es) {
        switch (e) {
          case 0: cross(ids[0], i, j, i + 1, j); break;
          case 1: cross(ids[1], i + 1, j, i + 1, j + 1); break;
          case 2: cross(ids[2], i, j + 1, i + 1, j + 1); break;
          case 3: cross(ids[3], i, j, i, j + 1); break;
        }
      }
      if (es.size() == 2) {
        segs.push_back({ids[es[0]], ids[es[1]]});
      } else {
        // Saddle: resolve with the cell average.
        const double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool joined = centre > level;
        if ((mask == 5) == joined) {
          // Inside corners 0 and 2 connected (or outside corners 1 and 3 separated).
          segs.push_back({ids[0], ids[1]});
          segs.push_back({ids[2], ids[3]});
        } else {
          segs.push_back({ids[0], ids[3]});
          segs.push_back({ids[1], ids[2]});
        }
      }
    }
  }

  std::unordered_map<long, std::vector<std::size_t>> touching;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    touching[segs[s].a].push_back(s);
    touching[segs[s].b].push_back(s);
  }
  std::vector<char> used(segs.size(), 0);
  auto other_end = [&](std::size_t s, long id) { return segs[s].a == id ? segs[s].b : segs[s].a; };
  auto next_segment = [&](long id) -> long {
    for (std::size_t s : touching[id]) {
      if (!used[s]) return static_cast<long>(s);
    }
    return -1;
  };

  std::vector<Polyline> lines;
  auto trace = [&](std::size_t s0, long start) {
    Polyline pl;
    pl.points.push_back(crossing[start]);
    long id = start;
    long s = static_cast<long>(s0);
    while (s >= 0) {
      used[s] = 1;
      id = other_end(static_cast<std::size_t>(s), id);
      if (id == start) {
        pl.closed = true;
        break;
      }
      pl.points.push_back(crossing[id]);
      s = next_segment(id);
    }
    lines.push_back(std::move(pl));
  };
  // Open chains first (endpoints touch a single segment), then closed loops.
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    for (long end : {segs[s].a, segs[s].b}) {
      if (touching[end].size() == 1) {
        trace(s, end);
        break;
      }
    }
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) trace(s, segs[s].a);
  }

  // Orient every polyline with the superlevel side on its left.
  auto sample = [&](double x, double y) {
    const double sx = (x + 0.5 * g.width()) / g.h - 0.5;
    const double sy = (y + 0.5 * g.height()) / g.h - 0.5;
    const int i0 = static_cast<int>(std::floor(sx)), j0 = static_cast<int>(std::floor(sy));
    const double wx = sx - i0, wy = sy - j0;
    auto at = [&](int i, int j) { return u(((i % g.nx) + g.nx) % g.nx, ((j % g.ny) + g.ny) % g.ny); };
    return (1 - wx) * (1 - wy) * at(i0, j0) + wx * (1 - wy) * at(i0 + 1, j0) + (1 - wx) * wy * at(i0, j0 + 1) +
           wx * wy * at(i0 + 1, j0 + 1);
  };
  for (Polyline& pl : lines) {
    if (pl.points.size() < 2) continue;
    const auto [x0, y0] = pl.points[0];
    const auto [x1, y1] = pl.points[1];
    const double len = std::hypot(x1 - x0, y1 - y0);
    if (len == 0.0) continue;
    const double mx = 0.5 * (x0 + x1) - 0.25 * g.h * (y1 - y0) / len;
    const double my = 0.5 * (y0 + y1) + 0.25 * g.h * (x1 - x0) / len;
    if (sample(mx, my) < level) std::reverse(pl.points.begin(), pl.points.end());
  }
  return lines;
}

std::vector<double> polyline_curvatures(const Polyline& line, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "spacing must be positive");
  std::vector<Point> pts = line.points;
  if (line.closed && !pts.empty()) pts.push_back(pts.front());
  std::vector<double> arc{0.0};
  for (std::size_t k = 1; k < pts.size(); ++k) {
    arc.push_back(arc.back() + std::hypot(pts[k].first - pts[k - 1].first, pts[k].second - pts[k - 1].second));
  }
  const double length = arc.back();
  if (length <= 0.0) return {};
  std::size_t n = static_cast<std::size_t>(std::floor(length / spacing));
  if (line.closed) n = std::max<std::size_t>(static_cast<std::size_t>(std::lround(length / spacing)), 1);
  const double step = line.closed ? length / n : spacing;

  std::vector<Point> res;
  std::size_t seg = 0;
  const std::size_t count = line.closed ? n : n + 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = std::min(k * step, length);
    while (seg + 2 < arc.size() && arc[seg + 1] < s) ++seg;
    const double d = arc[seg + 1] - arc[seg];
    const double w = d > 0.0 ? (s - arc[seg]) / d : 0.0;
    res.emplace_back(pts[seg].first + w * (pts[seg + 1].first - pts[seg].first),
                     pts[seg].second + w * (pts[seg + 1].second - pts[seg].second));
  }

  const std::size_t m = res.size();
  std::vector<double> out;
  if (m < 5) return out;
  auto at = [&](long k) -> const Point& {
    if (line.closed) return res[static_cast<std::size_t>((k % static_cast<long>(m) + m) % m)];
    return res[static_cast<std::size_t>(k)];
  };
  const long first = line.closed ? 0 : 2;
  const long last = line.closed ? static_cast<long>(m) : static_cast<long>(m) - 2;
  for (long k = first; k < last; ++k) {
    // Algebraic least-squares circle x^2 + y^2 + D x + E y + F = 0 in local coordinates.
    const Point& c = at(k);
    double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0, sz = 0, sxz = 0, syz = 0;
    for (long o = -2; o <= 2; ++o) {
      const double x = (at(k + o).first - c.first) / step;
      const double y = (at(k + o).second - c.second) / step;
      const double z = x * x + y * y;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
      sx += x;
      sy += y;
      sz += z;
      sxz += x * z;
      syz += y * z;
    }
    const double a[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, 5.0}};
    const double rhs[3] = {-sxz, -syz, -sz};
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    const Point& p0 = at(k - 2);
    const Point& p2 = at(k + 2);
    const double turn = (c.first - p0.first) * (p2.second - c.second) - (c.second - p0.second) * (p2.first - c.first);
    if (std::abs(det) < 1e-9) {
      out.push_back(0.0);
      continue;
    }
    auto solve_col = [&](int col) {
      double b[3][3];
      for (int r = 0; r < 3; ++r) {
        for (int q = 0; q < 3; ++q) b[r][q] = q == col ? rhs[r] : a[r][q];
      }
      return (b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
              b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0])) /
             det;
    };
    const double D = solve_col(0), E = solve_col(1), F = solve_col(2);
    const double r2 = 0.25 * (D * D + E * E) - F;
    if (!(r2 > 0.0)) {
      out.push_back(0.0);
      continue;
    }
    const double kappa = 1.0 / (std::sqrt(r2) * step);
    out.push_back(turn >= 0.0 ? kappa : -kappa);
  }
  return out;
}

CurvatureReport curvature_bound_check(const ScalarField& u_binary, const ProblemParams& params, double smoothing,
                                      double spacing, double spacing_factor) {
  params.validate();
  if (!std::isfinite(spacing)) throw Error(ErrorKind::InvalidArgument, "contour spacing must be finite");
  if (spacing <= 0.0 && !(spacing_factor > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "automatic contour spacing needs a positive factor");
  }
  const GridSpec& g = u_binary.grid();
  ScalarField field = u_binary;
  if (smoothing > 0.0) {
    const double s = smoothing * g.h;
    field = convolve(build_multiplier({KernelFamily::Gaussian, 2.0 * std::numbers::pi * s * s}, g), u_binary);
  }
  CurvatureReport rep;
  rep.kernel_norm = kernel_lp_norm(build_multiplier(params.kernel, g), params.p);
  rep.bound = 1.1 * params.lambda * rep.kernel_norm;
  const auto lines = extract_contours(field, 0.5);
  for (const Polyline& pl : lines) {
    double step = spacing * g.h;
    if (spacing <= 0.0) {
      // Digitization ripple of amplitude ~h on a contour of radius rho gives a fit
      // error ~ h rho / step^2 relative to 1/rho; step ~ sqrt(rho h) keeps it fixed.
      double length = 0.0;
      for (std::size_t k = 1; k < pl.points.size(); ++k) {
        length += std::hypot(pl.points[k].first - pl.points[k - 1].first, pl.points[k].second - pl.points[k - 1].second);
      }
      if (pl.closed && pl.points.size() > 1) {
        length += std::hypot(pl.points.front().first - pl.points.back().first,
                             pl.points.front().second - pl.points.back().second);
      }
      const double rho = length / (2.0 * std::numbers::pi);
      step = std::max(kMinSpacing * g.h, spacing_factor * std::sqrt(rho * g.h));
    }
    const auto k = polyline_curvatures(pl, step);
    if (!k.empty()) ++rep.contours;
    rep.curvatures.insert(rep.curvatures.end(), k.begin(), k.end());
  }
  if (rep.curvatures.empty()) throw Error(ErrorKind::NoContour, "no 0.5-level contour found");
  std::size_t within = 0;
  for (double k : rep.curvatures) {
    rep.max_abs = std::max(rep.max_abs, std::abs(k));
    if (std::abs(k) <= rep.bound) ++within;
  }
  rep.fraction_within = static_cast<double>(within) / static_cast<double>(rep.curvatures.size());
  return rep;
}

}  // namespace kbv
