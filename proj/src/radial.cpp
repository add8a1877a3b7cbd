#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kbv/experiments.hpp"

namespace kbv {
namespace {

constexpr std::size_t kMinBinCells = 8;

double wrap(double d, double period) { return d - period * std::floor(d / period + 0.5); }

struct Cell {
  double r;
  double v;
};

struct BinStats {
  std::vector<double> edges;
  std::vector<double> mean;
  std::vector<double> cv;
  std::vector<std::size_t> count;
};

// Cells sorted by radius; edges ascending with edges.front() = 0 and edges.back() > max r.
BinStats bin_statistics(const std::vector<Cell>& cells, std::vector<double> edges, double cv_floor) {
  std::vector<std::size_t> start(edges.size(), cells.size());
  {
    std::size_t c = 0;
    for (std::size_t b = 0; b < edges.size(); ++b) {
      while (c < cells.size() && cells[c].r < edges[b]) ++c;
      start[b] = c;
    }
  }
  // Merge bins with too few cells into their outer neighbour (the last into its inner one).
  std::vector<double> kept{edges.front()};
  std::vector<std::size_t> kept_start{start.front()};
  for (std::size_t b = 1; b + 1 < edges.size(); ++b) {
    if (start[b] - kept_start.back() >= kMinBinCells) {
      kept.push_back(edges[b]);
      kept_start.push_back(start[b]);
    }
  }
  kept.push_back(edges.back());
  kept_start.push_back(start.back());
  if (kept.size() > 2 && kept_start.back() - kept_start[kept_start.size() - 2] < kMinBinCells) {
    kept.erase(kept.end() - 2);
    kept_start.erase(kept_start.end() - 2);
  }

  BinStats s;
  s.edges = kept;
  for (std::size_t b = 0; b + 1 < kept.size(); ++b) {
    const std::size_t lo = kept_start[b], hi = kept_start[b + 1];
    const std::size_t n = hi - lo;
    double mean = 0.0;
    for (std::size_t c = lo; c < hi; ++c) mean += cells[c].v;
    mean = n ? mean / n : 0.0;
    double var = 0.0;
    for (std::size_t c = lo; c < hi; ++c) var += (cells[c].v - mean) * (cells[c].v - mean);
    var = n ? var / n : 0.0;
    const double denom = std::max(std::abs(mean), cv_floor);
    s.mean.push_back(mean);
    s.count.push_back(n);
    s.cv.push_back(denom > 0.0 ? std::sqrt(var) / denom : 0.0);
  }
  return s;
}

}  // namespace

RadialProfile radial_decompose(const ScalarField& u, std::pair<double, double> center, int nbins) {
  const GridSpec& g = u.grid();
  if (nbins < 4) throw Error(ErrorKind::InvalidArgument, "radial_decompose needs nbins >= 4");
  if (std::abs(center.first) > 0.5 * g.width() || std::abs(center.second) > 0.5 * g.height()) {
    throw Error(ErrorKind::InvalidArgument, "radial center lies outside the domain");
  }

  std::vector<Cell> cells;
  cells.reserve(g.size());
  double umax = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double dx = wrap(g.x_center(i) - center.first, g.width());
      const double dy = wrap(g.y_center(j) - center.second, g.height());
      cells.push_back({std::hypot(dx, dy), u(i, j)});
      umax = std::max(umax, std::abs(u(i, j)));
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.r < b.r; });
  const double r_max = cells.back().r;
  const double r_end = std::nextafter(r_max, std::numeric_limits<double>::infinity());
  const double range = u.max() - u.min();
  const double tol = 0.05 * range;
  const double cv_floor = 0.05 * umax;

  RadialProfile prof;
  prof.center = center;

  // Fine profile at one cell width, clustered by value gaps.
  std::vector<double> fine_edges;
  for (double r = 0.0; r < r_end; r += g.h) fine_edges.push_back(r);
  fine_edges.push_back(r_end);
  const BinStats fine = bin_statistics(cells, fine_edges, cv_floor);
  const std::size_t nf = fine.mean.size();

  std::vector<std::size_t> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fine.mean[a] < fine.mean[b]; });
  std::vector<int> cluster(nf, 0);
  int next = 0;
  for (std::size_t k = 0; k < nf; ++k) {
    if (k > 0 && fine.mean[order[k]] - fine.mean[order[k - 1]] > tol) ++next;
    cluster[order[k]] = next;
  }

  // Plateaus: runs of at least two fine bins sharing a cluster. Single-bin runs are transitions.
  struct Run {
    std::size_t first, last;
    int cluster;
  };
  std::vector<Run> runs;
  for (std::size_t b = 0; b < nf;) {
    std::size_t e = b;
    while (e + 1 < nf && cluster[e + 1] == cluster[b]) ++e;
    if (e > b || nf == 1) runs.push_back({b, e, cluster[b]});
    b = e + 1;
  }
  if (runs.empty()) runs.push_back({0, nf - 1, cluster[0]});
  // Adjacent runs of the same cluster separated only by transition bins are one plateau.
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && merged.back().cluster == r.cluster) {
      merged.back().last = r.last;
    } else {
      merged.push_back(r);
    }
  }

  auto median_between = [&](double r_lo, double r_hi) {
    std::vector<double> vals;
    for (const Cell& c : cells) {
      if (c.r >= r_lo && c.r < r_hi) vals.push_back(c.v);
    }
    if (vals.empty()) return 0.0;
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    return vals[vals.size() / 2];
  };

  // Transition radius between consecutive plateaus: the split minimizing the L1
  // misfit of the two plateau values over the gap.
  std::vector<double> values;
  for (const Run& r : merged) values.push_back(median_between(fine.edges[r.first], fine.edges[r.last + 1]));
  std::vector<double> cuts;
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double lo_r = fine.edges[merged[k].last];
    const double hi_r = fine.edges[merged[k + 1].first + 1];
    const double a = values[k], b = values[k + 1];
    const auto first = std::lower_bound(cells.begin(), cells.end(), lo_r, [](const Cell& c, double r) { return c.r < r; });
    const auto last = std::lower_bound(cells.begin(), cells.end(), hi_r, [](const Cell& c, double r) { return c.r < r; });
    double cost = 0.0;
    for (auto it = first; it != last; ++it) cost += std::abs(it->v - b);
    double best = cost;
    double best_r = lo_r;
    for (auto it = first; it != last; ++it) {
      cost += std::abs(it->v - a) - std::abs(it->v - b);
      const auto nx = std::next(it);
      if (nx != last && nx->r == it->r) continue;
      if (cost < best) {
        best = cost;
        best_r = nx != cells.end() ? 0.5 * (it->r + nx->r) : r_end;
      }
    }
    cuts.push_back(best_r);
  }

  std::vector<double> edges;
  for (int b = 0; b < nbins; ++b) edges.push_back(r_max * b / nbins);
  for (double c : cuts) {
    edges.erase(std::remove_if(edges.begin() + 1, edges.end(), [&](double e) { return std::abs(e - c) < 0.5 * g.h; }),
                edges.end());
    edges.push_back(c);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges.push_back(r_end);
  const BinStats bins = bin_statistics(cells, edges, cv_floor);
  prof.bin_edges = bins.edges;
  prof.bin_mean = bins.mean;
  prof.bin_cv = bins.cv;
  prof.bin_count = bins.count;
  prof.max_cv = bins.cv.empty() ? 0.0 : *std::max_element(bins.cv.begin(), bins.cv.end());

  for (std::size_t k = 0; k < merged.size(); ++k) {
    RadialLevel lvl;
    lvl.r_inner = k == 0 ? 0.0 : cuts[k - 1];
    lvl.r_outer = k + 1 < merged.size() ? cuts[k] : r_max;
    lvl.value = median_between(lvl.r_inner, k + 1 < merged.size() ? lvl.r_outer : r_end);
    for (const Cell& c : cells) {
      if (c.r >= lvl.r_inner && (c.r < lvl.r_outer || k + 1 == merged.size())) ++lvl.cells;
    }
    prof.plateaus.push_back(lvl);
    if (std::abs(lvl.value) > tol) prof.levels.push_back(lvl);
  }
  for (std::size_t k = 0; k + 1 < prof.plateaus.size(); ++k) {
    prof.jumps.push_back({cuts[k], prof.plateaus[k].value - prof.plateaus[k + 1].value});
  }

  std::size_t covered = 0;
  for (const Cell& c : cells) {
    for (const RadialLevel& p : prof.plateaus) {
      if (std::abs(c.v - p.value) <= tol) {
        ++covered;
        break;
      }
    }
  }
  prof.coverage = static_cast<double>(covered) / static_cast<double>(cells.size());
  return prof;
}

}  // namespace kbv
