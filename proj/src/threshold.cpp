#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "kbv/experiments.hpp"

namespace kbv {

ScalarField disk_indicator(const GridSpec& grid, double radius, std::pair<double, double> center) {
  ScalarField f(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double r = std::hypot(grid.x_center(i) - center.first, grid.y_center(j) - center.second);
      if (r < radius) f(i, j) = 1.0;
    }
  }
  return f;
}

double survival_ratio(double radius, const ProblemParams& params, const GridSpec& grid, const SolverConfig& config,
                      bool* converged) {
  const ScalarField f = disk_indicator(grid, radius);
  const double mass = lp_norm(f, 1);
  if (mass == 0.0) throw Error(ErrorKind::InvalidArgument, "disk radius below one cell");
  const SolveResult r = solve(f, params, config);
  if (converged) *converged = r.converged;
  return lp_norm(r.u, 1) / mass;
}

ThresholdEstimate estimate_r0(double lambda, double t, const ProblemParams& params, const GridSpec& grid,
                              std::pair<double, double> bracket, const SolverConfig& config) {
  ProblemParams pp = params;
  pp.lambda = lambda;
  pp.kernel.t = t;
  pp.validate();
  auto [lo, hi] = bracket;
  if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorKind::BadBracket, "bracket needs 0 < r_lo < r_hi");

  ThresholdEstimate est;
  est.lambda = lambda;
  est.t = t;
  auto evaluate = [&](double R) {
    bool conv = false;
    const double s = survival_ratio(R, pp, grid, config, &conv);
    est.decision_curve.emplace_back(R, s);
    est.all_converged = est.all_converged && conv;
    ++est.solves;
    return s;
  };
  const double s_lo = evaluate(lo);
  const double s_hi = evaluate(hi);
  if (!(s_lo < 0.5 && s_hi > 0.5)) {
    throw Error(ErrorKind::BadBracket, "survival ratio is not bracketed around 1/2 (" + std::to_string(s_lo) +
                                           ", " + std::to_string(s_hi) + ")");
  }
  for (int step = 0; step < 12 && hi - lo > grid.h; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate(mid) < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  est.bracket = {lo, hi};
  est.r0 = 0.5 * (lo + hi);
  return est;
}

SweepReport monotonicity_sweep(double lambda, const std::vector<double>& t_list, const ProblemParams& params,
                               const GridSpec& grid, std::pair<double, double> bracket, const SolverConfig& config,
                               int jobs) {
  for (std::size_t k = 1; k < t_list.size(); ++k) {
    if (!(t_list[k] > t_list[k - 1])) {
      throw Error(ErrorKind::InvalidArgument, "t_list must be strictly increasing");
    }
  }
  SweepReport rep;
  rep.estimates.resize(t_list.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t k = next++; k < t_list.size(); k = next++) {
      try {
        rep.estimates[k] = estimate_r0(lambda, t_list[k], params, grid, bracket, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(t_list.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t k = 1; k < rep.estimates.size(); ++k) {
    const auto& a = rep.estimates[k - 1];
    const auto& b = rep.estimates[k];
    const double width = std::max(a.bracket.second - a.bracket.first, b.bracket.second - b.bracket.first);
    if (b.r0 < a.r0 - width) rep.nondecreasing = false;
  }
  return rep;
}

double self_fixed_point_check(const ScalarField& u, const ProblemParams& params, const SolverConfig& config) {
  if (params.q != 1) throw Error(ErrorKind::InvalidArgument, "self_fixed_point_check requires q = 1");
  const double mass = lp_norm(u, 1);
  if (mass == 0.0) return 0.0;
  const SolveResult r = solve(u, params, config);
  const double eps = 1e-12 * u.grid().area();
  return lp_norm(r.u - u, 1) / std::max(mass, eps);
}

std::vector<LevelDiscrepancy> layer_cake_check(const ScalarField& u, const ProblemParams& params,
                                               const std::vector<double>& t_levels, const SolverConfig& config) {
  if (params.q != 1) throw Error(ErrorKind::InvalidArgument, "layer_cake_check requires q = 1");
  std::vector<LevelDiscrepancy> out;
  for (double t : t_levels) {
    LevelDiscrepancy d;
    d.t = t;
    const ScalarField e = threshold(u, t);
    d.fraction = e.sum() / static_cast<double>(e.size());
    if (d.fraction < 0.01 || d.fraction > 0.99) {
      d.skipped = true;
    } else {
      d.discrepancy = self_fixed_point_check(e, params, config);
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace kbv
