#include "kbv/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kbv/experiments.hpp"
#include "kbv/prox.hpp"
#include "kbv/synth.hpp"

namespace kbv {
namespace {

using Rng = std::mt19937_64;

ScalarField random_field(const GridSpec& g, Rng& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ScalarField u(g);
  for (double& v : u.values()) v = U(rng);
  return u;
}

VectorField random_vector_field(const GridSpec& g, Rng& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  VectorField w(g);
  for (double& v : w.x()) v = U(rng);
  for (double& v : w.y()) v = U(rng);
  return w;
}

// A few random low-frequency modes.
ScalarField smooth_field(const GridSpec& g, Rng& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> K(0, 3);
  ScalarField u(g);
  for (int m = 0; m < 4; ++m) {
    const int kx = K(rng), ky = K(rng);
    const double a = U(rng), px = U(rng) * std::numbers::pi, py = U(rng) * std::numbers::pi;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        u(i, j) += a * std::cos(2.0 * std::numbers::pi * kx * g.x_center(i) / g.width() + px) *
                   std::cos(2.0 * std::numbers::pi * ky * g.y_center(j) / g.height() + py);
      }
    }
  }
  return u;
}

double rel_l2(const ScalarField& a, const ScalarField& b) {
  return lp_norm(a - b, 2) / std::max(lp_norm(b, 2), 1e-300);
}

double golden_min(const std::function<double(double)>& fn, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

class Collector {
 public:
  void add(std::string suite, std::string name, double value, double tol, std::string detail = {}) {
    out.push_back({std::move(suite), std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(detail)});
  }
  std::vector<CheckResult> out;
};

void grid_suite(Collector& c, Rng& rng) {
  double adj = 0.0, shift = 0.0, homog = 0.0;
  for (const GridSpec g : {GridSpec{8, 8, 0.125}, GridSpec{16, 12, 0.05}, GridSpec{33, 20, 0.3}}) {
    for (int rep = 0; rep < 5; ++rep) {
      const ScalarField u = random_field(g, rng);
      const VectorField w = random_vector_field(g, rng);
      const VectorField gu = gradient(u);
      const ScalarField dw = divergence(w);
      const double scale = std::sqrt(inner(gu, gu) * inner(w, w)) + std::sqrt(inner(u, u) * inner(dw, dw));
      adj = std::max(adj, std::abs(inner(gu, w) + inner(u, dw)) / scale);

      const ScalarField s = cyclic_shift(u, 3, -2);
      shift = std::max(shift, std::abs(bv_seminorm(s) - bv_seminorm(u)) / bv_seminorm(u));
      for (int p : {1, 2}) shift = std::max(shift, std::abs(lp_norm(s, p) - lp_norm(u, p)) / lp_norm(u, p));

      const double k = -2.5;
      homog = std::max(homog, std::abs(bv_seminorm(k * u) - std::abs(k) * bv_seminorm(u)) / bv_seminorm(u));
      for (int p : {1, 2}) {
        homog = std::max(homog, std::abs(lp_norm(k * u, p) - std::abs(k) * lp_norm(u, p)) / lp_norm(u, p));
      }
    }
  }
  c.add("grid_core", "adjointness <grad u, w> + <u, div w>", adj, 1e-12);
  c.add("grid_core", "translation invariance of norms", shift, 1e-12);
  c.add("grid_core", "homogeneity of norms", homog, 1e-12);

  const GridSpec g = GridSpec::centered_square(64, 1.0);
  ShapeParams sp;
  sp.radii = {0.6, 0.4, 0.2};
  sp.values = {0.5, 1.0, 0.25};
  const ScalarField u = synthesize(Shape::Steps, sp, g);
  std::vector<double> levels(u.values().begin(), u.values().end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double layered = 0.0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    layered += (levels[k + 1] - levels[k]) * bv_seminorm(threshold(u, levels[k]));
  }
  c.add("grid_core", "coarea sum over levels", std::abs(layered - bv_seminorm(u)) / bv_seminorm(u), 0.02);
}

void kernel_suite(Collector& c, Rng& rng) {
  const GridSpec g = GridSpec::centered_square(64, 1.0);
  const ScalarField f = random_field(g, rng);
  double semi = 0.0;
  for (KernelFamily fam : {KernelFamily::Gaussian, KernelFamily::Poisson}) {
    const double t0 = fam == KernelFamily::Gaussian ? 0.004 : 0.02;
    for (double a : {0.5, 1.0, 2.0}) {
      for (double b : {0.5, 1.0, 2.0}) {
        const ScalarField two = convolve(build_multiplier({fam, a * t0}, g), convolve(build_multiplier({fam, b * t0}, g), f));
        const ScalarField one = convolve(build_multiplier({fam, (a + b) * t0}, g), f);
        semi = std::max(semi, rel_l2(two, one));
      }
    }
  }
  c.add("kernels", "semigroup K_s * K_t = K_(s+t)", semi, 1e-10);

  double mass = 0.0, neg = 0.0;
  ScalarField pos = f;
  for (double& v : pos.values()) v = std::abs(v);
  for (KernelFamily fam : {KernelFamily::Gaussian, KernelFamily::Poisson, KernelFamily::Identity}) {
    const ScalarField kf = convolve(build_multiplier({fam, 0.01}, g), f);
    mass = std::max(mass, std::abs(kf.integral() - f.integral()) / lp_norm(f, 1));
    neg = std::max(neg, -convolve(build_multiplier({fam, 0.01}, g), pos).min());
  }
  c.add("kernels", "mass preservation", mass, 1e-12);
  c.add("kernels", "positivity: -min K * |f|", neg, 1e-12);

  // Scales at which the sampled multiplier has decayed at the Nyquist frequency
  // (coarser scales carry truncation ripple and a kernel L1 norm above 1).
  ScalarField dip(g);
  dip(20, 32) = 1.0;
  dip(44, 32) = -1.0;
  const auto curve = l1_smoothing_curve(dip, KernelFamily::Gaussian, {0.064, 0.128, 0.256, 0.512, 1.024});
  double rise = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) rise = std::max(rise, curve[k] - curve[k - 1]);
  c.add("kernels", "L1 smoothing curve nonincreasing (max rise)", rise / curve.front(), 1e-12);
}

void prox_suite(Collector& c, Rng& rng) {
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_real_distribution<double> W(0.05, 1.5);
  double worst = 0.0;
  for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}, {1, 2}}) {
    for (int rep = 0; rep < 5; ++rep) {
      const double area = 0.25;
      const double weight = W(rng);
      std::vector<double> x(7);
      for (double& v : x) v = U(rng);
      std::vector<double> z = x;
      prox::fidelity(z, p, q, weight, area);
      auto objective = [&](const std::vector<double>& y) {
        double n = 0.0;
        for (double v : y) n += p == 1 ? std::abs(v) : v * v;
        n = p == 1 ? area * n : std::sqrt(area * n);
        double d = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) d += (y[k] - x[k]) * (y[k] - x[k]);
        return weight * (q == 1 ? n : n * n) + 0.5 * area * d;
      };
      // Coordinate-wise and radial golden-section searches must not improve the objective.
      const double at_z = objective(z);
      for (std::size_t k = 0; k < z.size(); ++k) {
        std::vector<double> y = z;
        const double best = golden_min(
            [&](double s) {
              y[k] = s;
              return objective(y);
            },
            -4.0, 4.0);
        y[k] = best;
        worst = std::max(worst, at_z - objective(y));
      }
      std::vector<double> y = z;
      const double s = golden_min(
          [&](double a) {
            for (std::size_t k = 0; k < y.size(); ++k) y[k] = a * x[k];
            return objective(y);
          },
          -0.5, 1.5);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = s * x[k];
      worst = std::max(worst, at_z - objective(y));
    }
  }
  c.add("variational", "prox maps vs golden-section minimizer", worst, 1e-8);
}

void star_suite(Collector& c, Rng& rng) {
  const GridSpec g{8, 8, 0.125};
  SolverConfig cfg;
  cfg.max_iter = 200000;
  cfg.gap_tol = 1e-7;
  double worst = 0.0, feas = 0.0;
  for (const DipoleReference& d : dipole_references()) {
    ScalarField v(g);
    v(d.plus_i, d.plus_j) = 1.0;
    v(d.minus_i, d.minus_j) = -1.0;
    const StarNormResult r = star_norm(v, cfg);
    worst = std::max(worst, std::abs(r.value - d.value) / d.value);
    feas = std::max(feas, r.feasibility);
  }
  c.add("variational", "star norm vs conic oracle (8x8 dipoles)", worst, 1e-4);
  c.add("variational", "star norm witness feasibility", feas, 1e-6);

  const GridSpec g2 = GridSpec::centered_square(32, 1.0);
  ScalarField v = random_field(g2, rng);
  const double m = mean(v);
  for (double& x : v.values()) x -= m;
  cfg.gap_tol = 1e-5;
  cfg.max_iter = 50000;
  const StarNormResult a = star_norm(v, cfg);
  const StarNormResult b = star_norm(-3.0 * v, cfg);
  c.add("variational", "star norm homogeneity", std::abs(b.value - 3.0 * a.value) / (3.0 * a.value), 1e-4);
  double bound = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const ScalarField h = rep % 2 ? random_field(g2, rng) : smooth_field(g2, rng);
    bound = std::max(bound, std::abs(inner(h, v)) / (bv_seminorm(h) * a.value) - 1.0);
  }
  c.add("variational", "duality bound |<h, v>| / (TV(h) ||v||_*) - 1", bound, 1e-4);
}

void dual_suite(Collector& c, Rng& rng) {
  const GridSpec g = GridSpec::centered_square(32, 1.0);
  const ScalarField f = random_field(g, rng);
  const ScalarField u = smooth_field(g, rng);
  double worst = 0.0;
  for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}, {1, 2}}) {
    ProblemParams pp;
    pp.p = p;
    pp.q = q;
    pp.kernel = {KernelFamily::Gaussian, 0.01};
    const ScalarField J = compute_dual_field(f, u, pp);
    const ScalarField F = convolve(build_multiplier(pp.kernel, g), f - u);
    const double target = q * std::pow(lp_norm(F, p), q);
    worst = std::max(worst, std::abs(inner(F, J) - target) / target);
  }
  c.add("variational", "J pairing <F, J> = q ||F||_p^q", worst, 1e-8);
}

void solver_suite(Collector& c, Rng& rng) {
  const GridSpec g = GridSpec::centered_square(32, 1.0);
  ShapeParams sp;
  sp.radius = 0.5;
  const ScalarField f = synthesize(Shape::Disk, sp, g);
  SolverConfig cfg;
  cfg.max_iter = 50000;
  cfg.gap_tol = 1e-8;

  ProblemParams rof;
  rof.p = rof.q = 2;
  rof.lambda = 8.0;
  const SolveResult r = solve(f, rof, cfg);
  const double e = energy(f, r.u, rof);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    ScalarField h = smooth_field(g, rng);
    h *= 1.0 / std::max(bv_seminorm(h), 1e-300);
    for (double eps : {1e-3, -1e-3}) worst = std::min(worst, minimality_probe(f, r.u, rof, h, eps));
  }
  c.add("variational", "minimality probes at ROF minimizer: -min delta / energy", -worst / e, 1e-6,
        r.converged ? "" : "solver did not reach gap_tol");

  ProblemParams below;
  below.p = below.q = 2;
  below.lambda = 1.0;  // lambda R <= 1 / alpha: u = 0 is optimal
  double worst0 = 0.0;
  const ScalarField zero(g);
  for (int k = 0; k < 20; ++k) {
    ScalarField h = smooth_field(g, rng);
    h *= 1.0 / std::max(bv_seminorm(h), 1e-300);
    for (double eps : {1e-3, -1e-3}) worst0 = std::min(worst0, minimality_probe(f, zero, below, h, eps));
  }
  c.add("variational", "minimality probes at u = 0 below threshold: -min delta", -worst0, 0.0);

  ProblemParams gp;
  gp.p = 2;
  gp.q = 1;
  gp.lambda = 2.0;
  gp.kernel = {KernelFamily::Gaussian, 0.004};
  const SolveResult a = solve(f, gp, cfg);
  const SolveResult b = solve(f, gp, cfg, &f);
  c.add("variational", "uniqueness (2,1): zero vs f start, relative L2", rel_l2(a.u, b.u), 1e-3);

  const SolveResult z = solve(ScalarField(g), rof, cfg);
  c.add("variational", "f = 0 gives u = 0", std::max(sup_norm(z.u), z.energy_trace.back()), 1e-12);
}

void experiments_suite(Collector& c, Rng& rng) {
  const GridSpec g = GridSpec::centered_square(128, 1.0);
  ShapeParams sp;
  sp.radius = 0.3;
  const ScalarField d = synthesize(Shape::Disk, sp, g);
  ProblemParams pp;
  pp.lambda = 10.0;
  const CurvatureReport cr = curvature_bound_check(d, pp);
  double worst = 0.0;
  for (double k : cr.curvatures) worst = std::max(worst, std::abs(k * 0.3 - 1.0));
  c.add("experiments", "curvature estimator on an exact disk (relative error)", worst, 0.1);

  const RadialProfile rp = radial_decompose(d, {0.0, 0.0}, 16);
  c.add("experiments", "radial profile of a disk: max bin cv", rp.max_cv, 1e-12);

  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> sig(32);
  double v = U(rng);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i % 4 == 0) v = U(rng);
    sig[i] = v;
  }
  ProblemParams op;
  op.p = op.q = 2;
  op.lambda = 4.0;
  const OracleResult o = oracle_1d(sig, 1.0 / 16, op);
  SolverConfig cfg;
  cfg.max_iter = 100000;
  cfg.gap_tol = 1e-9;
  const ScalarField f = lift_1d(sig, 1.0 / 16);
  const SolveResult r = solve(f, op, cfg);
  c.add("experiments", "1D oracle vs solver energy (p = q = 2)", std::abs(energy(f, r.u, op) - o.energy) / o.energy,
        1e-4);
}

}  // namespace

const std::vector<DipoleReference>& dipole_references() {
  static const std::vector<DipoleReference> refs{
      {3, 4, 4, 4, 0.037600846031},
      {3, 3, 3, 4, 0.037600846031},
      {3, 3, 4, 4, 0.036611652351},
  };
  return refs;
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  Rng rng(seed);
  Collector c;
  grid_suite(c, rng);
  kernel_suite(c, rng);
  prox_suite(c, rng);
  star_suite(c, rng);
  dual_suite(c, rng);
  solver_suite(c, rng);
  experiments_suite(c, rng);
  return c.out;
}

}  // namespace kbv
