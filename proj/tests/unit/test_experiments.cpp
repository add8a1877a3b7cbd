#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kbv/experiments.hpp"
#include "kbv/synth.hpp"

using namespace kbv;

namespace {

ProblemParams params(int p, int q, double lambda, KernelSpec k = {}) {
  ProblemParams pp;
  pp.p = p;
  pp.q = q;
  pp.lambda = lambda;
  pp.kernel = k;
  return pp;
}

SolverConfig config(int max_iter = 20000, double gap_tol = 1e-6) {
  SolverConfig c;
  c.max_iter = max_iter;
  c.gap_tol = gap_tol;
  return c;
}

}  // namespace

TEST_CASE("radial profile of an exact disk") {
  const GridSpec g = GridSpec::centered_square(64, 1.0);
  const ScalarField u = disk_indicator(g, 0.5);
  const RadialProfile pr = radial_decompose(u, {0.0, 0.0}, 16);
  REQUIRE(pr.levels.size() == 1);
  CHECK(pr.levels[0].value == doctest::Approx(1.0));
  CHECK(std::abs(pr.levels[0].r_outer - 0.5) <= g.h);
  CHECK(pr.max_cv <= 1e-12);
  CHECK(pr.coverage == doctest::Approx(1.0));
  for (std::size_t k = 0; k < pr.bin_count.size(); ++k) CHECK(pr.bin_count[k] >= 8);

  CHECK(radial_decompose(ScalarField(g), {0.0, 0.0}, 16).levels.empty());
}

TEST_CASE("radial profile of a two-step image") {
  const GridSpec g = GridSpec::centered_square(64, 1.0);
  ShapeParams sp;
  sp.radii = {0.6, 0.3};
  sp.values = {1.0, 0.5};
  const ScalarField u = synthesize(Shape::Steps, sp, g);
  const RadialProfile pr = radial_decompose(u, {0.0, 0.0}, 16);
  REQUIRE(pr.levels.size() == 2);
  CHECK(pr.levels[0].value == doctest::Approx(1.5));
  CHECK(pr.levels[1].value == doctest::Approx(1.0));
  REQUIRE(pr.jumps.size() >= 2);
  CHECK(pr.jumps[0].increment == doctest::Approx(0.5));
  CHECK(std::abs(pr.jumps[0].radius - 0.3) <= g.h);
}

TEST_CASE("threshold estimation preconditions") {
  const GridSpec g = GridSpec::centered_square(32, 1.0);
  const ProblemParams pp = params(1, 1, 10.0);
  CHECK_THROWS_AS(estimate_r0(10.0, 0.0, pp, g, {0.3, 0.1}, config(100)), Error);
  try {
    // Both ends far above the threshold: the disk survives at r_lo already.
    estimate_r0(10.0, 0.0, pp, g, {0.5, 0.6}, config(3000));
    FAIL("expected BadBracket");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadBracket);
  }
  CHECK_THROWS_AS(monotonicity_sweep(10.0, {0.004, 0.004}, params(1, 1, 10.0, {KernelFamily::Gaussian, 0.0}), g,
                                     {0.1, 0.3}, config(100)),
                  Error);
}

TEST_CASE("disk indicator") {
  const GridSpec g = GridSpec::centered_square(256, 1.0);
  const ScalarField d = disk_indicator(g, 0.5);
  CHECK(d.integral() == doctest::Approx(std::numbers::pi * 0.25).epsilon(0.01));
  CHECK(d.max() == 1.0);
  CHECK(d.min() == 0.0);
}

TEST_CASE("self fixed point and layer cake") {
  const GridSpec g = GridSpec::centered_square(64, 1.0);
  const ProblemParams pp = params(1, 1, 10.0);
  CHECK(self_fixed_point_check(ScalarField(g), pp, config()) == 0.0);
  CHECK_THROWS_AS(self_fixed_point_check(ScalarField(g), params(2, 2, 10.0), config()), Error);

  // lambda R = 5, far above the threshold: the disk is its own minimizer.
  const ScalarField u = disk_indicator(g, 0.5);
  const double own = self_fixed_point_check(u, pp, config());
  CHECK(own <= 0.05);

  const auto levels = layer_cake_check(u, pp, {0.5, 2.0}, config());
  REQUIRE(levels.size() == 2);
  CHECK_FALSE(levels[0].skipped);
  CHECK(levels[0].discrepancy == doctest::Approx(own).epsilon(1e-12));
  CHECK(levels[1].skipped);
}

TEST_CASE("contour curvature of exact disks") {
  for (int n : {128, 256}) {
    const GridSpec g = GridSpec::centered_square(n, 1.0);
    for (double r : {0.2, 0.3, 0.5}) {
      const CurvatureReport rep = curvature_bound_check(disk_indicator(g, r), params(1, 1, 1.0));
      CHECK(rep.contours == 1);
      for (double k : rep.curvatures) CHECK(std::abs(k * r - 1.0) <= 0.1);
    }
  }
}

TEST_CASE("contour curvature separates a square") {
  ShapeParams sp;
  sp.side = 0.8;
  // Bound 1.1 * 5: a disk of the square's inradius (kappa = 2.5) passes it.
  const ProblemParams pp = params(1, 1, 5.0);
  double previous = 0.0;
  for (int n : {64, 128, 256}) {
    const GridSpec g = GridSpec::centered_square(n, 1.0);
    const CurvatureReport rep = curvature_bound_check(synthesize(Shape::Square, sp, g), pp);
    CHECK(rep.max_abs > previous);
    previous = rep.max_abs;
    if (n == 256) CHECK(rep.max_abs > rep.bound);
  }
  const GridSpec g = GridSpec::centered_square(64, 1.0);
  CHECK(curvature_bound_check(disk_indicator(g, 0.4), pp).max_abs < 1.1 * 5.0);
  CHECK_THROWS_AS(curvature_bound_check(ScalarField(g), pp), Error);
  CHECK_THROWS_AS(curvature_bound_check(disk_indicator(g, 0.4), pp, 2.0, 0.0, 0.0), Error);
}

TEST_CASE("contours are oriented with the superlevel set on the left") {
  const GridSpec g = GridSpec::centered_square(64, 1.0);
  const auto lines = extract_contours(disk_indicator(g, 0.4), 0.5);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].closed);
  double area2 = 0.0;
  const auto& p = lines[0].points;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& a = p[k];
    const auto& b = p[(k + 1) % p.size()];
    area2 += a.first * b.second - b.first * a.second;
  }
  CHECK(area2 > 0.0);
}

TEST_CASE("level curve ODE") {
  const auto line = integrate_level_curve([](double) { return 0.0; }, 0.0, 1.0, 0.5, 2.0, 0.01);
  for (const auto& [x, y] : line) CHECK(y == doctest::Approx(1.0 + 0.5 * x).epsilon(1e-12));
  CHECK(line.back().first == doctest::Approx(2.0));

  // Constant unit curvature: a circle of radius 1 through (0, 0) with horizontal tangent.
  const auto arc = integrate_level_curve([](double) { return 1.0; }, 0.0, 0.0, 0.0, 0.8, 0.001);
  for (const auto& [x, y] : arc) CHECK(y == doctest::Approx(1.0 - std::sqrt(1.0 - x * x)).epsilon(1e-9));
  const auto back = integrate_level_curve([](double) { return 1.0; }, 0.0, 0.0, 0.0, -0.8, 0.001);
  CHECK(back.back().second == doctest::Approx(arc.back().second).epsilon(1e-9));

  try {
    integrate_level_curve([](double) { return 1.0; }, 0.0, 0.0, 0.0, 1.5, 0.001);
    FAIL("expected OdeBlowup");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OdeBlowup);
  }
}

TEST_CASE("stripe construction") {
  const GridSpec g{64, 64, 1.0 / 16};
  const ProblemParams pp = params(1, 1, 1.0, {KernelFamily::Gaussian, 0.016});
  StripeOptions opt;
  opt.ramp = 1.0;
  opt.offset = 0.5;
  const StripeCase a = stripe_example(pp, g, {0.0, 0.0}, opt, config());
  const StripeCase b = stripe_example(pp, g, {0.7, 0.0}, opt, config());

  CHECK(a.star_computed == doctest::Approx(a.star_exact).epsilon(0.01));
  CHECK(a.lambda * a.star_computed == doctest::Approx(1.0));
  CHECK(a.report.residual_35 <= 0.01);
  for (std::size_t k = 0; k < a.J.size(); ++k) {
    CHECK(std::abs(a.J[k]) == 1.0);
    CHECK(a.f[k] - a.u[k] == doctest::Approx(a.J[k]));
  }
  CHECK(a.J.sum() == 0.0);
  CHECK(a.level_curves.size() == 4);
  // The level curves solve the ODE, so the curvature equation holds on the smooth part.
  CHECK(a.curvature_median <= 0.1 * a.curvature_scale);
  CHECK(lp_norm(a.u - b.u, 1) > 0.1);

  CHECK_THROWS_AS(stripe_example(params(2, 2, 1.0, {KernelFamily::Gaussian, 0.016}), g, {}, opt, config()), Error);
  CHECK_THROWS_AS(stripe_example(pp, GridSpec{48, 64, 1.0 / 16}, {}, opt, config()), Error);
}

TEST_CASE("one-dimensional oracle") {
  const double h = 1.0 / 32;
  std::vector<double> zero(32, 0.0), constant(32, 0.7);
  for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}}) {
    const ProblemParams pp = params(p, q, 2.0, {KernelFamily::Gaussian, 0.01});
    const OracleResult z = oracle_1d(zero, h, pp);
    CHECK(std::abs(z.energy) <= 1e-9);
    const OracleResult c = oracle_1d(constant, h, pp);
    CHECK(std::abs(c.energy) <= 1e-9);
    for (double v : c.u) CHECK(v == doctest::Approx(0.7).epsilon(1e-6));
  }

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> f(32);
  double v = 0.0;
  for (int i = 0; i < 32; ++i) {
    if (i % 4 == 0) v = U(rng);
    f[i] = v;
  }
  const ProblemParams pp = params(2, 2, 4.0);
  const OracleResult o = oracle_1d(f, h, pp);
  const ScalarField lifted = lift_1d(f, h);
  CHECK(lifted.grid().ny == 4);
  const SolveResult r = solve(lifted, pp, config(200000, 1e-10));
  CHECK(std::abs(energy(lifted, r.u, pp) - o.energy) <= 1e-4 * o.energy);

  CHECK_THROWS_AS(oracle_1d(std::vector<double>(3, 0.0), h, pp), Error);
  CHECK_THROWS_AS(oracle_1d(std::vector<double>(65, 0.0), h, pp), Error);
}
