#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kbv/experiments.hpp"
#include "kbv/selftest.hpp"
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

ScalarField disk(int n, double r) { return disk_indicator(GridSpec::centered_square(n, 1.0), r); }

double disk_mean(const ScalarField& u, double r, bool inside) {
  const GridSpec& g = u.grid();
  double s = 0.0;
  int count = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double d = std::hypot(g.x_center(i), g.y_center(j));
      if (inside ? d < r - 2.0 * g.h : d > r + 2.0 * g.h) {
        s += inside ? u(i, j) : std::abs(u(i, j));
        ++count;
      }
    }
  }
  return s / count;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(3, 1, 1.0).validate(), Error);
  CHECK_THROWS_AS(params(1, 1, 0.0).validate(), Error);
  CHECK_THROWS_AS(params(1, 1, -1.0).validate(), Error);
  CHECK_NOTHROW(params(2, 1, 1.0).validate());
}

TEST_CASE("energy special cases") {
  const GridSpec g = GridSpec::centered_square(32, 1.0);
  const ScalarField f = disk(32, 0.5);
  for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}, {1, 2}}) {
    CHECK(energy(f, f, params(p, q, 3.0)) == doctest::Approx(bv_seminorm(f)));
  }
  CHECK(energy(f, ScalarField(g), params(1, 1, 3.0)) == doctest::Approx(3.0 * lp_norm(f, 1)));

  // Square of side L: removing it costs lambda L^2, keeping it costs its perimeter.
  ScalarField sq(g);
  for (int j = 10; j < 18; ++j) {
    for (int i = 12; i < 20; ++i) sq(i, j) = 1.0;
  }
  const double L = 8 * g.h;
  const double remove = energy(sq, ScalarField(g), params(1, 1, 1.0));
  const double keep = energy(sq, sq, params(1, 1, 1.0));
  CHECK(remove == doctest::Approx(L * L));
  CHECK(keep == doctest::Approx(4.0 * L + (std::sqrt(2.0) - 2.0) * g.h));
  CHECK(remove < keep);
}

TEST_CASE("dual field formulas") {
  const GridSpec g{8, 8, 0.25};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N;
  ScalarField F(g);
  for (std::size_t k = 0; k < F.size(); ++k) F[k] = N(rng);
  F[3] = 0.0;

  const ScalarField j11 = dual_field_from_residual(F, 1, 1);
  for (std::size_t k = 0; k < F.size(); ++k) CHECK(j11[k] == (F[k] > 0 ? 1.0 : F[k] < 0 ? -1.0 : 0.0));
  const ScalarField j22 = dual_field_from_residual(F, 2, 2);
  for (std::size_t k = 0; k < F.size(); ++k) CHECK(j22[k] == doctest::Approx(2.0 * F[k]));
  const ScalarField j21 = dual_field_from_residual(F, 2, 1);
  const double n2 = lp_norm(F, 2);
  for (std::size_t k = 0; k < F.size(); ++k) CHECK(j21[k] == doctest::Approx(F[k] / n2));

  for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}, {1, 2}}) {
    const ScalarField J = dual_field_from_residual(F, p, q);
    const double expect = q * std::pow(lp_norm(F, p), q);
    CHECK(std::abs(inner(F, J) - expect) <= 1e-8 * expect);
  }

  const ScalarField f = disk(16, 0.5);
  try {
    compute_dual_field(f, f, params(1, 1, 1.0));
    FAIL("expected DegenerateFidelity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateFidelity);
  }
}

TEST_CASE("ROF disk shrinkage") {
  const ScalarField f = disk(64, 0.5);
  const SolveResult r = solve(f, params(2, 2, 8.0), config(40000));
  CHECK(r.gap_trace.back() <= 1e-4);
  CHECK(disk_mean(r.u, 0.5, true) == doctest::Approx(0.75).epsilon(0.04));
  // On the torus the complement is bounded too and settles at Per / (2 lambda |complement|).
  const double background = std::numbers::pi * 0.5 / (2.0 * 8.0 * (4.0 - std::numbers::pi * 0.25));
  CHECK(disk_mean(r.u, 0.5, false) == doctest::Approx(background).epsilon(0.1));
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(r.v[k] == doctest::Approx(f[k] - r.u[k]));

  const OptimalityReport rep = verify_optimality(f, r.u, params(2, 2, 8.0), config());
  CHECK(rep.residual_35 <= 0.05);
  CHECK(rep.residual_36 <= 0.05);
}

TEST_CASE("L1 disk above and below the threshold") {
  const SolverConfig c = config(20000, 1e-6);
  const ScalarField big = disk(128, 0.3);
  const SolveResult keep = solve(big, params(1, 1, 10.0), c);
  CHECK(lp_norm(keep.u - big, 1) / lp_norm(big, 1) <= 0.05);

  const ScalarField small = disk(128, 0.15);
  const SolveResult drop = solve(small, params(1, 1, 10.0), c);
  CHECK(lp_norm(drop.u, 1) / lp_norm(small, 1) <= 0.05);
}

TEST_CASE("zero datum") {
  const GridSpec g = GridSpec::centered_square(16, 1.0);
  for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}}) {
    const SolveResult r = solve(ScalarField(g), params(p, q, 2.0, {KernelFamily::Gaussian, 0.01}), config(200));
    CHECK(sup_norm(r.u) == 0.0);
    CHECK(energy(ScalarField(g), r.u, params(p, q, 2.0)) == 0.0);
  }
}

TEST_CASE("star norm") {
  const GridSpec g{8, 8, 0.125};
  const SolverConfig c = config(200000, 1e-9);
  CHECK(star_norm(ScalarField(g), c).value == 0.0);

  for (const DipoleReference& d : dipole_references()) {
    ScalarField v(g);
    v(d.plus_i, d.plus_j) = 1.0;
    v(d.minus_i, d.minus_j) = -1.0;
    const StarNormResult s = star_norm(v, c);
    CHECK(s.converged);
    CHECK(std::abs(s.value - d.value) <= 1e-4 * d.value);
    CHECK(s.lower_bound <= s.value * (1.0 + 1e-12));
    CHECK(s.feasibility <= 1e-6);

    const StarNormResult scaled = star_norm(-3.0 * v, c);
    CHECK(scaled.value == doctest::Approx(3.0 * s.value).epsilon(1e-4));
  }

  ScalarField biased(g, 0.0);
  biased(1, 1) = 1.0;
  try {
    star_norm(biased, c);
    FAIL("expected NonzeroMean");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonzeroMean);
  }
}

TEST_CASE("optimality from the solver's dual selection") {
  // At p = q = 1 the surviving disk leaves K * (f - u) at round-off level.
  const ScalarField f = disk(64, 0.4);
  const ProblemParams pp = params(1, 1, 15.0, {KernelFamily::Gaussian, 0.004});
  const SolveResult r = solve(f, pp, config(20000), &f);
  const ScalarField J = solver_dual_field(r, pp);
  CHECK(sup_norm(J) <= 1.0 + 1e-9);
  const OptimalityReport rep = verify_optimality_with_dual(r.u, J, pp, config(100000));
  CHECK(rep.residual_35 <= 0.05);
  CHECK(rep.residual_36 <= 0.05);
  CHECK(rep.star_lower_bound <= rep.star_value * (1.0 + 1e-9));

  // A dual field scaled off the unit ball breaks the norm condition.
  const OptimalityReport off = verify_optimality_with_dual(r.u, 0.5 * J, pp, config(100000));
  CHECK(off.residual_35 >= 0.4);
  CHECK_THROWS_AS(verify_optimality_with_dual(r.u, ScalarField(GridSpec::centered_square(32, 1.0)), pp, config()),
                  Error);
}

TEST_CASE("optimality report flags a shifted non-minimizer") {
  const ScalarField f = disk(32, 0.4);
  ScalarField u = f;
  for (std::size_t k = 0; k < u.size(); ++k) u[k] += 0.3;
  const OptimalityReport rep = verify_optimality(f, u, params(1, 1, 10.0, {KernelFamily::Gaussian, 0.004}), config());
  CHECK(rep.residual_35 > 0.5);
}

TEST_CASE("minimality probes") {
  const ScalarField f = disk(32, 0.3);
  const ProblemParams below = params(2, 2, 2.0);  // lambda R = 0.6 < 1: u = 0 is optimal
  const GridSpec& g = f.grid();
  CHECK(minimality_probe(f, ScalarField(g), below, ScalarField(g), 1e-3) == 0.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = U(rng), b = U(rng), c = U(rng);
    ScalarField h(g);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.x_center(i), y = g.y_center(j);
        h(i, j) = a * std::cos(std::numbers::pi * x) + b * std::sin(std::numbers::pi * y) + c * std::exp(-8 * (x * x + y * y));
      }
    }
    h *= 1.0 / bv_seminorm(h);
    CHECK(minimality_probe(f, ScalarField(g), below, h, 1e-3) >= 0.0);
  }
}

TEST_CASE("curvature residual") {
  const ScalarField f = disk(32, 0.4);
  try {
    curvature_residual(f, f, params(1, 1, 10.0, {KernelFamily::Gaussian, 0.004}));
    FAIL("expected EmptyMask or DegenerateFidelity");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::EmptyMask || e.kind() == ErrorKind::DegenerateFidelity));
  }
  // Piecewise-constant u away from f: no cell has a nonzero gradient direction to test.
  const GridSpec& g = f.grid();
  ScalarField u(g);
  try {
    curvature_residual(f, u, params(1, 1, 10.0, {KernelFamily::Gaussian, 0.004}));
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyMask);
  }

  ScalarField smooth(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      smooth(i, j) = std::exp(-4.0 * (g.x_center(i) * g.x_center(i) + g.y_center(j) * g.y_center(j)));
    }
  }
  const ProblemParams pp = params(2, 2, 3.0, {KernelFamily::Gaussian, 0.01});
  const CurvatureResidual a = curvature_residual(f, smooth, pp);
  const CurvatureResidual b = curvature_residual(-1.0 * f, -1.0 * smooth, pp);
  for (std::size_t k = 0; k < a.residual.size(); ++k) {
    CHECK(a.mask[k] == b.mask[k]);
    CHECK(b.residual[k] == doctest::Approx(-a.residual[k]).epsilon(1e-12));
  }
}
