#pragma once

// The kernel-smoothed BV decomposition problem
//
//   minimize  E(u) = ||u||_BV + lambda * ||K * (f - u)||_p^q ,   (p, q) in {1, 2}^2
//
// together with the optimality machinery around it: the dual field
// J = q F |F|^(p-2) / ||F||_p^(p-q) with F = K * (f - u), the star (G-) norm,
// and the checks a minimizer must pass.

#include <cstdint>
#include <optional>
#include <vector>

#include "kbv/grid.hpp"
#include "kbv/kernels.hpp"

namespace kbv {

struct ProblemParams {
  int p = 1;
  int q = 1;
  double lambda = 1.0;
  KernelSpec kernel;

  void validate() const;
};

struct SolverConfig {
  int max_iter = 20000;
  /// Stop once (best primal - best dual) / best primal <= gap_tol.
  double gap_tol = 1e-6;
  /// Primal / dual step sizes; chosen from the operator norm and step_ratio when unset.
  std::optional<double> tau;
  std::optional<double> sigma;
  double theta = 1.0;
  /// Iterations between gap evaluations.
  int check_every = 10;
  int power_iterations = 50;
  /// Default steps: tau = step_ratio / L, sigma = 1 / (step_ratio L).
  double step_ratio = 0.03;
  std::uint64_t seed = 20240531;
};

struct SolveResult {
  ScalarField u;
  ScalarField v;
  std::vector<double> energy_trace;
  std::vector<double> gap_trace;
  int iterations = 0;
  bool converged = false;
  /// Dual fields at the returned iterate: phi pairs with grad u, psi with K u.
  VectorField tv_dual;
  ScalarField fidelity_dual;
};

struct OptimalityReport {
  double star_value = 0.0;
  double pairing = 0.0;
  double bv_value = 0.0;
  double residual_35 = 0.0;
  double residual_36 = 0.0;
  /// Mean of K * J removed before the star norm (torus G-norms need mean zero).
  double removed_mean = 0.0;
  double star_lower_bound = 0.0;
  bool star_converged = false;
};

struct StarNormResult {
  /// max |w| of the returned feasible witness (an upper bound on the star norm).
  double value = 0.0;
  /// <h, v> / TV(h) for the returned dual potential h (a lower bound).
  double lower_bound = 0.0;
  /// ||div w - v||_2 / ||v||_2.
  double feasibility = 0.0;
  int iterations = 0;
  bool converged = false;
  VectorField witness;
};

/// Guard constants for degenerate cases.
struct Guards {
  static double fidelity_floor(const GridSpec& g) { return 1e-12 * g.area(); }
  static constexpr double mean_tolerance = 1e-8;
};

double energy(const ScalarField& f, const ScalarField& u, const ProblemParams& params);
double energy(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
              const SpectralKernel& kernel);

/// J_{p,q} evaluated from F = K * (f - u). sign(0) = 0 at p = 1.
/// Throws DegenerateFidelity if ||F||_p <= 1e-12 * area.
ScalarField compute_dual_field(const ScalarField& f, const ScalarField& u, const ProblemParams& params);
ScalarField dual_field_from_residual(const ScalarField& F, int p, int q);

/// First-order primal-dual (Chambolle-Pock) solve of the saddle form with the
/// stacked operator u -> (grad u, K u). Starts from zero unless `initial` is given.
SolveResult solve(const ScalarField& f, const ProblemParams& params, const SolverConfig& config,
                  const ScalarField* initial = nullptr);

/// Estimate of ||(grad, gamma K)|| by deterministic power iteration.
double estimate_operator_norm(const SpectralKernel& kernel, double gamma, int iterations,
                              std::uint64_t seed);

/// min max_k |w_k| over vector fields with div w = v. Requires |int v| <= 1e-8 ||v||_1.
StarNormResult star_norm(const ScalarField& v, const SolverConfig& config);

/// Restricts the pairing and BV terms of a report to cells where region > 0.5.
/// An empty optional means the whole torus.
using Region = std::optional<ScalarField>;

OptimalityReport verify_optimality(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
                                   const SolverConfig& config, const Region& region = std::nullopt);

/// The same report for an explicit dual field J. At p = 1 the field is
/// set-valued wherever K * (f - u) vanishes; pass the solver's selection then.
OptimalityReport verify_optimality_with_dual(const ScalarField& u, const ScalarField& J, const ProblemParams& params,
                                             const SolverConfig& config, const Region& region = std::nullopt);

/// J recovered from the fidelity dual of a solve: -psi / lambda.
ScalarField solver_dual_field(const SolveResult& result, const ProblemParams& params);

/// energy(f, u + eps h) - energy(f, u).
double minimality_probe(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
                        const ScalarField& h, double eps);

struct CurvatureResidual {
  ScalarField residual;
  ScalarField mask;
  double median = 0.0;
  double p95 = 0.0;
  std::size_t mask_cells = 0;
};

/// r = div(grad u / |grad u|) + lambda K * J on {|grad u| > delta_grad}.
/// delta_grad <= 0 selects 1e-3 (max u - min u) / h. Throws EmptyMask below 1% coverage.
CurvatureResidual curvature_residual(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
                                     double delta_grad = 0.0);

}  // namespace kbv
