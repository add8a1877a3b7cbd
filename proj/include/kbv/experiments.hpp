#pragma once

// Verification harnesses: radial step structure, threshold radius sweeps,
// self-minimizer and layer-cake checks, contour curvature bounds, the stripe
// construction and an independent 1D oracle.

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "kbv/variational.hpp"

namespace kbv {

// ---------------------------------------------------------------- radial

struct RadialLevel {
  double value = 0.0;
  /// Radial extent [r_inner, r_outer) of the plateau.
  double r_inner = 0.0;
  double r_outer = 0.0;
  std::size_t cells = 0;
};

struct RadialJump {
  double radius = 0.0;
  /// Inner level minus outer level.
  double increment = 0.0;
};

struct RadialProfile {
  std::pair<double, double> center{0.0, 0.0};
  std::vector<double> bin_edges;
  std::vector<double> bin_mean;
  std::vector<double> bin_cv;
  std::vector<std::size_t> bin_count;
  /// Plateaus of the profile with a nonzero value, innermost first.
  std::vector<RadialLevel> levels;
  /// Every plateau including the zero background, innermost first.
  std::vector<RadialLevel> plateaus;
  std::vector<RadialJump> jumps;
  /// Fraction of cells within 5% of the dynamic range of some plateau value.
  double coverage = 0.0;
  double max_cv = 0.0;
};

/// Annulus statistics about `center`. Bins are uniform on [0, r_max] with extra
/// edges at detected transition radii; bins with fewer than 8 cells are merged.
/// Values are clustered at gaps larger than 5% of the dynamic range.
RadialProfile radial_decompose(const ScalarField& u, std::pair<double, double> center, int nbins);

// ---------------------------------------------------------------- threshold

struct ThresholdEstimate {
  double lambda = 0.0;
  double t = 0.0;
  double r0 = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};
  /// (R, ||u||_1 / ||f||_1) for every solve, in evaluation order.
  std::vector<std::pair<double, double>> decision_curve;
  int solves = 0;
  bool all_converged = true;
};

/// Indicator of the disk of radius R about the origin, by cell-center membership.
ScalarField disk_indicator(const GridSpec& grid, double radius, std::pair<double, double> center = {0.0, 0.0});

/// ||u||_1 / ||f||_1 for f = disk_indicator(R).
double survival_ratio(double radius, const ProblemParams& params, const GridSpec& grid, const SolverConfig& config,
                      bool* converged = nullptr);

/// Bisection on R for the survival ratio crossing 1/2 (at most 12 steps, stops at
/// bracket width <= h). `params` supplies p, q and the kernel family; lambda and t
/// override. Throws BadBracket unless survival(lo) < 1/2 < survival(hi).
ThresholdEstimate estimate_r0(double lambda, double t, const ProblemParams& params, const GridSpec& grid,
                              std::pair<double, double> bracket, const SolverConfig& config);

struct SweepReport {
  std::vector<ThresholdEstimate> estimates;
  /// r0 nondecreasing along t within one bracket width.
  bool nondecreasing = true;
};

/// One estimate_r0 per t (t_list strictly increasing), run on up to `jobs` threads.
SweepReport monotonicity_sweep(double lambda, const std::vector<double>& t_list, const ProblemParams& params,
                               const GridSpec& grid, std::pair<double, double> bracket, const SolverConfig& config,
                               int jobs = 1);

// ---------------------------------------------------------------- fixed points

/// Re-solves with datum f = u and returns ||u* - u||_1 / max(||u||_1, eps). Requires q = 1.
double self_fixed_point_check(const ScalarField& u, const ProblemParams& params, const SolverConfig& config);

struct LevelDiscrepancy {
  double t = 0.0;
  double discrepancy = 0.0;
  /// Fraction of cells in {u > t}.
  double fraction = 0.0;
  bool skipped = false;
};

/// self_fixed_point_check on each superlevel indicator; levels covering < 1% or
/// > 99% of cells are skipped.
std::vector<LevelDiscrepancy> layer_cake_check(const ScalarField& u, const ProblemParams& params,
                                               const std::vector<double>& t_levels, const SolverConfig& config);

// ---------------------------------------------------------------- curvature

struct Polyline {
  std::vector<std::pair<double, double>> points;
  bool closed = false;
};

/// Marching squares on cell centers, joined into polylines.
std::vector<Polyline> extract_contours(const ScalarField& u, double level);

/// Signed curvature samples along each polyline: resample at arc spacing
/// `spacing`, then fit a circle through every 5 consecutive points.
std::vector<double> polyline_curvatures(const Polyline& line, double spacing);

struct CurvatureReport {
  std::vector<double> curvatures;
  double bound = 0.0;
  double kernel_norm = 0.0;
  double fraction_within = 0.0;
  double max_abs = 0.0;
  std::size_t contours = 0;
};

/// Contour curvature of the 0.5 level of a (near-)indicator field against
/// 1.1 lambda ||K||_p. The field is pre-smoothed by a Gaussian of width
/// `smoothing` cells (<= 0 disables) and contours are resampled every `spacing`
/// cells. With spacing <= 0 each contour gets spacing_factor * sqrt(rho h)
/// (at least 3 cells), rho = length / 2 pi. Throws NoContour when nothing is found.
CurvatureReport curvature_bound_check(const ScalarField& u_binary, const ProblemParams& params,
                                      double smoothing = 2.0, double spacing = 0.0, double spacing_factor = 1.5);

// ---------------------------------------------------------------- stripes

/// RK4 for y'' = U(x) (1 + y'^2)^(3/2) from (x0, y0, yp0) to x1 with the given
/// step (either direction). Returns (x, y) samples including both ends.
/// Throws OdeBlowup if |y'| exceeds 1e3.
std::vector<std::pair<double, double>> integrate_level_curve(const std::function<double(double)>& U, double x0,
                                                             double y0, double yp0, double x1, double step);

struct StripeInitial {
  /// Height of the middle level curve in every stripe.
  double y0 = 0.0;
  /// Initial slope at each stripe center (0 keeps curves inside the graph regime).
  double yp0 = 0.0;
};

struct StripeOptions {
  /// Height over which u climbs through its level curves inside one stripe.
  double ramp = 1.0;
  /// Value step between the ranges used on +1 and -1 stripes.
  double offset = 0.5;
  /// Half-height of the verification window around y0 (<= 0: whole torus only).
  double window = 0.0;
};

struct StripeCase {
  double lambda = 0.0;
  /// (max W - min W) / 2 for W the running integral of K * J, the exact star norm
  /// of an x-only field.
  double star_exact = 0.0;
  double star_computed = 0.0;
  ScalarField J;
  ScalarField U;
  ScalarField u;
  ScalarField f;
  std::vector<std::vector<std::pair<double, double>>> level_curves;
  OptimalityReport report;
  std::optional<OptimalityReport> window_report;
  ScalarField window;
  double curvature_median = 0.0;
  double curvature_p95 = 0.0;
  /// lambda ||K * J||_inf, the scale for the curvature residual.
  double curvature_scale = 0.0;
};

/// The period-2 stripe construction. `params` supplies the kernel (p = q = 1);
/// lambda is calibrated so that ||lambda K * J||_* = 1.
StripeCase stripe_example(const ProblemParams& params, const GridSpec& grid, const StripeInitial& init,
                          const StripeOptions& options, const SolverConfig& config);

// ---------------------------------------------------------------- 1D oracle

struct OracleResult {
  std::vector<double> u;
  double energy = 0.0;
  /// Smoothed minimum per epsilon, and the exact energy at each smoothed minimizer.
  std::vector<double> epsilons;
  std::vector<double> smoothed_energies;
  std::vector<double> exact_energies;
  double gradient_norm = 0.0;
};

/// Independent minimizer of the energy over fields that are constant in y on an
/// n x 4 grid of spacing h: pseudo-Huber smoothing, damped Newton, and
/// Richardson extrapolation of the smoothed minima to epsilon = 0.
OracleResult oracle_1d(const std::vector<double>& f, double h, const ProblemParams& params);

/// Lifts a 1D signal to the n x 4 grid used by the oracle.
ScalarField lift_1d(const std::vector<double>& f, double h);

}  // namespace kbv
