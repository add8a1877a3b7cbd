#include "kbv/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kbv/fourier.hpp"
#include "kbv/prox.hpp"

namespace kbv {
namespace {

double pow_q(double x, int q) { return q == 1 ? x : x * x; }

double fidelity_value(const ScalarField& F, const ProblemParams& params) {
  return params.lambda * pow_q(lp_norm(F, params.p), params.q);
}

// Convex conjugate g* of g(z) = lambda ||z||_p^q, restricted to the scaled ray s * psi
// that keeps g* finite; returns the best dual value -s <psi, b> - g*(s psi).
double best_dual_on_ray(const ScalarField& psi, const ScalarField& b, const ProblemParams& params,
                        double s_max) {
  const double a = inner(psi, b);
  const double lam = params.lambda;
  double quad = 0.0;  // g*(s psi) = s^2 * quad for the smooth conjugates
  if (params.p == 1 && params.q == 1) {
    const double m = sup_norm(psi);
    if (m > 0.0) s_max = std::min(s_max, lam / m);
  } else if (params.p == 2 && params.q == 1) {
    const double m = lp_norm(psi, 2);
    if (m > 0.0) s_max = std::min(s_max, lam / m);
  } else if (params.p == 2 && params.q == 2) {
    const double m = lp_norm(psi, 2);
    quad = m * m / (4.0 * lam);
  } else {
    const double m = sup_norm(psi);
    quad = m * m / (4.0 * lam);
  }
  double s = 0.0;
  if (quad > 0.0) {
    s = std::clamp(-a / (2.0 * quad), 0.0, s_max);
  } else {
    s = (-a > 0.0) ? s_max : 0.0;
  }
  return -s * a - s * s * quad;
}

ScalarField scaled(const ScalarField& u, double c) {
  ScalarField out = u;
  out *= c;
  return out;
}

}  // namespace

void ProblemParams::validate() const {
  const bool ok_exp = (p == 1 || p == 2) && (q == 1 || q == 2);
  if (!ok_exp) throw Error(ErrorKind::InvalidArgument, "supported exponents are (p, q) in {1, 2}^2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be finite and positive");
  }
  if (!std::isfinite(kernel.t) || kernel.t < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "kernel scale t must be finite and >= 0");
  }
}

double energy(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
              const SpectralKernel& kernel) {
  require_same_grid(f.grid(), u.grid(), "energy");
  return bv_seminorm(u) + fidelity_value(convolve(kernel, f - u), params);
}

double energy(const ScalarField& f, const ScalarField& u, const ProblemParams& params) {
  params.validate();
  return energy(f, u, params, build_multiplier(params.kernel, f.grid()));
}

ScalarField dual_field_from_residual(const ScalarField& F, int p, int q) {
  const double norm = lp_norm(F, p);
  ScalarField J(F.grid());
  if (p == 1) {
    const double c = q * std::pow(norm, q - 1);
    for (std::size_t k = 0; k < F.size(); ++k) {
      J[k] = F[k] > 0.0 ? c : (F[k] < 0.0 ? -c : 0.0);
    }
  } else {
    const double c = q / std::pow(norm, 2 - q);
    for (std::size_t k = 0; k < F.size(); ++k) J[k] = c * F[k];
  }
  return J;
}

ScalarField compute_dual_field(const ScalarField& f, const ScalarField& u, const ProblemParams& params) {
  params.validate();
  require_same_grid(f.grid(), u.grid(), "compute_dual_field");
  const SpectralKernel kernel = build_multiplier(params.kernel, f.grid());
  const ScalarField F = convolve(kernel, f - u);
  if (lp_norm(F, params.p) <= Guards::fidelity_floor(f.grid())) {
    throw Error(ErrorKind::DegenerateFidelity, "||K*(f-u)||_p vanishes");
  }
  return dual_field_from_residual(F, params.p, params.q);
}

double estimate_operator_norm(const SpectralKernel& kernel, double gamma, int iterations,
                              std::uint64_t seed) {
  const GridSpec& g = kernel.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ScalarField x(g);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = normal(rng);
  x *= 1.0 / lp_norm(x, 2);
  double rayleigh = 0.0;
  for (int it = 0; it < iterations; ++it) {
    ScalarField y = scaled(divergence(gradient(x)), -1.0);
    y += scaled(convolve(kernel, convolve(kernel, x)), gamma * gamma);
    rayleigh = inner(x, y);
    const double n = lp_norm(y, 2);
    if (n == 0.0) break;
    x = scaled(y, 1.0 / n);
  }
  return std::sqrt(std::max(rayleigh, 0.0));
}

SolveResult solve(const ScalarField& f, const ProblemParams& params, const SolverConfig& config,
                  const ScalarField* initial) {
  params.validate();
  const GridSpec& g = f.grid();
  g.validate();
  if (!f.all_finite()) throw Error(ErrorKind::InvalidArgument, "datum f has non-finite entries");
  if (initial) require_same_grid(g, initial->grid(), "solve");
  if (config.max_iter < 1 || config.check_every < 1) {
    throw Error(ErrorKind::InvalidArgument, "max_iter and check_every must be positive");
  }
  if (config.theta < 0.0 || config.theta > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "theta must lie in [0, 1]");
  }
  if (!(config.step_ratio > 0.0)) throw Error(ErrorKind::InvalidArgument, "step_ratio must be positive");

  const SpectralKernel kernel = build_multiplier(params.kernel, g);
  const bool identity = kernel.is_identity();
  const ScalarField b = convolve(kernel, f);
  const double h2 = g.cell_area();
  const double lam = params.lambda;
  const std::size_t n = g.size();

  // The fidelity block is weighted by gamma ~ ||grad|| so both dual blocks see
  // comparable steps; psi then uses sigma * gamma^2.
  const double gamma = 2.0 * std::sqrt(2.0) / g.h;
  const double L = 1.01 * estimate_operator_norm(kernel, gamma, config.power_iterations, config.seed);
  const double tau = config.tau.value_or(config.step_ratio / L);
  const double sigma = config.sigma.value_or(1.0 / (tau * L * L));
  if (!(tau > 0.0) || !(sigma > 0.0) || tau * sigma * L * L > 1.0 + 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "step sizes violate tau * sigma * L^2 <= 1");
  }
  const double sigma_fid = sigma * gamma * gamma;

  SolveResult res;
  ScalarField u = initial ? *initial : ScalarField(g);
  VectorField phi(g);
  ScalarField psi(g);

  ScalarField best_u = u;
  VectorField best_phi = phi;
  ScalarField best_psi = psi;
  double best_primal = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();

  // Best primal energy so far, and a certified dual value built from (phi, psi):
  // center psi, repair div phi = K psi with a Poisson solve, then scale into the
  // dual feasible set.
  auto evaluate = [&]() {
    const double primal = energy(f, u, params, kernel);
    if (primal < best_primal) {
      best_primal = primal;
      best_u = u;
      best_phi = phi;
      best_psi = psi;
    }
    ScalarField psibar = psi;
    const double m = mean(psibar);
    for (double& x : psibar.values()) x -= m;
    const ScalarField r = convolve(kernel, psibar) - divergence(phi);
    const VectorField corr = gradient(fourier::solve_poisson(r));
    double phimax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      phimax = std::max(phimax, std::hypot(phi.x()[k] + corr.x()[k], phi.y()[k] + corr.y()[k]));
    }
    const double s_max = 1.0 / std::max(1.0, phimax);
    best_dual = std::max(best_dual, best_dual_on_ray(psibar, b, params, s_max));
    const double gap = best_primal > 0.0 ? std::max(0.0, best_primal - best_dual) / best_primal : 0.0;
    res.energy_trace.push_back(best_primal);
    res.gap_trace.push_back(gap);
    return gap <= config.gap_tol;
  };

  if (evaluate()) {
    res.converged = true;
  } else {
    const double th = config.theta;
    // Images of the current and previous primal iterate under (grad, K); the
    // extrapolated point is handled by linearity.
    VectorField gu = gradient(u);
    ScalarField ku = convolve(kernel, u);
    VectorField gu_prev = gu;
    ScalarField ku_prev = ku;
    std::vector<double> work(n);

    for (int it = 1; it <= config.max_iter; ++it) {
      // Dual ascent on the TV block: project onto the pointwise unit ball.
      for (std::size_t k = 0; k < n; ++k) {
        phi.x()[k] += sigma * ((1.0 + th) * gu.x()[k] - th * gu_prev.x()[k]);
        phi.y()[k] += sigma * ((1.0 + th) * gu.y()[k] - th * gu_prev.y()[k]);
      }
      prox::project_unit_ball(phi.x(), phi.y());

      // Dual ascent on the fidelity block via Moreau:
      // prox_{s F*}(y) = y - s (b + prox_{(lambda/s) g}(y/s - b)).
      for (std::size_t k = 0; k < n; ++k) {
        const double y = psi[k] + sigma_fid * ((1.0 + th) * ku[k] - th * ku_prev[k]);
        psi[k] = y;
        work[k] = y / sigma_fid - b[k];
      }
      prox::fidelity(work, params.p, params.q, lam / sigma_fid, h2);
      for (std::size_t k = 0; k < n; ++k) psi[k] -= sigma_fid * (b[k] + work[k]);

      // Primal descent along -A^T (phi, psi) = div phi - K psi.
      const ScalarField dphi = divergence(phi);
      const ScalarField kpsi = identity ? psi : convolve(kernel, psi);
      for (std::size_t k = 0; k < n; ++k) u[k] += tau * (dphi[k] - kpsi[k]);
      std::swap(gu, gu_prev);
      std::swap(ku, ku_prev);
      gu = gradient(u);
      ku = convolve(kernel, u);

      res.iterations = it;
      if (it % config.check_every == 0 || it == config.max_iter) {
        if (evaluate()) {
          res.converged = true;
          break;
        }
      }
    }
  }

  res.u = best_u;
  res.v = f - best_u;
  res.tv_dual = best_phi;
  res.fidelity_dual = best_psi;
  return res;
}

StarNormResult star_norm(const ScalarField& v, const SolverConfig& config) {
  const GridSpec& g = v.grid();
  double abs_sum = 0.0;
  for (double x : v.values()) abs_sum += std::abs(x);
  StarNormResult res;
  res.witness = VectorField(g);
  if (abs_sum == 0.0) {
    res.converged = true;
    return res;
  }
  if (std::abs(v.sum()) > Guards::mean_tolerance * abs_sum) {
    throw Error(ErrorKind::NonzeroMean, "star norm on the torus needs a mean-zero field");
  }
  const double vnorm = lp_norm(v, 2);

  // Minimal-L2 particular solution, then Chambolle-Pock on
  //   min_w max_k |w_k|  s.t.  div w = v   (multiplier h).
  auto make_feasible = [&](const VectorField& w) {
    ScalarField defect = v - divergence(w);
    const VectorField corr = gradient(fourier::solve_poisson(defect));
    VectorField out = w;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out.x()[k] += corr.x()[k];
      out.y()[k] += corr.y()[k];
    }
    return out;
  };

  VectorField w = make_feasible(VectorField(g));
  VectorField wbar = w;
  ScalarField hpot(g);
  const double L = 2.0 * std::sqrt(2.0) / g.h;
  const double tau = config.tau.value_or(1.0 / L);
  const double sigma = config.sigma.value_or(1.0 / (tau * L * L));
  if (!(tau > 0.0) || !(sigma > 0.0) || tau * sigma * L * L > 1.0 + 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "step sizes violate tau * sigma * ||div||^2 <= 1");
  }
  const double budget = tau / g.cell_area();

  double best_upper = std::numeric_limits<double>::infinity();
  double best_lower = 0.0;
  auto evaluate = [&]() {
    VectorField feas = make_feasible(w);
    const double upper = feas.max_magnitude();
    if (upper < best_upper) {
      best_upper = upper;
      res.witness = std::move(feas);
    }
    const double tv = bv_seminorm(hpot);
    if (tv > 0.0) best_lower = std::max(best_lower, std::abs(inner(hpot, v)) / tv);
    return best_upper - best_lower <= config.gap_tol * best_upper;
  };

  bool done = evaluate();
  int it = 0;
  while (!done && it < config.max_iter) {
    ++it;
    const ScalarField dw = divergence(wbar);
    for (std::size_t k = 0; k < hpot.size(); ++k) hpot[k] += sigma * (dw[k] - v[k]);
    const VectorField gh = gradient(hpot);
    VectorField wn = w;
    for (std::size_t k = 0; k < wn.size(); ++k) {
      wn.x()[k] += tau * gh.x()[k];
      wn.y()[k] += tau * gh.y()[k];
    }
    prox::clip_to_budget(wn.x(), wn.y(), budget);
    for (std::size_t k = 0; k < wn.size(); ++k) {
      wbar.x()[k] = wn.x()[k] + config.theta * (wn.x()[k] - w.x()[k]);
      wbar.y()[k] = wn.y()[k] + config.theta * (wn.y()[k] - w.y()[k]);
    }
    w = std::move(wn);
    if (it % config.check_every == 0 || it == config.max_iter) done = evaluate();
  }

  res.value = best_upper;
  res.lower_bound = best_lower;
  res.iterations = it;
  res.converged = done;
  const ScalarField defect = divergence(res.witness) - v;
  res.feasibility = lp_norm(defect, 2) / vnorm;
  return res;
}

OptimalityReport verify_optimality(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
                                   const SolverConfig& config, const Region& region) {
  return verify_optimality_with_dual(u, compute_dual_field(f, u, params), params, config, region);
}

ScalarField solver_dual_field(const SolveResult& result, const ProblemParams& params) {
  params.validate();
  return (-1.0 / params.lambda) * result.fidelity_dual;
}

OptimalityReport verify_optimality_with_dual(const ScalarField& u, const ScalarField& J, const ProblemParams& params,
                                             const SolverConfig& config, const Region& region) {
  require_same_grid(u.grid(), J.grid(), "verify_optimality");
  const SpectralKernel kernel = build_multiplier(params.kernel, u.grid());
  ScalarField g = convolve(kernel, J);
  OptimalityReport rep;
  rep.removed_mean = mean(g);
  for (double& x : g.values()) x -= rep.removed_mean;

  const StarNormResult star = star_norm(g, config);
  rep.star_value = star.value;
  rep.star_lower_bound = star.lower_bound;
  rep.star_converged = star.converged;

  if (region) {
    require_same_grid(u.grid(), region->grid(), "verify_optimality");
    const VectorField gu = gradient(u);
    double pair = 0.0;
    double tv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      if ((*region)[k] > 0.5) {
        pair += u[k] * g[k];
        tv += gu.magnitude(k);
      }
    }
    rep.pairing = pair * u.grid().cell_area();
    rep.bv_value = tv * u.grid().cell_area();
  } else {
    rep.pairing = inner(u, g);
    rep.bv_value = bv_seminorm(u);
  }
  rep.residual_35 = std::abs(params.lambda * rep.star_value - 1.0);
  const double eps = 1e-12 * u.grid().area();
  rep.residual_36 = std::abs(params.lambda * rep.pairing - rep.bv_value) / std::max(rep.bv_value, eps);
  return rep;
}

double minimality_probe(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
                        const ScalarField& h, double eps) {
  require_same_grid(u.grid(), h.grid(), "minimality_probe");
  const SpectralKernel kernel = build_multiplier(params.kernel, f.grid());
  ScalarField moved = u;
  for (std::size_t k = 0; k < moved.size(); ++k) moved[k] += eps * h[k];
  return energy(f, moved, params, kernel) - energy(f, u, params, kernel);
}

CurvatureResidual curvature_residual(const ScalarField& f, const ScalarField& u, const ProblemParams& params,
                                     double delta_grad) {
  const GridSpec& grid = u.grid();
  if (delta_grad <= 0.0) delta_grad = 1e-3 * (u.max() - u.min()) / grid.h;
  VectorField n = gradient(u);
  CurvatureResidual out;
  out.mask = ScalarField(grid);
  for (std::size_t k = 0; k < n.size(); ++k) {
    const double m = n.magnitude(k);
    if (m > delta_grad && delta_grad > 0.0) {
      out.mask[k] = 1.0;
      ++out.mask_cells;
    }
    const double s = 1.0 / std::max(m, delta_grad > 0.0 ? delta_grad : 1.0);
    n.x()[k] *= s;
    n.y()[k] *= s;
  }
  if (static_cast<double>(out.mask_cells) < 0.01 * static_cast<double>(grid.size())) {
    throw Error(ErrorKind::EmptyMask, "fewer than 1% of cells have |grad u| above delta_grad");
  }
  const ScalarField J = compute_dual_field(f, u, params);
  const ScalarField kj = convolve(build_multiplier(params.kernel, grid), J);
  const ScalarField curv = divergence(n);
  out.residual = ScalarField(grid);
  std::vector<double> mags;
  mags.reserve(out.mask_cells);
  for (std::size_t k = 0; k < curv.size(); ++k) {
    if (out.mask[k] > 0.5) {
      out.residual[k] = curv[k] + params.lambda * kj[k];
      mags.push_back(std::abs(out.residual[k]));
    }
  }
  auto quantile = [&](double q) {
    const std::size_t idx = std::min(mags.size() - 1, static_cast<std::size_t>(q * (mags.size() - 1) + 0.5));
    std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
    return mags[idx];
  };
  out.median = quantile(0.5);
  out.p95 = quantile(0.95);
  return out;
}

}  // namespace kbv
