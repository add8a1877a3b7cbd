// kbv: command-line front end for decompositions and verification harnesses.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kbv/experiments.hpp"
#include "kbv/io.hpp"
#include "kbv/selftest.hpp"
#include "kbv/synth.hpp"

namespace fs = std::filesystem;
using kbv::io::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kBadFlags = 2, kIo = 3, kNonConvergence = 4, kSelftest = 5 };

struct Common {
  std::string kernel = "id";
  double t = 0.0;
  int p = 1;
  int q = 1;
  double lambda = 1.0;
  int grid = 256;
  double domain = 1.0;
  int max_iter = 20000;
  double gap_tol = 1e-6;
  double tau = 0.0;
  double sigma = 0.0;
  double theta = 1.0;
  int jobs = 1;
  std::uint64_t seed = 20240531;
  std::string out = ".";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--kernel", c.kernel, "gauss | poisson | id")->check(CLI::IsMember({"gauss", "poisson", "id"}));
  app->add_option("--t", c.t, "kernel scale")->check(CLI::NonNegativeNumber);
  app->add_option("--p", c.p)->check(CLI::IsMember({1, 2}));
  app->add_option("--q", c.q)->check(CLI::IsMember({1, 2}));
  app->add_option("--lambda", c.lambda)->check(CLI::PositiveNumber);
  app->add_option("--grid", c.grid, "cells per side")->check(CLI::Range(4, 1 << 14));
  app->add_option("--domain", c.domain, "half-width of the square domain")->check(CLI::PositiveNumber);
  app->add_option("--max-iter", c.max_iter)->check(CLI::PositiveNumber);
  app->add_option("--gap-tol", c.gap_tol)->check(CLI::PositiveNumber);
  app->add_option("--tau", c.tau, "primal step (0 = auto)")->check(CLI::NonNegativeNumber);
  app->add_option("--sigma", c.sigma, "dual step (0 = auto)")->check(CLI::NonNegativeNumber);
  app->add_option("--theta", c.theta)->check(CLI::Range(0.0, 1.0));
  app->add_option("--jobs", c.jobs)->check(CLI::Range(1, 256));
  app->add_option("--seed", c.seed);
  app->add_option("--out", c.out, "output directory (synthesize: output file)");
}

kbv::ProblemParams problem(const Common& c) {
  kbv::ProblemParams pp;
  pp.p = c.p;
  pp.q = c.q;
  pp.lambda = c.lambda;
  pp.kernel = {kbv::parse_kernel_family(c.kernel == "gauss" ? "gaussian" : c.kernel == "id" ? "identity" : c.kernel),
               c.t};
  pp.validate();
  return pp;
}

kbv::SolverConfig solver(const Common& c) {
  kbv::SolverConfig sc;
  sc.max_iter = c.max_iter;
  sc.gap_tol = c.gap_tol;
  if (c.tau > 0.0) sc.tau = c.tau;
  if (c.sigma > 0.0) sc.sigma = c.sigma;
  sc.theta = c.theta;
  sc.seed = c.seed;
  return sc;
}

kbv::GridSpec square_grid(const Common& c) { return kbv::GridSpec::centered_square(c.grid, c.domain); }

json inputs(const Common& c) {
  return json{{"kernel", c.kernel}, {"t", c.t},         {"p", c.p},         {"q", c.q},
              {"lambda", c.lambda}, {"grid", c.grid},   {"domain", c.domain}, {"max_iter", c.max_iter},
              {"gap_tol", c.gap_tol}, {"theta", c.theta}, {"seed", c.seed}};
}

std::string out_path(const Common& c, const std::string& name) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw kbv::Error(kbv::ErrorKind::Io, "cannot create " + c.out + ": " + ec.message());
  return (fs::path(c.out) / name).string();
}

json report_json(const kbv::OptimalityReport& r) {
  return json{{"star_value", r.star_value},   {"star_lower_bound", r.star_lower_bound},
              {"star_converged", r.star_converged}, {"pairing", r.pairing},
              {"bv_value", r.bv_value},       {"residual_35", r.residual_35},
              {"residual_36", r.residual_36}, {"removed_mean", r.removed_mean}};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw kbv::Error(kbv::ErrorKind::InvalidArgument, "bad number '" + item + "' in list");
    }
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_synthesize(const Common& c, const std::string& shape, kbv::ShapeParams sp, const std::string& radii,
                   const std::string& values) {
  if (!radii.empty()) sp.radii = parse_list(radii);
  if (!values.empty()) sp.values = parse_list(values);
  const kbv::ScalarField f = kbv::synthesize(kbv::parse_shape(shape), sp, square_grid(c));
  const bool pgm = c.out.size() >= 4 && c.out.compare(c.out.size() - 4, 4, ".pgm") == 0;
  if (pgm) {
    kbv::io::write_pgm(c.out, f);
  } else {
    kbv::io::write_field(c.out, f);
  }
  return kOk;
}

int cmd_decompose(const Common& c, const std::string& input, double disk_radius) {
  const kbv::ScalarField f = kbv::io::read_any(input, 2.0 * c.domain / c.grid);
  const kbv::ProblemParams pp = problem(c);
  const kbv::SolveResult r = kbv::solve(f, pp, solver(c));
  kbv::io::write_field(out_path(c, "u.field"), r.u);
  kbv::io::write_field(out_path(c, "v.field"), r.v);
  kbv::io::write_field(out_path(c, "j.field"), kbv::solver_dual_field(r, pp));
  std::vector<std::vector<double>> rows;
  const int every = solver(c).check_every;
  for (std::size_t k = 0; k < r.gap_trace.size(); ++k) {
    rows.push_back({static_cast<double>((k + 1) * every), r.energy_trace[k], r.gap_trace[k]});
  }
  kbv::io::write_csv(out_path(c, "trace.csv"), "iteration,energy,gap", rows);

  json j = kbv::io::report_header("decompose");
  j["inputs"] = inputs(c);
  j["inputs"]["input"] = input;
  j["energy"] = kbv::energy(f, r.u, pp);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_gap"] = r.gap_trace.empty() ? 0.0 : r.gap_trace.back();
  if (disk_radius > 0.0) {
    const kbv::GridSpec& g = f.grid();
    double in = 0.0, out = 0.0;
    std::size_t nin = 0, nout = 0;
    for (int jj = 0; jj < g.ny; ++jj) {
      for (int i = 0; i < g.nx; ++i) {
        const double rr = std::hypot(g.x_center(i), g.y_center(jj));
        if (rr < disk_radius - 2.0 * g.h) {
          in += r.u(i, jj);
          ++nin;
        } else if (rr > disk_radius + 2.0 * g.h) {
          out += std::abs(r.u(i, jj));
          ++nout;
        }
      }
    }
    j["inside_mean"] = nin ? in / nin : 0.0;
    j["outside_mean_abs"] = nout ? out / nout : 0.0;
  }
  kbv::io::write_json(out_path(c, "summary.json"), j);
  return r.converged ? kOk : kNonConvergence;
}

int cmd_verify(const Common& c, const std::string& input, const std::string& u_path, const std::string& region,
               const std::string& dual) {
  const kbv::ScalarField f = kbv::io::read_any(input, 2.0 * c.domain / c.grid);
  const kbv::ScalarField u = kbv::io::read_any(u_path, f.grid().h);
  kbv::Region mask;
  if (!region.empty()) mask = kbv::io::read_any(region, f.grid().h);
  const kbv::OptimalityReport r =
      dual.empty() ? kbv::verify_optimality(f, u, problem(c), solver(c), mask)
                   : kbv::verify_optimality_with_dual(u, kbv::io::read_any(dual, f.grid().h), problem(c), solver(c), mask);
  json j = kbv::io::report_header("verify");
  j["inputs"] = inputs(c);
  j["inputs"]["input"] = input;
  j["inputs"]["u"] = u_path;
  if (!dual.empty()) j["inputs"]["dual"] = dual;
  j["report"] = report_json(r);
  kbv::io::write_json(out_path(c, "report.json"), j);
  return r.star_converged ? kOk : kNonConvergence;
}

int cmd_radial(const Common& c, const std::string& input, double cx, double cy, int nbins) {
  const kbv::ScalarField u = kbv::io::read_any(input, 2.0 * c.domain / c.grid);
  const kbv::RadialProfile pr = kbv::radial_decompose(u, {cx, cy}, nbins);
  json j = kbv::io::report_header("radial");
  j["inputs"] = {{"input", input}, {"center", {cx, cy}}, {"nbins", nbins}};
  j["bin_edges"] = pr.bin_edges;
  j["bin_mean"] = pr.bin_mean;
  j["bin_cv"] = pr.bin_cv;
  j["bin_count"] = pr.bin_count;
  json levels = json::array();
  for (const auto& l : pr.levels) {
    levels.push_back({{"value", l.value}, {"r_inner", l.r_inner}, {"r_outer", l.r_outer}, {"cells", l.cells}});
  }
  j["levels"] = levels;
  json jumps = json::array();
  for (const auto& jp : pr.jumps) jumps.push_back({{"radius", jp.radius}, {"increment", jp.increment}});
  j["jumps"] = jumps;
  j["coverage"] = pr.coverage;
  j["max_cv"] = pr.max_cv;
  kbv::io::write_json(out_path(c, "radial.json"), j);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < pr.bin_mean.size(); ++k) {
    rows.push_back({pr.bin_edges[k], pr.bin_edges[k + 1], pr.bin_mean[k], pr.bin_cv[k],
                    static_cast<double>(pr.bin_count[k])});
  }
  kbv::io::write_csv(out_path(c, "radial.csv"), "r_lo,r_hi,mean,cv,count", rows);
  return kOk;
}

int cmd_threshold_sweep(const Common& c, const std::string& t_list, double r_lo, double r_hi) {
  const auto ts = parse_list(t_list);
  kbv::ProblemParams pp = problem(c);
  if (pp.kernel.family == kbv::KernelFamily::Identity) pp.kernel.family = kbv::KernelFamily::Gaussian;
  const kbv::SweepReport rep =
      kbv::monotonicity_sweep(c.lambda, ts, pp, square_grid(c), {r_lo, r_hi}, solver(c), c.jobs);
  json j = kbv::io::report_header("threshold-sweep");
  j["inputs"] = inputs(c);
  j["inputs"]["t_list"] = ts;
  j["inputs"]["bracket"] = {r_lo, r_hi};
  json est = json::array();
  std::vector<std::vector<double>> rows;
  bool converged = true;
  for (const auto& e : rep.estimates) {
    est.push_back({{"lambda", e.lambda},
                   {"t", e.t},
                   {"r0", e.r0},
                   {"bracket", {e.bracket.first, e.bracket.second}},
                   {"decision_curve", e.decision_curve},
                   {"solves", e.solves},
                   {"all_converged", e.all_converged}});
    converged = converged && e.all_converged;
    for (const auto& [R, s] : e.decision_curve) rows.push_back({e.t, R, s});
  }
  j["estimates"] = est;
  j["nondecreasing"] = rep.nondecreasing;
  kbv::io::write_json(out_path(c, "sweep.json"), j);
  kbv::io::write_csv(out_path(c, "decision_curve.csv"), "t,R,survival", rows);
  return converged ? kOk : kNonConvergence;
}

int cmd_layer_cake(const Common& c, const std::string& input, const std::string& levels) {
  const kbv::ScalarField u = kbv::io::read_any(input, 2.0 * c.domain / c.grid);
  const kbv::ProblemParams pp = problem(c);
  const kbv::SolverConfig sc = solver(c);
  json j = kbv::io::report_header("layer-cake");
  j["inputs"] = inputs(c);
  j["inputs"]["input"] = input;
  j["self_fixed_point"] = kbv::self_fixed_point_check(u, pp, sc);
  json lv = json::array();
  for (const auto& d : kbv::layer_cake_check(u, pp, parse_list(levels), sc)) {
    lv.push_back({{"t", d.t}, {"discrepancy", d.discrepancy}, {"fraction", d.fraction}, {"skipped", d.skipped}});
  }
  j["levels"] = lv;
  kbv::io::write_json(out_path(c, "layer_cake.json"), j);
  return kOk;
}

int cmd_curvature(const Common& c, const std::string& input, double smoothing, double spacing, double factor) {
  const kbv::ScalarField u = kbv::io::read_any(input, 2.0 * c.domain / c.grid);
  const kbv::CurvatureReport r = kbv::curvature_bound_check(u, problem(c), smoothing, spacing, factor);
  json j = kbv::io::report_header("curvature");
  j["inputs"] = inputs(c);
  j["inputs"]["input"] = input;
  j["inputs"]["smoothing"] = smoothing;
  j["inputs"]["spacing"] = spacing;
  j["inputs"]["spacing_factor"] = factor;
  j["bound"] = r.bound;
  j["kernel_norm"] = r.kernel_norm;
  j["fraction_within"] = r.fraction_within;
  j["max_abs"] = r.max_abs;
  j["contours"] = r.contours;
  j["curvatures"] = r.curvatures;
  kbv::io::write_json(out_path(c, "curvature.json"), j);
  return kOk;
}

int cmd_stripe(const Common& c, double width, double height, kbv::StripeInitial init, kbv::StripeOptions opt) {
  const double h = width / c.grid;
  const kbv::GridSpec g{c.grid, static_cast<int>(std::lround(height / h)), h};
  kbv::ProblemParams pp = problem(c);
  const kbv::StripeCase sc = kbv::stripe_example(pp, g, init, opt, solver(c));
  json j = kbv::io::report_header("stripe");
  j["inputs"] = inputs(c);
  j["inputs"]["width"] = width;
  j["inputs"]["height"] = height;
  j["inputs"]["y0"] = init.y0;
  j["inputs"]["yp0"] = init.yp0;
  j["inputs"]["ramp"] = opt.ramp;
  j["inputs"]["offset"] = opt.offset;
  j["inputs"]["window"] = opt.window;
  j["lambda"] = sc.lambda;
  j["star_exact"] = sc.star_exact;
  j["star_computed"] = sc.star_computed;
  j["report"] = report_json(sc.report);
  if (sc.window_report) j["window_report"] = report_json(*sc.window_report);
  j["curvature_median"] = sc.curvature_median;
  j["curvature_p95"] = sc.curvature_p95;
  j["curvature_scale"] = sc.curvature_scale;
  j["level_curves"] = sc.level_curves;
  kbv::io::write_json(out_path(c, "stripe.json"), j);
  kbv::io::write_field(out_path(c, "u.field"), sc.u);
  kbv::io::write_field(out_path(c, "f.field"), sc.f);
  return sc.report.star_converged ? kOk : kNonConvergence;
}

int cmd_oracle_compare(const Common& c, int n, int signals, double h) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  json cases = json::array();
  double worst = 0.0;
  bool converged = true;
  for (int s = 0; s < signals; ++s) {
    std::vector<double> f(n);
    double v = U(rng);
    for (int i = 0; i < n; ++i) {
      if (i % 4 == 0 && U(rng) > 0.0) v = U(rng);
      f[i] = v;
    }
    const kbv::ScalarField lifted = kbv::lift_1d(f, h);
    for (auto [p, q] : {std::pair{1, 1}, {2, 2}, {2, 1}}) {
      for (const kbv::KernelSpec& k : {kbv::KernelSpec{kbv::KernelFamily::Identity, 0.0},
                                       kbv::KernelSpec{kbv::KernelFamily::Gaussian, c.t > 0.0 ? c.t : 0.01}}) {
        kbv::ProblemParams pp;
        pp.p = p;
        pp.q = q;
        pp.lambda = c.lambda;
        pp.kernel = k;
        const kbv::OracleResult o = kbv::oracle_1d(f, h, pp);
        const kbv::SolveResult r = kbv::solve(lifted, pp, solver(c));
        const double e = kbv::energy(lifted, r.u, pp);
        const double rel = std::abs(e - o.energy) / std::max(std::abs(o.energy), 1e-300);
        worst = std::max(worst, rel);
        converged = converged && r.converged;
        cases.push_back({{"signal", s},
                         {"p", p},
                         {"q", q},
                         {"kernel", kbv::to_string(k.family)},
                         {"t", k.t},
                         {"oracle_energy", o.energy},
                         {"solver_energy", e},
                         {"relative_difference", rel},
                         {"solver_converged", r.converged},
                         {"oracle_gradient_norm", o.gradient_norm}});
      }
    }
  }
  json j = kbv::io::report_header("oracle-compare");
  j["inputs"] = inputs(c);
  j["inputs"]["n"] = n;
  j["inputs"]["signals"] = signals;
  j["inputs"]["h"] = h;
  j["cases"] = cases;
  j["worst_relative_difference"] = worst;
  kbv::io::write_json(out_path(c, "oracle.json"), j);
  return converged ? kOk : kNonConvergence;
}

int cmd_selftest(const Common& c) {
  const auto results = kbv::run_selftest(c.seed);
  json checks = json::array();
  bool ok = true;
  for (const auto& r : results) {
    checks.push_back({{"suite", r.suite},
                      {"name", r.name},
                      {"value", r.value},
                      {"tolerance", r.tolerance},
                      {"passed", r.passed},
                      {"detail", r.detail}});
    ok = ok && r.passed;
    std::fprintf(stderr, "%s  %-12s %s (%.3g <= %.3g)\n", r.passed ? "pass" : "FAIL", r.suite.c_str(),
                 r.name.c_str(), r.value, r.tolerance);
  }
  json j = kbv::io::report_header("selftest");
  j["seed"] = c.seed;
  j["checks"] = checks;
  j["passed"] = ok;
  kbv::io::write_json(out_path(c, "selftest.json"), j);
  return ok ? kOk : kSelftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-smoothed BV decomposition and verification"};
  app.require_subcommand(1);

  Common c;
  std::string input, u_path, region, dual, shape = "disk", t_list = "0.001,0.004,0.016", levels = "0.5";
  double disk_radius = 0.0, cx = 0.0, cy = 0.0, r_lo = 0.05, r_hi = 0.4, smoothing = 2.0, spacing = 0.0, spacing_factor = 1.5;
  double width = 4.0, height = 10.0, ohx = 1.0 / 16;
  int nbins = 16, n = 32, signals = 5;
  kbv::ShapeParams sp;
  std::string radii, values;
  kbv::StripeInitial init;
  kbv::StripeOptions opt;

  auto* syn = app.add_subcommand("synthesize", "write a synthetic image");
  add_common(syn, c);
  syn->add_option("--shape", shape)->check(CLI::IsMember({"disk", "square", "stripes", "steps"}));
  syn->add_option("--radius", sp.radius);
  syn->add_option("--side", sp.side);
  syn->add_option("--alpha", sp.alpha);
  syn->add_option("--period", sp.period);
  syn->add_option("--radii", radii, "comma-separated step radii");
  syn->add_option("--values", values, "comma-separated step values");
  syn->add_option("--cx", sp.cx);
  syn->add_option("--cy", sp.cy);

  auto* dec = app.add_subcommand("decompose", "solve for u and v = f - u");
  add_common(dec, c);
  dec->add_option("--input", input)->required();
  dec->add_option("--disk-radius", disk_radius, "report inside/outside means for a centered disk");

  auto* ver = app.add_subcommand("verify", "optimality report for (f, u)");
  add_common(ver, c);
  ver->add_option("--input", input)->required();
  ver->add_option("--u", u_path)->required();
  ver->add_option("--dual", dual, "dual field J (e.g. j.field from decompose) instead of recomputing it from u");
  ver->add_option("--region", region, "restrict pairing and TV to cells where this field > 0.5");

  auto* rad = app.add_subcommand("radial", "radial step structure of u");
  add_common(rad, c);
  rad->add_option("--input", input)->required();
  rad->add_option("--cx", cx);
  rad->add_option("--cy", cy);
  rad->add_option("--nbins", nbins)->check(CLI::Range(4, 100000));

  auto* thr = app.add_subcommand("threshold-sweep", "threshold radius r0 for each t");
  add_common(thr, c);
  thr->add_option("--t-list", t_list);
  thr->add_option("--r-lo", r_lo);
  thr->add_option("--r-hi", r_hi);

  auto* lay = app.add_subcommand("layer-cake", "self-minimizer and superlevel-set checks");
  add_common(lay, c);
  lay->add_option("--input", input)->required();
  lay->add_option("--levels", levels, "comma-separated thresholds");

  auto* cur = app.add_subcommand("curvature", "contour curvature against lambda ||K||_p");
  add_common(cur, c);
  cur->add_option("--input", input)->required();
  cur->add_option("--smoothing", smoothing, "pre-smoothing width in cells");
  cur->add_option("--spacing", spacing, "contour resampling spacing in cells (0 = automatic)")
      ->check(CLI::NonNegativeNumber);
  cur->add_option("--spacing-factor", spacing_factor, "automatic spacing is factor * sqrt(rho h)")
      ->check(CLI::PositiveNumber);

  auto* str = app.add_subcommand("stripe", "stripe construction and its optimality report");
  add_common(str, c);
  str->add_option("--width", width);
  str->add_option("--height", height);
  str->add_option("--y0", init.y0);
  str->add_option("--yp0", init.yp0);
  str->add_option("--ramp", opt.ramp);
  str->add_option("--offset", opt.offset);
  str->add_option("--window", opt.window);

  auto* orc = app.add_subcommand("oracle-compare", "solver against the independent 1D oracle");
  add_common(orc, c);
  orc->add_option("--n", n)->check(CLI::Range(4, 64));
  orc->add_option("--signals", signals)->check(CLI::PositiveNumber);
  orc->add_option("--spacing", ohx, "1D sample spacing")->check(CLI::PositiveNumber);

  auto* self = app.add_subcommand("selftest", "run the invariant suite");
  add_common(self, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadFlags;
  }

  try {
    if (*syn) return cmd_synthesize(c, shape, sp, radii, values);
    if (*dec) return cmd_decompose(c, input, disk_radius);
    if (*ver) return cmd_verify(c, input, u_path, region, dual);
    if (*rad) return cmd_radial(c, input, cx, cy, nbins);
    if (*thr) return cmd_threshold_sweep(c, t_list, r_lo, r_hi);
    if (*lay) return cmd_layer_cake(c, input, levels);
    if (*cur) return cmd_curvature(c, input, smoothing, spacing, spacing_factor);
    if (*str) return cmd_stripe(c, width, height, init, opt);
    if (*orc) return cmd_oracle_compare(c, n, signals, ohx);
    if (*self) return cmd_selftest(c);
  } catch (const kbv::Error& e) {
    std::cerr << "kbv: " << e.what() << '\n';
    switch (e.kind()) {
      case kbv::ErrorKind::InvalidArgument: return kBadFlags;
      case kbv::ErrorKind::Io: return kIo;
      case kbv::ErrorKind::NonConvergence: return kNonConvergence;
      default: return kFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "kbv: " << e.what() << '\n';
    return kFailure;
  }
  return kBadFlags;
}
