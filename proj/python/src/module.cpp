// Python bindings. Fields are float64 arrays of shape (ny, nx); row j is y_j.

#include <optional>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kbv/experiments.hpp"
#include "kbv/selftest.hpp"

namespace py = pybind11;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

kbv::ScalarField to_field(const Array& a, double h) {
  if (a.ndim() != 2) throw kbv::Error(kbv::ErrorKind::InvalidArgument, "expected a 2D array");
  const kbv::GridSpec g{static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), h};
  g.validate();
  return kbv::ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const kbv::ScalarField& u) {
  Array a({u.grid().ny, u.grid().nx});
  std::copy(u.data().begin(), u.data().end(), a.mutable_data());
  return a;
}

kbv::ProblemParams problem(int p, int q, double lambda, const std::string& kernel, double t) {
  kbv::ProblemParams pp;
  pp.p = p;
  pp.q = q;
  pp.lambda = lambda;
  pp.kernel = {kbv::parse_kernel_family(kernel), t};
  pp.validate();
  return pp;
}

kbv::SolverConfig config(int max_iter, double gap_tol) {
  kbv::SolverConfig c;
  c.max_iter = max_iter;
  c.gap_tol = gap_tol;
  return c;
}

py::dict report_dict(const kbv::OptimalityReport& r) {
  py::dict d;
  d["star_value"] = r.star_value;
  d["pairing"] = r.pairing;
  d["bv_value"] = r.bv_value;
  d["residual_35"] = r.residual_35;
  d["residual_36"] = r.residual_36;
  d["removed_mean"] = r.removed_mean;
  d["star_lower_bound"] = r.star_lower_bound;
  d["star_converged"] = r.star_converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_kbv, m) {
  m.doc() = "Kernel-smoothed BV decomposition";

  py::register_exception<kbv::Error>(m, "KbvError", PyExc_RuntimeError);

  m.def(
      "solve",
      [](const Array& f, double h, int p, int q, double lam, const std::string& kernel, double t, int max_iter,
         double gap_tol) {
        const kbv::ScalarField ff = to_field(f, h);
        kbv::SolveResult r;
        {
          py::gil_scoped_release release;
          r = kbv::solve(ff, problem(p, q, lam, kernel, t), config(max_iter, gap_tol));
        }
        py::dict d;
        d["u"] = to_array(r.u);
        d["v"] = to_array(r.v);
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["gap"] = r.gap_trace.empty() ? 0.0 : r.gap_trace.back();
        d["J"] = to_array(kbv::solver_dual_field(r, problem(p, q, lam, kernel, t)));
        d["energy_trace"] = r.energy_trace;
        return d;
      },
      py::arg("f"), py::arg("h"), py::arg("p") = 1, py::arg("q") = 1, py::arg("lam") = 1.0,
      py::arg("kernel") = "identity", py::arg("t") = 0.0, py::arg("max_iter") = 20000, py::arg("gap_tol") = 1e-6);

  m.def(
      "energy",
      [](const Array& f, const Array& u, double h, int p, int q, double lam, const std::string& kernel, double t) {
        return kbv::energy(to_field(f, h), to_field(u, h), problem(p, q, lam, kernel, t));
      },
      py::arg("f"), py::arg("u"), py::arg("h"), py::arg("p") = 1, py::arg("q") = 1, py::arg("lam") = 1.0,
      py::arg("kernel") = "identity", py::arg("t") = 0.0);

  m.def(
      "bv_seminorm", [](const Array& u, double h) { return kbv::bv_seminorm(to_field(u, h)); }, py::arg("u"),
      py::arg("h"));

  m.def(
      "convolve",
      [](const Array& u, double h, const std::string& kernel, double t) {
        const kbv::ScalarField uu = to_field(u, h);
        return to_array(kbv::convolve(kbv::build_multiplier({kbv::parse_kernel_family(kernel), t}, uu.grid()), uu));
      },
      py::arg("u"), py::arg("h"), py::arg("kernel") = "gaussian", py::arg("t") = 0.0);

  m.def(
      "star_norm",
      [](const Array& v, double h, int max_iter, double gap_tol) {
        const kbv::StarNormResult s = kbv::star_norm(to_field(v, h), config(max_iter, gap_tol));
        py::dict d;
        d["value"] = s.value;
        d["lower_bound"] = s.lower_bound;
        d["feasibility"] = s.feasibility;
        d["iterations"] = s.iterations;
        d["converged"] = s.converged;
        return d;
      },
      py::arg("v"), py::arg("h"), py::arg("max_iter") = 200000, py::arg("gap_tol") = 1e-9);

  m.def(
      "verify_optimality",
      [](const Array& f, const Array& u, double h, int p, int q, double lam, const std::string& kernel, double t,
         std::optional<Array> dual) {
        const kbv::ProblemParams pp = problem(p, q, lam, kernel, t);
        if (dual) return report_dict(kbv::verify_optimality_with_dual(to_field(u, h), to_field(*dual, h), pp,
                                                                      config(100000, 1e-6)));
        return report_dict(kbv::verify_optimality(to_field(f, h), to_field(u, h), pp, config(100000, 1e-6)));
      },
      py::arg("f"), py::arg("u"), py::arg("h"), py::arg("p") = 1, py::arg("q") = 1, py::arg("lam") = 1.0,
      py::arg("kernel") = "identity", py::arg("t") = 0.0, py::arg("dual") = py::none());

  m.def(
      "disk_indicator",
      [](int n, double half_width, double radius) {
        return to_array(kbv::disk_indicator(kbv::GridSpec::centered_square(n, half_width), radius));
      },
      py::arg("n"), py::arg("half_width"), py::arg("radius"));

  m.def(
      "oracle_1d",
      [](const std::vector<double>& f, double h, int p, int q, double lam, const std::string& kernel, double t) {
        const kbv::OracleResult o = kbv::oracle_1d(f, h, problem(p, q, lam, kernel, t));
        py::dict d;
        d["u"] = o.u;
        d["energy"] = o.energy;
        return d;
      },
      py::arg("f"), py::arg("h"), py::arg("p") = 1, py::arg("q") = 1, py::arg("lam") = 1.0,
      py::arg("kernel") = "identity", py::arg("t") = 0.0);

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        std::vector<kbv::CheckResult> checks;
        {
          py::gil_scoped_release release;
          checks = kbv::run_selftest(seed);
        }
        py::list out;
        for (const auto& c : checks) {
          py::dict d;
          d["suite"] = c.suite;
          d["name"] = c.name;
          d["value"] = c.value;
          d["tolerance"] = c.tolerance;
          d["passed"] = c.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 20240531);
}
