#include <algorithm>
#include <cmath>
#include <numbers>

#include "kbv/experiments.hpp"

// Deliberately self-contained: dense circulant matrices instead of FFTs, smoothed
// absolute values and Newton steps instead of proximal splitting.

namespace kbv {
namespace {

constexpr int kRows = 4;
constexpr double kGradTol = 1e-10;
constexpr int kMaxNewton = 400;

using Matrix = std::vector<std::vector<double>>;

double multiplier_1d(const KernelSpec& spec, int k, double period) {
  const double xi = std::abs(k) / period;
  if (spec.is_identity()) return 1.0;
  if (spec.family == KernelFamily::Gaussian) return std::exp(-std::numbers::pi * spec.t * xi * xi);
  return std::exp(-std::numbers::pi * spec.t * xi);
}

// C[a][b] = (1/n) sum_k m(k) cos(2 pi k (a - b) / n) over the symmetric frequency range.
Matrix circulant(const KernelSpec& spec, int n, double h) {
  std::vector<double> col(n, 0.0);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int k = -(n - 1) / 2; k <= n / 2; ++k) {
      s += multiplier_1d(spec, k, n * h) * std::cos(2.0 * std::numbers::pi * k * d / n);
    }
    col[d] = s / n;
  }
  Matrix C(n, std::vector<double>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) C[a][b] = col[((a - b) % n + n) % n];
  }
  return C;
}

std::vector<double> matvec(const Matrix& A, const std::vector<double>& x) {
  std::vector<double> y(A.size(), 0.0);
  for (std::size_t a = 0; a < A.size(); ++a) {
    for (std::size_t b = 0; b < x.size(); ++b) y[a] += A[a][b] * x[b];
  }
  return y;
}

// Gaussian elimination with partial pivoting; false if singular.
bool solve_dense(Matrix A, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    }
    if (std::abs(A[piv][c]) < 1e-300) return false;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = A[r][c] / A[c][c];
      if (m == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= A[c][k] * x[k];
    x[c] = s / A[c][c];
  }
  return true;
}

struct Problem {
  std::vector<double> f;
  double h;
  int p, q;
  double lambda;
  Matrix C;
  double w;  // row count times h^2: the quadrature weight of one column

  int n() const { return static_cast<int>(f.size()); }

  std::vector<double> residual(const std::vector<double>& u) const {
    std::vector<double> d(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) d[i] = f[i] - u[i];
    return matvec(C, d);
  }

  double exact(const std::vector<double>& u) const {
    double tv = 0.0;
    for (int i = 0; i < n(); ++i) tv += std::abs(u[(i + 1) % n()] - u[i]);
    const auto F = residual(u);
    double N = 0.0;
    for (double x : F) N += p == 1 ? std::abs(x) : x * x;
    N = p == 1 ? w * N : std::sqrt(w * N);
    return kRows * h * tv + lambda * (q == 1 ? N : N * N);
  }

  // Smoothed energy; gradient and Hessian when requested.
  double smoothed(const std::vector<double>& u, double eps, std::vector<double>* grad, Matrix* hess) const {
    const int m = n();
    auto s = [&](double x) { return std::sqrt(x * x + eps * eps); };
    double value = 0.0;
    std::vector<double> g(m, 0.0);
    Matrix H(m, std::vector<double>(m, 0.0));

    for (int i = 0; i < m; ++i) {
      const int j = (i + 1) % m;
      const double d = u[j] - u[i];
      const double r = s(d);
      value += kRows * h * r;
      const double d1 = kRows * h * d / r;
      const double d2 = kRows * h * eps * eps / (r * r * r);
      g[j] += d1;
      g[i] -= d1;
      H[i][i] += d2;
      H[j][j] += d2;
      H[i][j] -= d2;
      H[j][i] -= d2;
    }

    const auto F = residual(u);
    std::vector<double> gF(m, 0.0);
    Matrix HF(m, std::vector<double>(m, 0.0));
    if (p == 1) {
      double N = 0.0;
      for (double x : F) N += s(x);
      N *= w;
      const double outer = q == 1 ? lambda : 2.0 * lambda * N;
      value += q == 1 ? lambda * N : lambda * N * N;
      std::vector<double> dN(m);
      for (int i = 0; i < m; ++i) {
        const double r = s(F[i]);
        dN[i] = w * F[i] / r;
        gF[i] = outer * dN[i];
        HF[i][i] = outer * w * eps * eps / (r * r * r);
      }
      if (q == 2) {
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < m; ++b) HF[a][b] += 2.0 * lambda * dN[a] * dN[b];
        }
      }
    } else if (q == 2) {
      double N = 0.0;
      for (double x : F) N += x * x;
      value += lambda * w * N;
      for (int i = 0; i < m; ++i) {
        gF[i] = 2.0 * lambda * w * F[i];
        HF[i][i] = 2.0 * lambda * w;
      }
    } else {
      double N = 0.0;
      for (double x : F) N += x * x;
      const double r = std::sqrt(w * N + eps * eps);
      value += lambda * r;
      for (int i = 0; i < m; ++i) gF[i] = lambda * w * F[i] / r;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          HF[a][b] = -lambda * w * w * F[a] * F[b] / (r * r * r) + (a == b ? lambda * w / r : 0.0);
        }
      }
    }

    if (grad) {
      // d/du of F = C (f - u) is -C, and C is symmetric.
      const auto cg = matvec(C, gF);
      for (int i = 0; i < m; ++i) g[i] -= cg[i];
      *grad = g;
    }
    if (hess) {
      Matrix T(m, std::vector<double>(m, 0.0));
      for (int a = 0; a < m; ++a) {
        for (int k = 0; k < m; ++k) {
          if (HF[a][k] == 0.0) continue;
          for (int b = 0; b < m; ++b) T[a][b] += HF[a][k] * C[k][b];
        }
      }
      for (int a = 0; a < m; ++a) {
        for (int k = 0; k < m; ++k) {
          for (int b = 0; b < m; ++b) H[a][b] += C[a][k] * T[k][b];
        }
      }
      *hess = H;
    }
    return value;
  }
};

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Damped Newton with Armijo backtracking; falls back to steepest descent when the
// Newton direction is not a descent direction.
double minimize(const Problem& P, double eps, std::vector<double>& u, double& gnorm) {
  const int m = P.n();
  std::vector<double> g;
  Matrix H;
  double value = P.smoothed(u, eps, &g, &H);
  for (int it = 0; it < kMaxNewton; ++it) {
    gnorm = norm2(g);
    if (gnorm <= kGradTol) break;
    double shift = 0.0;
    std::vector<double> d;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Matrix A = H;
      for (int i = 0; i < m; ++i) A[i][i] += shift;
      std::vector<double> rhs(m);
      for (int i = 0; i < m; ++i) rhs[i] = -g[i];
      bool ok = solve_dense(A, rhs, d);
      double slope = 0.0;
      for (int i = 0; i < m; ++i) slope += d[i] * g[i];
      if (ok && std::isfinite(slope) && slope < 0.0) break;
      shift = shift == 0.0 ? 1e-12 * (1.0 + std::abs(H[0][0])) : 10.0 * shift;
      d.clear();
    }
    if (d.empty()) {
      d.resize(m);
      for (int i = 0; i < m; ++i) d[i] = -g[i];
    }
    double slope = 0.0;
    for (int i = 0; i < m; ++i) slope += d[i] * g[i];
    double step = 1.0;
    std::vector<double> trial(m);
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < m; ++i) trial[i] = u[i] + step * d[i];
      const double tv = P.smoothed(trial, eps, nullptr, nullptr);
      if (tv <= value + 1e-4 * step * slope) {
        moved = tv < value || step == 1.0;
        u = trial;
        value = tv;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    value = P.smoothed(u, eps, &g, &H);
  }
  P.smoothed(u, eps, &g, nullptr);
  gnorm = norm2(g);
  return value;
}

}  // namespace

ScalarField lift_1d(const std::vector<double>& f, double h) {
  GridSpec g{static_cast<int>(f.size()), kRows, h};
  g.validate();
  ScalarField out(g);
  for (int j = 0; j < kRows; ++j) {
    for (int i = 0; i < g.nx; ++i) out(i, j) = f[i];
  }
  return out;
}

OracleResult oracle_1d(const std::vector<double>& f, double h, const ProblemParams& params) {
  params.validate();
  const int n = static_cast<int>(f.size());
  if (n < 4 || n > 64) throw Error(ErrorKind::InvalidArgument, "oracle_1d needs 4 <= n <= 64");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "oracle_1d needs h > 0");

  Problem P{f, h, params.p, params.q, params.lambda, circulant(params.kernel, n, h), kRows * h * h};
  OracleResult res;
  std::vector<double> u(n, 0.0);
  for (double eps = 1e-1; eps > 0.5e-5; eps *= 0.1) {
    double gn = 0.0;
    const double value = minimize(P, eps, u, gn);
    if (eps < 1.5e-3) {
      res.epsilons.push_back(eps);
      res.smoothed_energies.push_back(value);
      res.exact_energies.push_back(P.exact(u));
      res.gradient_norm = gn;
    }
  }
  // Quadratic through (eps_k, E_k), evaluated at eps = 0.
  const auto& e = res.epsilons;
  const auto& E = res.smoothed_energies;
  double a = 0.0;
  for (int i = 0; i < 3; ++i) {
    double l = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (j != i) l *= (0.0 - e[j]) / (e[i] - e[j]);
    }
    a += l * E[i];
  }
  res.energy = a;
  res.u = u;
  return res;
}

}  // namespace kbv
