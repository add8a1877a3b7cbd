"""Reference values for the star norm of small dipoles on an 8x8 torus.

Solves  min t  s.t.  div w = v,  |w_k|_2 <= t  as a conic program with cvxpy,
using its own sparse backward-difference divergence. The printed values are
frozen into the unit and acceptance tests.
"""

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

N = 8
H = 1.0 / N


def backward_diff(n):
    # (D x)_i = (x_i - x_{i-1}) / h with periodic wrap
    d = sp.eye(n) - sp.eye(n, k=-1)
    d = d.tolil()
    d[0, n - 1] = -1.0
    return d.tocsr() / H


def divergence(nx, ny):
    dx = sp.kron(sp.eye(ny), backward_diff(nx))
    dy = sp.kron(backward_diff(ny), sp.eye(nx))
    return sp.hstack([dx, dy]).tocsr()


def star_norm(v):
    m = v.size
    w = cp.Variable(2 * m)
    t = cp.Variable()
    pts = cp.vstack([w[:m], w[m:]])
    prob = cp.Problem(cp.Minimize(t), [divergence(N, N) @ w == v.ravel(), cp.norm(pts, 2, axis=0) <= t])
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.value


def dipole(a, b):
    v = np.zeros((N, N))  # index [j, i], row-major with x fastest
    v[a[1], a[0]] = 1.0
    v[b[1], b[0]] = -1.0
    return v


if __name__ == "__main__":
    cases = {
        "horizontal (3,4)+ (4,4)-": dipole((3, 4), (4, 4)),
        "vertical (3,3)+ (3,4)-": dipole((3, 3), (3, 4)),
        "diagonal (3,3)+ (4,4)-": dipole((3, 3), (4, 4)),
    }
    for name, v in cases.items():
        print(f"{name}: {star_norm(v):.12f}")
