"""Regenerate tests/data/oracles.json by exact symbolic differentiation.

Means are minus the gradient of the log-Laplace transform and variance
operators are its Hessian, both taken in z_basis coordinates.  Only the
basis and the Laplace transforms (products of determinant powers) are shared
with the library; the closed-form mean and variance routes are not used.

Requires sympy (not a runtime dependency).
"""
import json
from pathlib import Path

import numpy as np
import sympy as sp

from homcone.structure import dual_vinberg, full_structure, graph_to_structure, vinberg


def exact_basis(V):
    out = []
    for e in V.z_basis:
        out.append(sp.Matrix(V.N, V.N, lambda i, j: sp.nsimplify(e[i, j], [sp.sqrt(2), sp.sqrt(3)])))
    return out


def phi_sym(V, i, X):
    W = V.quadratic_domains[i]
    m = len(W)
    Ws = [sp.Matrix(V.N, V.sizes[i], lambda p, q: sp.nsimplify(w[p, q])) for w in W]
    return sp.Matrix(m, m, lambda a, b: (Ws[a].T * X * Ws[b]).trace())


def log_laplace(V, side, s, X):
    n = V.n_vector
    if side == "Q":  # log Delta_{-s}(theta) from leading minors
        ratio = [sp.Rational(-si) / int(ni) for si, ni in zip(s, n)]
        w = [ratio[k] - (ratio[k + 1] if k + 1 < V.r else 0) for k in range(V.r)]
        return sum(w[k] * sp.log(X[:V.offsets[k + 1], :V.offsets[k + 1]].det()) for k in range(V.r))
    total = 0  # log delta_{-s}(xi)
    for i in range(V.r):
        P = phi_sym(V, i, X)
        small = P[1:, 1:].det() if P.shape[0] > 1 else 1
        total += -sp.Rational(s[i]) * (sp.log(P.det()) - sp.log(small) - sp.log(int(n[i])))
    return total


def case(name, V, side, s, point):
    B = exact_basis(V)
    c = sp.symbols(f"c0:{len(B)}")
    X = sum((ci * Bi for ci, Bi in zip(c, B)), sp.zeros(V.N, V.N))
    P = sp.Matrix(point)
    at = {ci: (Bi.T * P).trace() for ci, Bi in zip(c, B)}
    f = log_laplace(V, side, s, X)
    grad = [sp.diff(f, ci) for ci in c]
    mean_c = [-sp.nsimplify(g.subs(at)) for g in grad]
    hess = [[sp.diff(g, cj).subs(at) for cj in c] for g in grad]
    mean = sum((mc * Bi for mc, Bi in zip(mean_c, B)), sp.zeros(V.N, V.N))
    return {
        "name": name, "side": side, "s": [str(sp.Rational(v)) for v in s],
        "point": [[float(v) for v in row] for row in point],
        "log_laplace": float(f.subs(at)),
        "mean": [[float(mean[i, j]) for j in range(V.N)] for i in range(V.N)],
        "variance": [[float(h) for h in row] for row in hess],
    }


def main():
    star = graph_to_structure([(1, 2), (1, 3), (1, 4)])
    cases = [
        ("vinberg", vinberg(), "Q", ["3/2", "2", "5/2"], [[2, 0, 1], [0, 3, 1], [1, 1, 4]]),
        ("vinberg", vinberg(), "P", ["1/2", "3/2", "2"], [[2, 0, 1], [0, 3, 1], [1, 1, 4]]),
        ("dual_vinberg", dual_vinberg(), "Q", ["3/2", "1", "7/4"],
         [[3, 0, 1, 0], [0, 3, 0, 1], [1, 0, 2, 0], [0, 1, 0, 2]]),
        ("dual_vinberg", dual_vinberg(), "P", ["2", "1", "5/4"],
         [[3, 0, 1, 0], [0, 3, 0, 1], [1, 0, 2, 0], [0, 1, 0, 2]]),
        ("star4", star, "Q", ["3/2", "2", "5/2", "3"],
         [[2, 0, 0, 1], [0, 2, 0, 1], [0, 0, 3, 1], [1, 1, 1, 5]]),
        ("sym(2)", full_structure(2), "Q", ["3/2", "3/2"], [[2, 1], [1, 3]]),
    ]
    out = []
    for name, V, side, s, pt in cases:
        assert V.in_z(np.array(pt, dtype=float)), name
        out.append(case(name, V, side, [sp.Rational(v) for v in s], pt))
    path = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"
    path.write_text(json.dumps({"graphs": {"star4": [[1, 2], [1, 3], [1, 4]]}, "cases": out}, indent=1))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
