"""Finite-difference oracles and the counterexample fixtures.

The fixtures rebuild three small computations showing that an earlier
treatment of Wishart laws on homogeneous cones fails: a decomposition that
does not sum back to the identity, a non-associative product in which
``T^{-1} . (T^T)^{-1}`` is not the inverse of ``T^T . T``, and a variance
value of 13 where the correct second derivative is 15.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .structure import vinberg
from .wishart import ZOperator, variance_Q

FIXTURE_TOL = 1e-12


def _step(x, h):
    return h if h is not None else 1e-5 * (1.0 + float(np.max(np.abs(x))))


def fd_gradient(structure, f, x, h=None):
    """Central-difference gradient of a scalar field on Z_V, as an element of Z_V."""
    V = structure
    x = np.asarray(x, dtype=float)
    h = _step(x, h)
    g = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in V.z_basis])
    return V.from_coords(g)


def fd_jacobian(structure, g, x, h=None):
    """Central-difference Jacobian of a map ``Z_V -> Z_V`` as a :class:`ZOperator`."""
    V = structure
    x = np.asarray(x, dtype=float)
    h = _step(x, h)
    cols = [V.coords(g(x + h * e) - g(x - h * e)) / (2 * h) for e in V.z_basis]
    return ZOperator(np.column_stack(cols), V)


# -- fixtures ------------------------------------------------------------------

@dataclass
class FixtureReport:
    """Outcome of one fixture: named computed and expected values."""

    name: str
    computed: dict
    expected: dict
    tol: float = FIXTURE_TOL
    notes: list = field(default_factory=list)
    key_tol: dict = field(default_factory=dict)

    def deviations(self):
        out = {}
        for key, want in self.expected.items():
            got = np.asarray(self.computed[key], dtype=float)
            out[key] = float(np.max(np.abs(got - np.asarray(want, dtype=float))))
        return out

    @property
    def deviation(self):
        return max(self.deviations().values(), default=0.0)

    @property
    def passed(self):
        return all(dev <= self.key_tol.get(key, self.tol) for key, dev in self.deviations().items())

    def to_text(self):
        status = "PASS" if self.passed else "FAIL"
        lines = [f"[{status}] {self.name} (max deviation {self.deviation:.3g}, tol {self.tol:g})"]
        for key in self.computed:
            val = np.asarray(self.computed[key]).tolist()
            want = self.expected.get(key)
            suffix = "" if want is None else f"  expected {np.asarray(want).tolist()}"
            lines.append(f"  {key} = {val}{suffix}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)

    def to_dict(self):
        conv = lambda d: {k: np.asarray(v).tolist() for k, v in d.items()}  # noqa: E731
        return {"name": self.name, "passed": self.passed, "deviation": self.deviation,
                "tol": self.tol, "computed": conv(self.computed),
                "expected": conv(self.expected), "notes": list(self.notes)}

    def to_json(self):
        return json.dumps(self.to_dict())


def fixture_poset_decomposition():
    """The four pieces ``X_i`` of ``X = I_4`` for the poset 1<3, 2<3, 3<4 do not sum to X."""
    X = np.eye(4)
    pieces = [np.diag(v) for v in ([1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, 1], [0, 0, 0, 1])]
    total = sum(pieces)
    return FixtureReport(
        "poset-decomposition",
        {"sum_X_i": total, "deviation_norm": np.linalg.norm(total - X), "entry_44": total[3, 3]},
        {"sum_X_i": np.diag([1.0, 1, 1, 0]), "deviation_norm": 1.0, "entry_44": 0.0},
        notes=["sum of the pieces differs from X = I_4 in the (4,4) entry"],
    )


def _lower_half(X):
    """Lower triangular part of X with the diagonal halved."""
    return np.tril(X, -1) + 0.5 * np.diag(np.diag(X))


def _project_algebra(M):
    """Orthogonal projection onto 3x3 matrices with zero (2,3) and (3,2) entries."""
    out = np.array(M, dtype=float)
    out[1, 2] = out[2, 1] = 0.0
    return out


def triangle_product(X, Y):
    """``X_ Y + Y X_^T`` projected to the algebra, with ``X_`` the half-diagonal lower part."""
    L = _lower_half(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    return _project_algebra(L @ Y + Y @ L.T)


def vinberg_algebra_product(A, B):
    """``A . B = pi_A(AB)`` on 3x3 matrices with vanishing (2,3) and (3,2) entries."""
    return _project_algebra(np.asarray(A, dtype=float) @ np.asarray(B, dtype=float))


FIXTURE_T = np.array([[1.0, 0, 0], [1, 1, 0], [1, 0, 1]])
FIXTURE_THETA = np.array([[3.0, 1, 1], [1, 1, 0], [1, 0, 1]])
FIXTURE_M0 = np.array([[1.0, -1, -1], [-1, 2, 0], [-1, 0, 2]])


def fixture_non_inverse():
    """With the product ``pi_A(AB)``, ``T^{-1} . T^{-T}`` does not invert ``T^T . T``."""
    T = FIXTURE_T
    Tinv = np.linalg.inv(T)
    theta = vinberg_algebra_product(T.T, T)
    X = vinberg_algebra_product(Tinv, Tinv.T)
    U = np.array([[2.0, 0, 0], [-1, 0.5, 0], [3, 0, 1]])
    return FixtureReport(
        "non-inverse",
        {"theta": theta, "X": X, "X.theta": vinberg_algebra_product(X, theta),
         "theta.X": vinberg_algebra_product(theta, X),
         "lower_closed": vinberg_algebra_product(T, U) - T @ U,
         "X.theta_minus_I_norm": np.linalg.norm(vinberg_algebra_product(X, theta) - np.eye(3))},
        {"theta": FIXTURE_THETA, "X": FIXTURE_M0,
         "X.theta": [[1, 0, 0], [-1, 1, 0], [-1, 0, 1]],
         "theta.X": [[1, -1, -1], [0, 1, 0], [0, 0, 1]],
         "lower_closed": np.zeros((3, 3)), "X.theta_minus_I_norm": np.sqrt(2.0)},
        notes=["X . theta != I, so X is not an inverse of theta"],
    )


def fixture_variance_counterexample(lam=1.0):
    """Correct second derivative 15/lam versus the value 13/lam of the refuted formula.

    At ``theta0 = lam * theta`` the mean is ``m0`` itself.  The cross-check
    reverses the coordinate order, which maps the algebra's zero pattern at
    (2,3) onto the Vinberg structure's zero at (1,2); ``m0`` then lies in Q_V
    and the shape is ``lam * (1,1,1)``.
    """
    theta0 = lam * FIXTURE_THETA
    m0 = FIXTURE_M0
    t_inv = np.linalg.inv(theta0)
    true_value = lam * np.trace(t_inv @ t_inv)
    refuted = np.trace(m0 @ m0) / lam
    w = np.eye(3)[::-1]
    V = vinberg()
    op = variance_Q(V, [lam] * 3, w @ m0 @ w)
    cross = op.pair(np.eye(3), np.eye(3))
    return FixtureReport(
        "variance-15-vs-13",
        {"second_derivative": true_value, "refuted_formula": refuted,
         "variance_Q_pairing": cross, "gap": true_value - refuted},
        {"second_derivative": 15.0 / lam, "refuted_formula": 13.0 / lam,
         "variance_Q_pairing": 15.0 / lam, "gap": 2.0 / lam},
        key_tol={"variance_Q_pairing": 1e-10},
        notes=[f"lambda = {lam:g}"],
    )


FIXTURES = (fixture_poset_decomposition, fixture_non_inverse, fixture_variance_counterexample)


def run_all_fixtures():
    return [fx() for fx in FIXTURES]
