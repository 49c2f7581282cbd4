"""Wishart exponential families on P_V and Q_V.

Two Riesz measures are attached to a shape ``s``:

* side ``"Q"``: ``R*_s`` on Q_V with Laplace transform ``Delta_{-s}(theta)``,
  theta in P_V; admissible shapes form the Gindikin set ``X``;
* side ``"P"``: ``R_s`` on P_V with Laplace transform ``delta_{-s}(xi)``,
  xi in Q_V; admissible shapes form the Gindikin set ``Xi``.

Variance functions are returned as :class:`ZOperator` matrices in the
orthonormal basis ``structure.z_basis``.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidShape, NotInDualCone
from .power import (_shape, Delta, delta, grad_log_Delta, grad_log_delta,
                    padded_leading_inverse, psi_formula)
from .structure import BlockStructure, vinberg
from .triangular import J, cholesky_P

GINDIKIN_ATOL = 1e-12
_SIDES = {"Q": "Q", "X": "Q", "DUAL": "Q", "P": "P", "XI": "P", "CONE": "P"}


@dataclass(frozen=True)
class ZOperator:
    """A linear operator on Z_V as a ``d x d`` matrix in ``z_basis`` coordinates."""

    matrix: np.ndarray
    structure: BlockStructure

    @classmethod
    def assemble(cls, structure, f):
        """Materialize a linear map ``f: Z_V -> Z_V`` column by column."""
        cols = [structure.coords(f(e)) for e in structure.z_basis]
        return cls(np.column_stack(cols), structure)

    def apply(self, y):
        V = self.structure
        return V.from_coords(self.matrix @ V.coords(V.project(y)))

    def pair(self, a, b):
        """``<a, A(b)>`` for a, b in Z_V."""
        V = self.structure
        return float(V.coords(a) @ self.matrix @ V.coords(b))

    def symmetry_residual(self):
        A = self.matrix
        return float(np.max(np.abs(A - A.T))) / max(1.0, float(np.max(np.abs(A))))

    def min_eigenvalue(self):
        A = self.matrix
        return float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])

    def rel_error(self, other):
        B = other.matrix if isinstance(other, ZOperator) else np.asarray(other)
        return float(np.max(np.abs(self.matrix - B)) / np.max(np.abs(B)))


def congruence_matrix(structure, a):
    """Matrix of ``pi o rho(a)`` (``y -> pi(a y a^T)``) on Z_V."""
    B = structure.z_basis
    imgs = np.einsum("np,bpq,rq->bnr", a, B, a)
    return np.einsum("anr,bnr->ab", B, imgs)


# -- Gindikin sets --------------------------------------------------------------

@dataclass(frozen=True)
class GindikinClass:
    """Stratum of a shape vector in a Gindikin set.

    ``eps`` is ``None`` when the shape lies outside the set.  ``nondegenerate``
    records whether all ``s_k > 0`` (the Riesz measure is then not
    concentrated on an affine hyperplane).
    """

    side: str
    eps: tuple
    nondegenerate: bool

    @property
    def in_set(self):
        return self.eps is not None

    @property
    def absolutely_continuous(self):
        return self.in_set and all(self.eps)

    def __str__(self):
        if not self.in_set:
            return "not-in-set"
        return "(" + ",".join(str(e) for e in self.eps) + ")"


def _side(side):
    try:
        return _SIDES[str(side).upper()]
    except KeyError:
        raise ValueError(f"side must be 'Q' or 'P', got {side!r}") from None


def gindikin_thresholds(structure, side, eps):
    """Half-sums ``t_k`` against which ``s_k`` is compared for a given ``eps``."""
    V, side = structure, _side(side)
    t = np.zeros(V.r)
    for k in range(V.r):
        if side == "Q":
            t[k] = 0.5 * sum(eps[l] * V.dim(l, k) for l in range(k + 1, V.r))
        else:
            t[k] = 0.5 * sum(eps[i] * V.dim(k, i) for i in range(k))
    return t


def gindikin(structure, side, s, atol=GINDIKIN_ATOL):
    """Classify ``s`` into ``X(eps)`` (side Q) or ``Xi(eps)`` (side P).

    Every candidate ``eps`` in {0,1}^r is tested; the strata are disjoint so
    at most one matches.
    """
    side = _side(side)
    s = _shape(structure, s)
    hits = []
    for eps in itertools.product((0, 1), repeat=structure.r):
        gap = s - gindikin_thresholds(structure, side, eps)
        if all((g > atol) if e else (abs(g) <= atol) for e, g in zip(eps, gap)):
            hits.append(eps)
    if len(hits) > 1:  # pragma: no cover - the strata are disjoint
        raise AssertionError(f"overlapping Gindikin strata {hits}")
    return GindikinClass(side, hits[0] if hits else None, bool(np.all(s > 0)))


def require_shape(structure, side, s):
    """Return ``s`` as an array if it is admissible with all ``s_k > 0``."""
    s = _shape(structure, s)
    if np.any(s <= 0):
        raise InvalidShape("all shape parameters must be positive")
    if not gindikin(structure, side, s).in_set:
        raise InvalidShape(f"shape {s.tolist()} is outside the Gindikin set (side {_side(side)})")
    return s


# -- Laplace transforms and mean maps --------------------------------------

def laplace_Q(structure, s, theta):
    """Laplace transform of ``R*_s`` at theta in P_V: ``Delta_{-s}(theta)``."""
    s = _shape(structure, s)
    if not gindikin(structure, "Q", s).in_set:
        raise InvalidShape("shape is outside the Gindikin set X")
    return Delta(structure, -s, theta)


def laplace_P(structure, s, xi):
    """Laplace transform of ``R_s`` at xi in Q_V: ``delta_{-s}(xi)``."""
    s = _shape(structure, s)
    if not gindikin(structure, "P", s).in_set:
        raise InvalidShape("shape is outside the Gindikin set Xi")
    return delta(structure, -s, xi)


def mean_Q(structure, s, theta):
    """Mean of the Wishart law on Q_V with parameter theta in P_V."""
    s = require_shape(structure, "Q", s)
    return -grad_log_Delta(structure, -s, theta)


def inverse_mean_Q(structure, s, m):
    """Inverse mean map ``psi_s: Q_V -> P_V``.

    ``psi_s(m) = s_r phi_r^*(phi_r(m)^{-1})
    + sum_{i<r} s_i (phi_i^*(phi_i(m)^{-1}) - phi_check_i^*(phi_check_i(m)^{-1}))``.
    """
    s = require_shape(structure, "Q", s)
    return psi_formula(structure, s, m)


def mean_P(structure, s, xi):
    """Mean of the Wishart law on P_V with parameter xi in Q_V."""
    s = require_shape(structure, "P", s)
    return -grad_log_delta(structure, -s, xi)


def inverse_mean_P(structure, s, x):
    """Inverse mean map on P_V: ``-(log Delta_{-s})'(x)``."""
    s = require_shape(structure, "P", s)
    return -grad_log_Delta(structure, -s, x)


def lauritzen(structure, m):
    """Generalized Lauritzen formula: ``hat(m)^{-1} = psi_n(m)`` for m in Q_V."""
    return psi_formula(structure, structure.n_vector, m)


# -- variance functions ------------------------------------------------------

def variance_Q(structure, s, m):
    """Variance function of the Wishart family on Q_V at mean ``m``.

    ``pi o { (n_1/s_1) rho(mh) + sum_{i>=2} (n_i/s_i - n_{i-1}/s_{i-1})
    rho(mh - [(mh^{-1})_{1:i-1}]^{-1}_0) }`` with ``mh = hat(m)``.
    """
    V = structure
    s = require_shape(V, "Q", s)
    inv_hat = lauritzen(V, m)
    mh = np.linalg.inv(inv_hat)
    mh = 0.5 * (mh + mh.T)
    ratio = V.n_vector / s
    A = ratio[0] * congruence_matrix(V, mh)
    for i in range(1, V.r):
        c = ratio[i] - ratio[i - 1]
        if c != 0.0:
            A += c * congruence_matrix(V, mh - padded_leading_inverse(V, inv_hat, i))
    return ZOperator(0.5 * (A + A.T), V)


def variance_Q_at_identity(structure, s):
    """``sum_i (n_i/s_i)(P_{i-1} - P_i)`` with ``P_k = rho(I - J_k)``, ``P_r = 0``."""
    V = structure
    s = require_shape(V, "Q", s)
    ratio = V.n_vector / s
    proj = [congruence_matrix(V, np.eye(V.N) - J(V, k)) for k in range(V.r)]
    proj.append(np.zeros((V.dim_z, V.dim_z)))
    A = sum(ratio[i] * (proj[i] - proj[i + 1]) for i in range(V.r))
    return ZOperator(A, V)


def variance_P(structure, s, x):
    """Variance function of the Wishart family on P_V at mean ``x``.

    With ``T = cholesky_P(x)``: ``(n_r/s_r) rho(T) rho*(T) + sum_{k<r}
    (n_k/s_k - n_{k+1}/s_{k+1}) rho(T) rho(J_k) rho*(T)``.
    """
    V = structure
    s = require_shape(V, "P", s)
    T = cholesky_P(V, x)
    R = congruence_matrix(V, T)  # rho(T); rho*(T) is its transpose
    ratio = V.n_vector / s
    mid = ratio[-1] * np.eye(V.dim_z)
    for k in range(1, V.r):
        c = ratio[k - 1] - ratio[k]
        if c != 0.0:
            mid += c * congruence_matrix(V, J(V, k))
    A = R @ mid @ R.T
    return ZOperator(0.5 * (A + A.T), V)


# -- explicit formulas on the Vinberg structure ------------------------

def _vinberg_entries(m):
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    return m[0, 0], m[1, 1], m[2, 2], m[2, 0], m[2, 1]


def _vinberg_minors(m):
    m11, m22, m33, m31, m32 = _vinberg_entries(m)
    d13 = m11 * m33 - m31 ** 2
    d23 = m22 * m33 - m32 ** 2
    if not (m33 > 0 and d13 > 0 and d23 > 0):
        raise NotInDualCone("point is not in the Vinberg cone")
    return d13, d23


def vinberg_hat(m):
    """Closed-form completion on the Vinberg structure: fills (1,2) with m31 m32 / m33."""
    _vinberg_minors(m)
    m11, m22, m33, m31, m32 = _vinberg_entries(m)
    c = m31 * m32 / m33
    return np.array([[m11, c, m31], [c, m22, m32], [m31, m32, m33]])


def vinberg_lauritzen(m):
    """Closed-form ``hat(m)^{-1}`` on the Vinberg structure (three-term sum)."""
    d13, d23 = _vinberg_minors(m)
    m11, m22, m33, m31, m32 = _vinberg_entries(m)
    a = np.array([[m33, 0, -m31], [0, 0, 0], [-m31, 0, m11]]) / d13
    b = np.array([[0, 0, 0], [0, m33, -m32], [0, -m32, m22]]) / d23
    c = np.zeros((3, 3))
    c[2, 2] = 1.0 / m33
    return a + b - c


def vinberg_inverse_mean(s, m):
    """Closed-form ``psi_s(m)`` on the Vinberg structure."""
    d13, d23 = _vinberg_minors(m)
    m11, m22, m33, m31, m32 = _vinberg_entries(m)
    s1, s2, s3 = np.asarray(s, dtype=float)
    a = np.array([[m33, 0, -m31], [0, 0, 0], [-m31, 0, m11]]) / d13
    b = np.array([[0, 0, 0], [0, m33, -m32], [0, -m32, m22]]) / d23
    c = np.zeros((3, 3))
    c[2, 2] = 1.0 / m33
    return s1 * a + s2 * b + (s3 - s1 - s2) * c


def vinberg_variance_Q(s, m, layout="split"):
    """Closed-form variance function on the Vinberg structure.

    ``layout="nested"`` uses the corrections ``M_1`` and ``M_1 + M_2``;
    ``layout="split"`` the rearranged form with ``M_1`` and ``M_2`` separately.
    Both must agree with :func:`variance_Q` on :func:`~homcone.structure.vinberg`.
    """
    V = vinberg()
    s1, s2, s3 = require_shape(V, "Q", s)
    d13, d23 = _vinberg_minors(m)
    m33 = float(np.asarray(m)[2, 2])
    mh = vinberg_hat(m)
    M1 = np.zeros((3, 3))
    M1[0, 0] = d13 / m33
    M2 = np.zeros((3, 3))
    M2[1, 1] = d23 / m33
    C = lambda a: congruence_matrix(V, a)  # noqa: E731
    if layout == "nested":
        A = (C(mh) / s1 + (1 / s2 - 1 / s1) * C(mh - M1)
             + (1 / s3 - 1 / s2) * C(mh - M1 - M2))
    elif layout == "split":
        A = ((1 / s1 + 1 / s2 - 1 / s3) * C(mh) + (1 / s3 - 1 / s1) * C(mh - M1)
             + (1 / s3 - 1 / s2) * C(mh - M2))
    else:
        raise ValueError(f"unknown layout {layout!r}")
    return ZOperator(A, V)


variance_Q_alt_vinberg = vinberg_variance_Q
