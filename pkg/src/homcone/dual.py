"""Matrix realization of the dual cone Q_V.

``Phi(xi) = diag(phi_1(xi), ..., phi_r(xi))`` is positive definite exactly on
Q_V.  After the normalization ``Phi(I)^{-1/2} Phi(xi) Phi(I)^{-1/2}`` and a
permutation of the ``d = dim Z_V`` coordinates, the image of Z_V becomes a space
``Z_W`` for a new block structure W on the partition ``(nu_r, ..., nu_1)``,
``nu_k = 1 + sum_{i<k} dim V_ki``.  The linear isomorphism
``l: Z_W -> Z_V`` then maps P_W onto Q_V and its adjoint ``l*`` maps P_V onto
Q_W.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import PermutationNotFound, StructureError
from .power import Delta, delta, phi
from .structure import BlockStructure, dual_vinberg, validate_structure, vinberg
from .wishart import ZOperator, require_shape, variance_Q

_DROP_TOL = 1e-10


def phi_big(structure, xi):
    """Block-diagonal assembly ``diag(phi_1(xi), ..., phi_r(xi))``."""
    xi = np.asarray(xi, dtype=float)
    return block_diag(*[phi(structure, i, xi) for i in range(structure.r)])


@dataclass(frozen=True)
class DualRealization:
    """A realization of Q_V as the cone P of another structure.

    Attributes
    ----------
    source, target : BlockStructure
        ``V`` and the realizing structure ``W``.
    l_matrix : ndarray
        Matrix of ``l: Z_W -> Z_V`` from ``target.z_basis`` to ``source.z_basis``
        coordinates.
    permutation : tuple or None
        New coordinate ``j`` of the ``Phi`` image is old coordinate
        ``permutation[j]``.  ``None`` for hand-built realizations.
    phi_diagonal : ndarray or None
        Diagonal of ``Phi(I)``.
    """

    source: BlockStructure
    target: BlockStructure
    l_matrix: np.ndarray
    permutation: tuple = None
    phi_diagonal: np.ndarray = None

    @property
    def l_inverse_matrix(self):
        return np.linalg.inv(self.l_matrix)

    @property
    def l_star_matrix(self):
        # both bases are orthonormal, so the adjoint is the transpose
        return self.l_matrix.T

    def l(self, x):
        return self.source.from_coords(self.l_matrix @ self.target.coords(x))

    def l_inverse(self, xi):
        return self.target.from_coords(np.linalg.solve(self.l_matrix, self.source.coords(xi)))

    def l_star(self, theta):
        return self.target.from_coords(self.l_matrix.T @ self.source.coords(theta))

    def l_star_inverse(self, y):
        return self.source.from_coords(np.linalg.solve(self.l_matrix.T, self.target.coords(y)))

    def adjoint_residual(self, x, y):
        """``|<l*(x), y>_W - <x, l(y)>_V|`` for x in Z_V, y in Z_W."""
        lhs = float(np.sum(self.l_star(x) * y))
        rhs = float(np.sum(x * self.l(y)))
        return abs(lhs - rhs)

    def to_dict(self):
        d = {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "l": self.l_matrix.tolist(),
            "l_star": self.l_star_matrix.tolist(),
        }
        if self.permutation is not None:
            d["permutation"] = list(self.permutation)
        if self.phi_diagonal is not None:
            d["phi_diagonal"] = self.phi_diagonal.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            perm = d.get("permutation")
            diag = d.get("phi_diagonal")
            return cls(BlockStructure.from_dict(d["source"]), BlockStructure.from_dict(d["target"]),
                       np.array(d["l"], dtype=float),
                       None if perm is None else tuple(int(p) for p in perm),
                       None if diag is None else np.array(diag, dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureError(f"malformed dual-realization bundle: {exc}") from exc


def _diag_weights(structure, dphi):
    """Block index carried by each coordinate of the normalized Phi on diagonal xi."""
    V = structure
    d = len(dphi)
    hits = np.zeros((V.r, d))
    off_res = 0.0
    for k in range(V.r):
        e = np.zeros((V.N, V.N))
        sl = slice(V.offsets[k], V.offsets[k + 1])
        e[sl, sl] = np.eye(V.sizes[k])
        X = phi_big(V, e) / np.sqrt(np.outer(dphi, dphi))
        hits[k] = np.diag(X)
        off_res = max(off_res, float(np.max(np.abs(X - np.diag(np.diag(X))))))
    ok = np.isclose(hits, 0.0, atol=1e-12) | np.isclose(hits, 1.0, atol=1e-12)
    if off_res > 1e-12 or not ok.all() or not np.allclose(hits.sum(axis=0), 1.0):
        raise PermutationNotFound("normalized Phi is not diagonal with unit weights on diagonal points")
    return np.argmax(hits, axis=0)


def _span_basis(mats, n_l):
    """Orthonormal basis (w.r.t. tr(AB^T)/n_l) of the span of ``mats``, dropping dependent ones."""
    out = []
    scale = max([0.0] + [float(np.linalg.norm(m)) for m in mats])
    for m in mats:
        v = m.copy()
        for _ in range(2):  # re-orthogonalize once for stability
            for q in out:
                v -= (np.sum(v * q) / n_l) * q
        norm = np.sqrt(np.sum(v * v) / n_l)
        if norm > _DROP_TOL * max(scale, 1.0):
            out.append(v / norm)
    return out


def dualize(structure):
    """Construct the canonical (non-minimal) matrix realization of Q_V.

    Returns
    -------
    DualRealization

    Raises
    ------
    PermutationNotFound
        If the diagonal condition cannot be met (cannot happen for a valid
        structure).
    """
    V = structure
    d = V.dim_z
    dphi = np.diag(phi_big(V, np.eye(V.N))).copy()
    weights = _diag_weights(V, dphi)
    perm = np.array(sorted(range(d), key=lambda j: (-weights[j], j)))
    src_block = sorted(set(weights.tolist()), reverse=True)
    nu = [int(np.sum(weights == k)) for k in src_block]
    if src_block != list(range(V.r - 1, -1, -1)):
        raise PermutationNotFound("some block index carries no coordinate")
    offs = np.concatenate([[0], np.cumsum(nu)])
    norm = 1.0 / np.sqrt(np.outer(dphi, dphi))

    def image(xi):
        X = phi_big(V, xi) * norm
        return X[np.ix_(perm, perm)]

    images = [image(e) for e in V.z_basis]
    blocks = {}
    for t_l in range(V.r):
        for t_k in range(t_l):
            mats = [Y[offs[t_l]:offs[t_l + 1], offs[t_k]:offs[t_k + 1]] for Y in images]
            basis = _span_basis(mats, nu[t_l])
            if basis:
                blocks[(t_l, t_k)] = basis
    W = BlockStructure(nu, blocks)
    report = validate_structure(W)
    if not report.ok:
        raise PermutationNotFound(f"extracted structure violates V1-V3:\n{report}")
    if W.dim_z != d:
        raise PermutationNotFound(f"dimension mismatch: dim Z_W = {W.dim_z}, dim Z_V = {d}")
    L_inv = np.column_stack([W.coords(Y) for Y in images])
    res = max(float(np.max(np.abs(Y - W.from_coords(c)))) for Y, c in zip(images, L_inv.T))
    if res > 1e-10:
        raise PermutationNotFound(f"image of Z_V is not Z_W (residual {res:.2e})")
    return DualRealization(V, W, np.linalg.inv(L_inv), tuple(int(p) for p in perm), dphi)


def diag_condition_residual(real, xi):
    """Residual of the block-diagonal form for a diagonal xi in Z_V (0 expected)."""
    if real.permutation is None:
        raise ValueError("hand-built realization carries no permutation")
    V = real.source
    perm = np.array(real.permutation)
    X = phi_big(V, xi) / np.sqrt(np.outer(real.phi_diagonal, real.phi_diagonal))
    X = X[np.ix_(perm, perm)]
    diag_vals = [xi[o, o] for o in V.offsets[:-1]][::-1]
    expected = block_diag(*[v * np.eye(n) for v, n in zip(diag_vals, real.target.sizes)])
    return float(np.max(np.abs(X - expected)))


def check_strange(real, s, x):
    """Relative gap between ``Delta^W_{s*}(x)`` and ``delta^V_s(l(x))`` for x in P_W."""
    s = np.asarray(s, dtype=float)
    a = Delta(real.target, s[::-1], x)
    b = delta(real.source, s, real.l(x))
    return abs(a - b) / abs(b)


def variance_P_via_dual(real, s, x):
    """Variance function on P_V through the realization of Q_V.

    ``(l*)^{-1} o variance_Q^W(s*, l*(x)) o l^{-1}`` with ``s* = reversed(s)``.
    """
    s = require_shape(real.source, "P", s)
    VQ = variance_Q(real.target, s[::-1], real.l_star(x))
    L_inv = real.l_inverse_matrix
    A = L_inv.T @ VQ.matrix @ L_inv
    return ZOperator(0.5 * (A + A.T), real.source)


def _vinberg_l_inverse(xi):
    x1, x2, x3, x4, x5 = xi[0, 0], xi[1, 1], xi[2, 2], xi[2, 0], xi[2, 1]
    return np.array([[x3, 0, x5, 0], [0, x3, 0, x4], [x5, 0, x2, 0], [0, x4, 0, x1]])


def vinberg_optimal_realization():
    """Hand-built 4x4 realization of the Vinberg cone Q_V on :func:`dual_vinberg`."""
    V, W = vinberg(), dual_vinberg()
    L_inv = np.column_stack([W.coords(_vinberg_l_inverse(e)) for e in V.z_basis])
    return DualRealization(V, W, np.linalg.inv(L_inv))


def read_bundle(path):
    import json
    with open(path, encoding="utf-8") as fh:
        return DualRealization.from_dict(json.load(fh))
