"""The triangular group H_V and its actions on Z_V.

``H_V`` consists of lower block-triangular matrices ``T`` with diagonal blocks
``t_ll I`` (``t_ll > 0``) and ``(l, k)`` blocks in ``V_lk``.  It acts simply
transitively on P_V by ``rho(T) x = T x T^T`` and on Q_V by the adjoint
``rho_star(T) xi = pi(T^T xi T)``.
"""
import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotInCone, NotInDualCone, NotPositiveDefinite, StructureError
from .power import _shape, in_dual_cone, padded_leading_inverse, psi_formula
from .structure import TOL_STRUCT


def diagonal_entries(structure, T):
    """The scalars ``t_11, ..., t_rr`` of a block-diagonal-scalar matrix."""
    return np.array([T[o, o] for o in structure.offsets[:-1]])


def _project_factor(structure, T):
    """Nearest matrix (blockwise) with scalar diagonal blocks and (l,k) blocks in V_lk."""
    V = structure
    P = np.zeros_like(T)
    for k in range(V.r):
        blk = V.block(T, k, k)
        V.block(P, k, k)[...] = np.trace(blk) / V.sizes[k] * np.eye(V.sizes[k])
        for l in range(k + 1, V.r):
            B = V.block(T, l, k)
            acc = np.zeros_like(B)
            for C in V.block_basis(l, k):
                acc += np.sum(B * C) / V.sizes[l] * C
            V.block(P, l, k)[...] = acc
    return P


def factor_residual(structure, T):
    """Distance of ``T`` from the linear span of H_V (relative max-abs)."""
    T = np.asarray(T, dtype=float)
    P = _project_factor(structure, T)
    return float(np.max(np.abs(T - P))) / max(1.0, float(np.max(np.abs(T))))


def is_factor(structure, T, tol=TOL_STRUCT):
    T = np.asarray(T, dtype=float)
    if T.shape != (structure.N, structure.N):
        return False
    return factor_residual(structure, T) <= tol and bool(np.all(diagonal_entries(structure, T) > 0))


def random_factor(structure, rng, spread=0.5, offdiag=1.0):
    """A random element of H_V.

    Diagonal scalars are ``exp(spread * N(0,1))``; off-diagonal blocks are
    Gaussian combinations of the ``V_lk`` basis with scale ``offdiag``.
    """
    V = structure
    T = np.zeros((V.N, V.N))
    for k in range(V.r):
        V.block(T, k, k)[...] = np.exp(spread * rng.standard_normal()) * np.eye(V.sizes[k])
        for l in range(k + 1, V.r):
            basis = V.block_basis(l, k)
            if len(basis):
                V.block(T, l, k)[...] = np.tensordot(offdiag * rng.standard_normal(len(basis)),
                                                     basis, axes=1)
    return T


def chi(structure, s, T):
    """Character ``chi_s(T) = prod_k t_kk^(2 s_k)``."""
    s = _shape(structure, s)
    t = diagonal_entries(structure, np.asarray(T, dtype=float))
    if np.any(t <= 0):
        raise StructureError("triangular factor must have positive diagonal")
    return float(np.exp(2.0 * s @ np.log(t)))


def rho(T, x):
    T = np.asarray(T, dtype=float)
    out = T @ np.asarray(x, dtype=float) @ T.T
    return 0.5 * (out + out.T)


def rho_star(structure, T, xi):
    """Adjoint action ``pi(T^T xi T)``."""
    T = np.asarray(T, dtype=float)
    return structure.project(T.T @ np.asarray(xi, dtype=float) @ T)


def random_point_P(structure, rng, **kw):
    return rho(random_factor(structure, rng, **kw), np.eye(structure.N))


def random_point_Q(structure, rng, **kw):
    return rho_star(structure, random_factor(structure, rng, **kw), np.eye(structure.N))


def cholesky_P(structure, x):
    """The unique ``T`` in H_V with ``T T^T = x`` for ``x`` in P_V.

    The ordinary lower Cholesky factor of a point of P_V already lies in H_V;
    it is cleaned to the exact block pattern before returning.

    Raises
    ------
    NotInZ
        If ``x`` is not in Z_V.
    NotPositiveDefinite
        If ``x`` is not positive definite.
    """
    V = structure
    x = V.require_z(x, "cone point")
    try:
        L = np.linalg.cholesky(x)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("point is not positive definite") from exc
    return _project_factor(V, L)


def leading_completion(structure, y, k):
    """``[(y^{-1})_{1:k}]^{-1}_0`` for a positive definite ``y`` (k = 1..r)."""
    return padded_leading_inverse(structure, np.linalg.inv(y), k)


def J(structure, k):
    """``J_k``: identity on the first k blocks, zero elsewhere (k = 0..r)."""
    out = np.zeros((structure.N, structure.N))
    Nk = structure.leading(k)
    out[:Nk, :Nk] = np.eye(Nk)
    return out


def hat(structure, xi):
    """The completion ``hat(xi) = T^T T`` where ``xi = rho_star(T) I``.

    Computed as the inverse of the generalized Lauritzen formula; satisfies
    ``pi(hat(xi)) = xi`` and ``hat(xi)^{-1}`` in P_V.

    Raises
    ------
    NotInDualCone
    """
    if not in_dual_cone(structure, xi):
        raise NotInDualCone("point is not in the dual cone Q_V")
    inv = psi_formula(structure, structure.n_vector, xi)
    out = np.linalg.inv(inv)
    return 0.5 * (out + out.T)


def decompose_Q(structure, xi):
    """The unique ``T`` in H_V with ``rho_star(T) I = xi``.

    Obtained as ``S^{-1}`` where ``S = cholesky_P(hat(xi)^{-1})``.
    """
    if not in_dual_cone(structure, xi):
        raise NotInDualCone("point is not in the dual cone Q_V")
    inv_hat = psi_formula(structure, structure.n_vector, xi)
    try:
        S = cholesky_P(structure, inv_hat)
    except NotInCone as exc:  # pragma: no cover - excluded by the dual-cone check
        raise NotInDualCone(str(exc)) from exc
    return solve_triangular(S, np.eye(structure.N), lower=True)
