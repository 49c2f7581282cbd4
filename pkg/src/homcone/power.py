"""Basic quadratic maps and generalized power functions.

For each block index ``i`` the column space ``W_i`` carries the quadratic map
``q_i(w) = w w^T``.  Its associated linear map ``phi_i`` sends ``xi`` in Z_V to
the ``m_i x m_i`` matrix with ``vc(w)^T phi_i(xi) vc(w) = <xi, q_i(w)>``;
``phi_check_i`` is ``phi_i`` with its first row and column removed.

The generalized power functions are

* ``Delta(s, x)`` on P_V, a product of powers of leading principal minors,
* ``delta(s, xi)`` on Q_V, a product of powers of ``det phi_i / det phi_check_i``,

both normalized to 1 at the identity.
"""
import numpy as np

from .errors import InvalidShape, NotInCone, NotInDualCone

TOL_PD = 1e-12


def _shape(structure, s):
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape != (structure.r,):
        raise InvalidShape(f"shape vector must have length r={structure.r}, got {s.size}")
    return s


def embed_w(structure, i, w):
    """The ``N x n_i`` matrix in W_i with coordinates ``w``."""
    basis = structure.quadratic_domains[i]
    w = np.asarray(w, dtype=float)
    if w.shape != (len(basis),):
        raise InvalidShape(f"W_{i + 1} has dimension {len(basis)}, got {w.shape}")
    return np.tensordot(w, basis, axes=1)


def q(structure, i, w):
    """Basic quadratic map ``q_i(w) = w w^T`` (an element of Z_V)."""
    x = embed_w(structure, i, w)
    return x @ x.T


def phi(structure, i, xi):
    """``phi_i(xi)`` as an ``m_i x m_i`` symmetric matrix."""
    W = structure.quadratic_domains[i]
    xi = np.asarray(xi, dtype=float)
    out = np.einsum("anp,nq,bqp->ab", W, xi, W)
    return 0.5 * (out + out.T)


def phi_check(structure, i, xi):
    """``phi_check_i(xi)``: ``phi_i(xi)`` without its first row and column."""
    return phi(structure, i, xi)[1:, 1:]


def phi_adjoint(structure, i, X):
    """Adjoint of ``phi_i`` for the trace inner products on Z_V and Sym(m_i)."""
    W = structure.quadratic_domains[i]
    X = np.asarray(X, dtype=float)
    if X.shape != (len(W), len(W)):
        raise InvalidShape(f"expected a {len(W)}x{len(W)} matrix, got {X.shape}")
    Y = np.einsum("ab,bnp,amp->nm", X, W, W)
    return structure.project(Y)


def phi_check_adjoint(structure, i, X):
    mi = structure.m[i]
    X = np.asarray(X, dtype=float)
    if X.shape != (mi - 1, mi - 1):
        raise InvalidShape(f"expected a {mi - 1}x{mi - 1} matrix, got {X.shape}")
    full = np.zeros((mi, mi))
    full[1:, 1:] = X
    return phi_adjoint(structure, i, full)


def _logdet_pos(a, floor):
    """log det of a symmetric matrix required to be positive definite."""
    if a.shape[0] == 0:
        return 0.0
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    if logdet < a.shape[0] * floor:
        return None
    return logdet


def _scale_floor(x):
    scale = max(float(np.max(np.abs(x))), np.finfo(float).tiny)
    return np.log(TOL_PD * scale)


def log_phi_dets(structure, xi):
    """``(log det phi_i(xi), log det phi_check_i(xi))`` for every i.

    Raises
    ------
    NotInDualCone
        If some ``phi_i(xi)`` is not positive definite.
    """
    xi = structure.require_z(xi, "dual-cone point")
    floor = _scale_floor(xi)
    out = []
    for i in range(structure.r):
        P = phi(structure, i, xi)
        big = _logdet_pos(P, floor)
        small = _logdet_pos(P[1:, 1:], floor)
        if big is None or small is None:
            raise NotInDualCone(f"phi_{i + 1}(xi) is not positive definite")
        out.append((big, small))
    return out


def in_dual_cone(structure, xi):
    try:
        log_phi_dets(structure, xi)
    except NotInDualCone:
        return False
    return True


def log_leading_minors(structure, x):
    """``log det x_{1:k}`` for k = 1..r; raises NotInCone unless x is in P_V."""
    x = structure.require_z(x, "cone point")
    floor = _scale_floor(x)
    out = []
    for k in range(1, structure.r + 1):
        Nk = structure.leading(k)
        ld = _logdet_pos(x[:Nk, :Nk], floor)
        if ld is None:
            raise NotInCone(f"leading minor {k} is not positive")
        out.append(ld)
    return np.array(out)


def _minor_weights(structure, s):
    """Exponents of the leading minors: s_k/n_k - s_{k+1}/n_{k+1}, last s_r/n_r."""
    ratio = s / structure.n_vector
    w = ratio.copy()
    w[:-1] -= ratio[1:]
    return w


def log_Delta(structure, s, x):
    s = _shape(structure, s)
    return float(_minor_weights(structure, s) @ log_leading_minors(structure, x))


def Delta(structure, s, x):
    """Generalized power function on P_V.

    ``Delta_s(x) = det(x)^(s_r/n_r) * prod_{k<r} det(x_{1:k})^(s_k/n_k - s_{k+1}/n_{k+1})``
    which equals ``chi_s(T)`` for ``x = T T^T``.
    """
    return float(np.exp(log_Delta(structure, s, x)))


def log_delta(structure, s, xi):
    s = _shape(structure, s)
    dets = log_phi_dets(structure, xi)
    t2 = np.array([big - small for big, small in dets]) - np.log(structure.n_vector)
    return float(s @ t2)


def delta(structure, s, xi):
    """Generalized power function on Q_V.

    ``delta_s(xi) = prod_i (det phi_i(xi) / (n_i det phi_check_i(xi)))^(s_i)``
    with ``det phi_check_r = 1``.  Each factor equals ``t_ii^2`` where
    ``xi = rho_star(T) I``.
    """
    return float(np.exp(log_delta(structure, s, xi)))


def padded_leading_inverse(structure, a, k):
    """``[(a)_{1:k}]^{-1}`` padded with zeros to ``N x N`` (k = 1..r)."""
    Nk = structure.leading(k)
    out = np.zeros((structure.N, structure.N))
    out[:Nk, :Nk] = np.linalg.inv(a[:Nk, :Nk])
    return 0.5 * (out + out.T)


def grad_log_Delta(structure, s, x):
    """Gradient of ``log Delta_s`` at ``x`` in P_V w.r.t. the trace inner product."""
    s = _shape(structure, s)
    log_leading_minors(structure, x)
    x = 0.5 * (np.asarray(x, dtype=float) + np.asarray(x, dtype=float).T)
    acc = np.zeros_like(x)
    for k, wk in enumerate(_minor_weights(structure, s), start=1):
        if wk != 0.0:
            acc += wk * padded_leading_inverse(structure, x, k)
    return structure.project(acc)


def grad_log_delta(structure, s, xi):
    """Gradient of ``log delta_s`` at ``xi`` in Q_V, assembled coordinate-wise.

    Uses ``D_a log det phi_i(xi) = tr(phi_i(xi)^{-1} phi_i(a))`` along each
    basis direction ``a``; no adjoint maps are involved.
    """
    s = _shape(structure, s)
    xi = structure.require_z(xi, "dual-cone point")
    log_phi_dets(structure, xi)
    g = np.zeros(structure.dim_z)
    for i in range(structure.r):
        P = phi(structure, i, xi)
        Pinv = np.linalg.inv(P)
        Cinv = np.linalg.inv(P[1:, 1:]) if P.shape[0] > 1 else None
        for a, e in enumerate(structure.z_basis):
            Pa = phi(structure, i, e)
            val = float(np.sum(Pinv * Pa))
            if Cinv is not None:
                val -= float(np.sum(Cinv * Pa[1:, 1:]))
            g[a] += s[i] * val
    return structure.from_coords(g)


def psi_formula(structure, s, m):
    """``sum_i s_i (phi_i^*(phi_i(m)^{-1}) - phi_check_i^*(phi_check_i(m)^{-1}))``.

    The last term has no ``phi_check`` part.  With ``s = n`` this is the
    inverse of the completion ``hat(m)``.
    """
    s = _shape(structure, s)
    m = structure.require_z(m, "dual-cone point")
    log_phi_dets(structure, m)
    out = np.zeros((structure.N, structure.N))
    for i in range(structure.r):
        P = phi(structure, i, m)
        out += s[i] * phi_adjoint(structure, i, np.linalg.inv(P))
        if P.shape[0] > 1:
            out -= s[i] * phi_check_adjoint(structure, i, np.linalg.inv(P[1:, 1:]))
    return 0.5 * (out + out.T)
