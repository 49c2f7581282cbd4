import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homcone.errors import InvalidShape, NotInCone, NotInDualCone
from homcone.power import (Delta, delta, embed_w, grad_log_Delta, grad_log_delta, log_Delta,
                           log_delta, phi, phi_adjoint, phi_check, phi_check_adjoint, psi_formula,
                           q)
from homcone.structure import full_structure, vinberg
from homcone.triangular import chi, random_factor, random_point_P, random_point_Q, rho, rho_star
from homcone.validation import fd_gradient

from conftest import STRUCTURES, load_oracles, random_sym


def test_quadratic_domain_dims(structure):
    assert sum(structure.m) == structure.dim_z
    for i in range(structure.r):
        expect = 1 + sum(structure.dim(l, i) for l in range(i + 1, structure.r))
        assert structure.m[i] == expect


def test_q_vinberg():
    V = vinberg()
    a, b = 1.5, -2.0
    x = q(V, 0, [a, b])
    assert np.allclose(x, [[a * a, 0, a * b], [0, 0, 0], [a * b, 0, b * b]])


def test_q_unit_vector(structure):
    for i in range(structure.r):
        e = np.zeros(structure.m[i])
        e[0] = 1.0
        x = q(structure, i, e)
        sl = slice(structure.offsets[i], structure.offsets[i + 1])
        expect = np.zeros((structure.N, structure.N))
        expect[sl, sl] = np.eye(structure.sizes[i])
        assert np.allclose(x, expect)


def test_q_in_z_and_psd(structure, rng):
    for i in range(structure.r):
        x = q(structure, i, rng.standard_normal(structure.m[i]))
        assert structure.in_z(x)
        assert np.linalg.eigvalsh(x)[0] >= -1e-12
        assert np.linalg.matrix_rank(x, tol=1e-10) <= structure.sizes[i]


def test_phi_defining_identity(structure, rng):
    for _ in range(5):
        xi = structure.project(random_sym(structure.N, rng))
        for i in range(structure.r):
            w = rng.standard_normal(structure.m[i])
            lhs = w @ phi(structure, i, xi) @ w
            rhs = np.trace(xi @ q(structure, i, w))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_phi_vinberg_display():
    V = vinberg()
    xi = np.array([[1.0, 0, 4], [0, 2, 5], [4, 5, 3]])
    assert np.allclose(phi(V, 0, xi), [[1, 4], [4, 3]])
    assert np.allclose(phi(V, 1, xi), [[2, 5], [5, 3]])
    assert np.allclose(phi(V, 2, xi), [[3]])
    assert np.allclose(phi_check(V, 0, xi), [[3]])
    assert np.allclose(phi_check(V, 1, xi), [[3]])


def test_phi_at_identity(structure):
    for i in range(structure.r):
        expect = [structure.sizes[i]] + [structure.sizes[l] for l in range(i + 1, structure.r)
                                         for _ in range(structure.dim(l, i))]
        assert np.allclose(phi(structure, i, np.eye(structure.N)), np.diag(expect))


def test_phi_block_layout(structure, rng):
    xi = structure.project(random_sym(structure.N, rng))
    for i in range(structure.r):
        P = phi(structure, i, xi)
        o = structure.offsets[i]
        assert P[0, 0] == pytest.approx(structure.sizes[i] * xi[o, o])
        col = 1
        for l in range(i + 1, structure.r):
            nl = structure.sizes[l]
            for A in structure.block_basis(l, i):
                # border entry n_l * (xi_li | A)
                want = nl * np.sum(structure.block(xi, l, i) * A) / nl
                assert P[col, 0] == pytest.approx(want, abs=1e-12)
                col += 1


def test_phi_adjoint_vinberg_display():
    V = vinberg()
    a, b, c = 2.0, -1.0, 3.0
    X = np.array([[a, b], [b, c]])
    assert np.allclose(phi_adjoint(V, 0, X), [[a, 0, b], [0, 0, 0], [b, 0, c]])
    assert np.allclose(phi_adjoint(V, 1, X), [[0, 0, 0], [0, a, b], [0, b, c]])
    e33 = np.zeros((3, 3))
    e33[2, 2] = a
    assert np.allclose(phi_adjoint(V, 2, [[a]]), e33)
    assert np.allclose(phi_check_adjoint(V, 0, [[a]]), e33)


def test_phi_adjoint_zero(structure):
    for i in range(structure.r):
        assert not np.any(phi_adjoint(structure, i, np.zeros((structure.m[i],) * 2)))


def test_phi_adjointness(structure, rng):
    for _ in range(5):
        xi = structure.project(random_sym(structure.N, rng))
        for i in range(structure.r):
            X = random_sym(structure.m[i], rng)
            lhs = np.trace(xi @ phi_adjoint(structure, i, X))
            rhs = np.trace(phi(structure, i, xi) @ X)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_embed_w_bad_length():
    with pytest.raises(InvalidShape):
        embed_w(vinberg(), 0, [1.0])


def test_Delta_full_cone_is_det(rng):
    for n in (2, 3, 4):
        V = full_structure(n)
        x = random_point_P(V, rng)
        assert Delta(V, np.ones(n), x) == pytest.approx(np.linalg.det(x), rel=1e-12)


def test_power_functions_at_identity(structure, rng):
    s = rng.uniform(-3, 3, structure.r)
    assert Delta(structure, s, np.eye(structure.N)) == pytest.approx(1.0, abs=1e-14)
    assert delta(structure, s, np.eye(structure.N)) == pytest.approx(1.0, abs=1e-14)


def test_Delta_equals_chi(structure, rng):
    for _ in range(20):
        T = random_factor(structure, rng)
        s = rng.uniform(-2, 2, structure.r)
        assert Delta(structure, s, T @ T.T) / chi(structure, s, T) == pytest.approx(1, abs=1e-12)


def test_delta_equals_chi(structure, rng):
    for _ in range(20):
        T = random_factor(structure, rng)
        s = rng.uniform(-2, 2, structure.r)
        xi = rho_star(structure, T, np.eye(structure.N))
        assert delta(structure, s, xi) / chi(structure, s, T) == pytest.approx(1, abs=1e-11)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(sorted(STRUCTURES)), st.integers(0, 2**32 - 1))
def test_equivariance_of_power_functions(name, seed):
    V = STRUCTURES[name]
    rng = np.random.default_rng(seed)
    T = random_factor(V, rng)
    s = rng.uniform(-2, 2, V.r)
    x = random_point_P(V, rng)
    xi = random_point_Q(V, rng)
    c = chi(V, s, T)
    assert Delta(V, s, rho(T, x)) / (c * Delta(V, s, x)) == pytest.approx(1, abs=1e-11)
    assert delta(V, s, rho_star(V, T, xi)) / (c * delta(V, s, xi)) == pytest.approx(1, abs=1e-11)
    # power function on P_V as a negative power on Q_V
    assert Delta(V, s, x) / delta(V, -s, V.project(np.linalg.inv(x))) == pytest.approx(1, abs=1e-11)


def test_phi_det_character(structure, rng):
    """det phi_i(rho*(T) I) = chi_{m_i}(T) det phi_i(I) with m_i = (0,..,1, dim V_{i+1,i}, ..)."""
    V = structure
    for _ in range(10):
        T = random_factor(V, rng)
        xi = rho_star(V, T, np.eye(V.N))
        for i in range(V.r):
            mi = np.zeros(V.r)
            mi[i] = 1
            for l in range(i + 1, V.r):
                mi[l] = V.dim(l, i)
            lhs = np.linalg.det(phi(V, i, xi))
            rhs = chi(V, mi, T) * np.linalg.det(phi(V, i, np.eye(V.N)))
            assert lhs / rhs == pytest.approx(1, abs=1e-11)
            mi[i] = 0
            if V.m[i] > 1:
                lhs = np.linalg.det(phi_check(V, i, xi))
                rhs = chi(V, mi, T) * np.linalg.det(phi_check(V, i, np.eye(V.N)))
                assert lhs / rhs == pytest.approx(1, abs=1e-11)


def test_phi_trace_identity(structure, rng):
    """Polarized second-order identity for phi_i and phi_check_i at the identity."""
    V = structure
    I = np.eye(V.N)
    for _ in range(10):
        a = V.project(random_sym(V.N, rng))
        b = V.project(random_sym(V.N, rng))
        for i in range(V.r - 1):
            P0 = np.linalg.inv(phi(V, i, I))
            C0 = np.linalg.inv(phi_check(V, i, I)) if V.m[i] > 1 else np.zeros((0, 0))
            lhs = np.trace(phi(V, i, a) @ P0 @ phi(V, i, b) @ P0)
            if V.m[i] > 1:
                lhs -= np.trace(phi_check(V, i, a) @ C0 @ phi_check(V, i, b) @ C0)
            o = V.offsets[i]
            rhs = a[o, o] * b[o, o]
            for l in range(i + 1, V.r):
                nl = V.sizes[l]
                rhs += 2 * nl / V.sizes[i] * np.sum(V.block(a, l, i) * V.block(b, l, i)) / nl
            assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(rhs))


def test_cone_membership_errors():
    V = vinberg()
    with pytest.raises(NotInCone):
        Delta(V, [1, 1, 1], np.diag([1.0, -1.0, 1.0]))
    bad = np.eye(3)
    bad[2, 0] = bad[0, 2] = 2.0
    with pytest.raises(NotInDualCone):
        delta(V, [1, 1, 1], bad)
    with pytest.raises(InvalidShape):
        Delta(V, [1, 1], np.eye(3))


def test_grad_log_Delta_full_cone(rng):
    V = full_structure(3)
    x = random_point_P(V, rng)
    assert np.allclose(grad_log_Delta(V, np.ones(3), x), np.linalg.inv(x), rtol=1e-12)


def test_grad_log_Delta_fd(structure, rng):
    for _ in range(5):
        s = rng.uniform(-2, 2, structure.r)
        x = random_point_P(structure, rng)
        g = grad_log_Delta(structure, s, x)
        fd = fd_gradient(structure, lambda y: log_Delta(structure, s, y), x)
        assert np.max(np.abs(g - fd)) <= 1e-5 * max(1.0, np.max(np.abs(g)))


def test_grad_log_delta_fd(structure, rng):
    for _ in range(5):
        s = rng.uniform(-2, 2, structure.r)
        xi = random_point_Q(structure, rng)
        g = grad_log_delta(structure, s, xi)
        fd = fd_gradient(structure, lambda y: log_delta(structure, s, y), xi)
        assert np.max(np.abs(g - fd)) <= 1e-5 * max(1.0, np.max(np.abs(g)))


def test_psi_equals_minus_grad_log_delta(structure, rng):
    for _ in range(10):
        s = rng.uniform(0.5, 3, structure.r)
        m = random_point_Q(structure, rng)
        a = psi_formula(structure, s, m)
        b = -grad_log_delta(structure, -s, m)
        assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(b)))


@pytest.mark.parametrize("case", load_oracles(), ids=lambda c: f"{c['name']}-{c['side']}")
def test_log_laplace_oracle(case):
    V, s, x = case["structure"], case["s"], case["point"]
    got = log_Delta(V, -s, x) if case["side"] == "Q" else log_delta(V, -s, x)
    assert got == pytest.approx(case["log_laplace"], abs=1e-12)
