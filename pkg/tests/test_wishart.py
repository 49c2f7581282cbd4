import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homcone.errors import InvalidShape
from homcone.structure import full_structure, vinberg
from homcone.triangular import hat, random_factor, random_point_P, random_point_Q, rho, rho_star
from homcone.validation import fd_jacobian
from homcone.wishart import (ZOperator, congruence_matrix, gindikin, gindikin_thresholds,
                             inverse_mean_P, inverse_mean_Q, laplace_P, laplace_Q, lauritzen,
                             mean_P, mean_Q, require_shape, variance_P, variance_Q,
                             variance_Q_at_identity, vinberg_hat, vinberg_inverse_mean,
                             vinberg_lauritzen, vinberg_variance_Q)

from conftest import STRUCTURES, load_oracles, random_shape, random_sym, rel

ORACLES = load_oracles()
IDS = [f"{c['name']}-{c['side']}" for c in ORACLES]


# -- exact oracles ---------------------------------------------------------------

@pytest.mark.parametrize("case", ORACLES, ids=IDS)
def test_laplace_oracle(case):
    V, s, x = case["structure"], case["s"], case["point"]
    f = laplace_Q if case["side"] == "Q" else laplace_P
    assert np.log(f(V, s, x)) == pytest.approx(case["log_laplace"], abs=1e-12)


@pytest.mark.parametrize("case", ORACLES, ids=IDS)
def test_mean_oracle(case):
    V, s, x = case["structure"], case["s"], case["point"]
    f = mean_Q if case["side"] == "Q" else mean_P
    assert rel(f(V, s, x), case["mean"]) <= 1e-12


@pytest.mark.parametrize("case", ORACLES, ids=IDS)
def test_inverse_mean_oracle(case):
    V, s = case["structure"], case["s"]
    f = inverse_mean_Q if case["side"] == "Q" else inverse_mean_P
    assert rel(f(V, s, case["mean"]), case["point"]) <= 1e-12


@pytest.mark.parametrize("case", ORACLES, ids=IDS)
def test_variance_oracle(case):
    V, s = case["structure"], case["s"]
    f = variance_Q if case["side"] == "Q" else variance_P
    assert f(V, s, case["mean"]).rel_error(case["variance"]) <= 1e-12


# -- Gindikin sets -----------------------------------------------------------------

def test_gindikin_vinberg_boundary():
    V = vinberg()
    assert str(gindikin(V, "Q", [0.5, 1, 1])) == "(0,1,1)"
    assert str(gindikin(V, "Q", [0.2, 1, 1])) == "not-in-set"
    assert gindikin(V, "Q", [1, 1, 1]).absolutely_continuous
    # s_3 > 0 forces eps_3 = 1, so s_1 and s_2 sit at 1/2 or above
    assert gindikin(V, "Q", [0.5, 0.5, 1]).eps == (0, 0, 1)
    assert not gindikin(V, "Q", [0, 0, 1]).in_set
    assert not gindikin(V, "Q", [0.5, 0, 1]).nondegenerate


def test_gindikin_vinberg_p_side():
    V = vinberg()
    # on P_V only t_3 = (eps_1 + eps_2) / 2 is nonzero
    assert str(gindikin(V, "P", [1, 1, 1])) == "(1,1,0)"
    assert str(gindikin(V, "P", [0, 1, 0.5])) == "(0,1,0)"
    assert not gindikin(V, "P", [1, 1, 0.5]).in_set
    assert gindikin(V, "P", [1, 1, 1.5]).absolutely_continuous
    assert not gindikin(V, "P", [1, 1, 0.3]).in_set


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gindikin_classical(n):
    """For Sym(n) and s = p(1,..,1) membership is the classical Gindikin set."""
    V = full_structure(n)
    for p in np.linspace(0, 3, 61):
        inside = p > (n - 1) / 2 or any(abs(p - j / 2) < 1e-12 for j in range(n))
        assert gindikin(V, "Q", [p] * n).in_set == inside, p


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(sorted(STRUCTURES)), st.sampled_from("QP"),
       st.lists(st.integers(0, 8), min_size=6, max_size=6))
def test_gindikin_strata_disjoint(name, side, halves):
    V = STRUCTURES[name]
    s = np.array(halves[:V.r] + [1] * max(0, V.r - 6), dtype=float) / 2
    hits = [eps for eps in np.ndindex(*(2,) * V.r)
            if all((g > 1e-12) if e else abs(g) <= 1e-12
                   for e, g in zip(eps, s - gindikin_thresholds(V, side, eps)))]
    cls = gindikin(V, side, s)
    assert len(hits) <= 1
    assert cls.eps == (tuple(int(e) for e in hits[0]) if hits else None)


def test_gindikin_bad_side():
    with pytest.raises(ValueError):
        gindikin(vinberg(), "R", [1, 1, 1])


def test_require_shape_errors():
    V = vinberg()
    with pytest.raises(InvalidShape):
        require_shape(V, "Q", [0.5, 0, 1])
    with pytest.raises(InvalidShape):
        require_shape(V, "Q", [0.2, 1, 1])
    with pytest.raises(InvalidShape):
        mean_Q(V, [1, 1], np.eye(3))
    with pytest.raises(InvalidShape):
        laplace_Q(V, [0.2, 1, 1], np.eye(3))


# -- Laplace transforms and means ------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_laplace_full_cone(n, rng):
    V = full_structure(n)
    theta = random_point_P(V, rng)
    for p in (n / 2, 2.7):
        assert laplace_Q(V, [p] * n, theta) == pytest.approx(np.linalg.det(theta) ** -p, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_mean_full_cone(n, rng):
    V = full_structure(n)
    theta = random_point_P(V, rng)
    p = 3.1
    assert rel(mean_Q(V, [p] * n, theta), p * np.linalg.inv(theta)) <= 1e-12


def test_mean_at_n_vector_is_projected_inverse(structure, rng):
    theta = random_point_P(structure, rng)
    m = mean_Q(structure, structure.n_vector, theta)
    assert rel(m, structure.project(np.linalg.inv(theta))) <= 1e-11


def test_mean_roundtrip_Q(structure, rng):
    for _ in range(5):
        s = random_shape(structure, "Q", rng)
        theta = random_point_P(structure, rng)
        m = mean_Q(structure, s, theta)
        assert rel(inverse_mean_Q(structure, s, m), theta) <= 1e-9


def test_mean_roundtrip_P(structure, rng):
    for _ in range(5):
        s = random_shape(structure, "P", rng)
        xi = random_point_Q(structure, rng)
        x = mean_P(structure, s, xi)
        assert rel(inverse_mean_P(structure, s, x), xi) <= 1e-9


def test_lauritzen_inverts_hat(structure, rng):
    for _ in range(5):
        m = random_point_Q(structure, rng)
        assert rel(lauritzen(structure, m) @ hat(structure, m), np.eye(structure.N)) <= 1e-9


# -- Vinberg closed forms --------------------------------------------------------

def _display_lauritzen_literal(m):
    """The three-term display with m33 (not m11) in the corner of the first term."""
    m11, m22, m33 = m[0, 0], m[1, 1], m[2, 2]
    m31, m32 = m[2, 0], m[2, 1]
    d13, d23 = m11 * m33 - m31 ** 2, m22 * m33 - m32 ** 2
    a = np.array([[m33, 0, -m31], [0, 0, 0], [-m31, 0, m33]]) / d13
    b = np.array([[0, 0, 0], [0, m33, -m32], [0, -m32, m22]]) / d23
    c = np.zeros((3, 3))
    c[2, 2] = 1 / m33
    return a + b - c


def test_vinberg_closed_forms(rng):
    V = vinberg()
    for _ in range(20):
        m = random_point_Q(V, rng)
        s = random_shape(V, "Q", rng)
        assert rel(vinberg_hat(m), hat(V, m)) <= 1e-12
        assert rel(vinberg_lauritzen(m), lauritzen(V, m)) <= 1e-10
        assert rel(vinberg_inverse_mean(s, m), inverse_mean_Q(V, s, m)) <= 1e-10
        assert rel(vinberg_inverse_mean([1, 1, 1], m), vinberg_lauritzen(m)) <= 1e-12


def test_vinberg_literal_lauritzen_display_is_not_an_inverse():
    m = np.array([[2.0, 0, 1], [0, 3, 1], [1, 1, 4]])
    good = vinberg_lauritzen(m) @ vinberg_hat(m)
    bad = _display_lauritzen_literal(m) @ vinberg_hat(m)
    assert np.allclose(good, np.eye(3), atol=1e-12)
    assert np.max(np.abs(bad - np.eye(3))) > 0.1


@pytest.mark.parametrize("layout", ["split", "nested"])
def test_vinberg_variance_layouts(layout, rng):
    V = vinberg()
    for _ in range(10):
        m = random_point_Q(V, rng)
        s = random_shape(V, "Q", rng)
        assert vinberg_variance_Q(s, m, layout).rel_error(variance_Q(V, s, m)) <= 1e-10


def test_vinberg_variance_bad_layout():
    with pytest.raises(ValueError):
        vinberg_variance_Q([1, 1, 1], np.eye(3), "other")


def test_vinberg_variance_constant_shape(rng):
    V = vinberg()
    m = random_point_Q(V, rng)
    p = 1.7
    expect = congruence_matrix(V, vinberg_hat(m)) / p
    assert variance_Q(V, [p] * 3, m).rel_error(expect) <= 1e-12


# -- variance functions -------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_variance_Q_classical(n, rng):
    V = full_structure(n)
    m = random_point_Q(V, rng)
    y = random_sym(n, rng)
    p = 2.3
    assert rel(variance_Q(V, [p] * n, m).apply(y), m @ y @ m / p) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_variance_P_classical(n, rng):
    V = full_structure(n)
    x = random_point_P(V, rng)
    y = random_sym(n, rng)
    p = 2.3
    assert rel(variance_P(V, [p] * n, x).apply(y), x @ y @ x / p) <= 1e-12


def test_variance_Q_at_identity(structure, rng):
    s = random_shape(structure, "Q", rng)
    I = np.eye(structure.N)
    assert variance_Q(structure, s, I).rel_error(variance_Q_at_identity(structure, s)) <= 1e-12


def test_variance_P_at_identity(structure, rng):
    """At x = I the middle factor is diagonal in z coordinates with weights n_k/s_k."""
    V = structure
    s = random_shape(V, "P", rng)
    A = variance_P(V, s, np.eye(V.N)).matrix
    assert np.allclose(A, np.diag(np.diag(A)), atol=1e-13)
    assert np.all(np.diag(A) > 0)


def test_variance_Q_is_minus_mean_jacobian(structure, rng):
    for _ in range(3):
        s = random_shape(structure, "Q", rng)
        theta = random_point_P(structure, rng)
        fd = fd_jacobian(structure, lambda t: mean_Q(structure, s, t), theta)
        op = variance_Q(structure, s, mean_Q(structure, s, theta))
        assert op.rel_error(-fd.matrix) <= 1e-5


def test_variance_P_is_minus_mean_jacobian(structure, rng):
    for _ in range(3):
        s = random_shape(structure, "P", rng)
        xi = random_point_Q(structure, rng)
        fd = fd_jacobian(structure, lambda t: mean_P(structure, s, t), xi)
        op = variance_P(structure, s, mean_P(structure, s, xi))
        assert op.rel_error(-fd.matrix) <= 1e-5


@pytest.mark.parametrize("side", ["Q", "P"])
def test_variance_symmetric_positive(structure, side, rng):
    f, pt = (variance_Q, random_point_Q) if side == "Q" else (variance_P, random_point_P)
    for _ in range(5):
        op = f(structure, random_shape(structure, side, rng), pt(structure, rng))
        assert op.symmetry_residual() <= 1e-12
        assert op.min_eigenvalue() > 0


def test_variance_Q_equivariance(structure, rng):
    V = structure
    s = random_shape(V, "Q", rng)
    m = random_point_Q(V, rng)
    T = random_factor(V, rng)
    Rs = congruence_matrix(V, T.T)  # rho*(T)
    lhs = variance_Q(V, s, rho_star(V, T, m))
    assert lhs.rel_error(Rs @ variance_Q(V, s, m).matrix @ Rs.T) <= 1e-9


def test_variance_P_equivariance(structure, rng):
    V = structure
    s = random_shape(V, "P", rng)
    x = random_point_P(V, rng)
    T = random_factor(V, rng)
    R = congruence_matrix(V, T)
    lhs = variance_P(V, s, rho(T, x))
    assert lhs.rel_error(R @ variance_P(V, s, x).matrix @ R.T) <= 1e-9


def test_congruence_is_rho(structure, rng):
    T = random_factor(structure, rng)
    y = structure.project(random_sym(structure.N, rng))
    C = ZOperator(congruence_matrix(structure, T), structure)
    assert rel(C.apply(y), rho(T, y)) <= 1e-12
    assert np.allclose(congruence_matrix(structure, T.T), congruence_matrix(structure, T).T)


def test_zoperator_assemble_and_pair(structure, rng):
    op = ZOperator.assemble(structure, lambda y: 2.0 * y)
    assert np.allclose(op.matrix, 2 * np.eye(structure.dim_z))
    a = structure.project(random_sym(structure.N, rng))
    assert op.pair(a, a) == pytest.approx(2 * np.sum(a * a))
