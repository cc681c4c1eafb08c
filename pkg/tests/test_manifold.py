import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isac_hbf import CircleManifold, ManifoldPoint, RcgSettings, ScaledUnitaryManifold, rcg_minimize
from isac_hbf.errors import DomainError, NumericError, RankError, ShapeError
from isac_hbf.manifold import RcgInfo, inner, retract, tangent_project, transport

from conftest import crandn

CIRCLE = CircleManifold(0.5)


def circle_point(rng, shape=(4, 3)):
    return ManifoldPoint(CIRCLE.random_point(shape, rng), CIRCLE)


def su_point(rng, shape=(3, 5), c=2.0):
    man = ScaledUnitaryManifold(c)
    return ManifoldPoint(man.random_point(shape, rng), man)


def test_radial_gradient_projects_to_zero(rng):
    p = circle_point(rng)
    assert np.abs(tangent_project(p, 3.7 * p.value)).max() <= 1e-15


@given(seed=st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_circle_projection_is_tangent_and_idempotent(seed):
    rng = np.random.default_rng(seed)
    p = circle_point(rng)
    xi = tangent_project(p, crandn(rng, 4, 3))
    assert np.abs(np.real(xi * p.value.conj())).max() <= 1e-12
    np.testing.assert_allclose(tangent_project(p, xi), xi, atol=1e-12)


@given(seed=st.integers(0, 2**31), tall=st.booleans())
@settings(max_examples=30, deadline=None)
def test_scaled_unitary_projection_is_tangent_and_idempotent(seed, tall):
    rng = np.random.default_rng(seed)
    p = su_point(rng, (5, 3) if tall else (3, 5))
    X = p.value
    xi = tangent_project(p, crandn(rng, *X.shape))
    sym = X.conj().T @ xi if tall else xi @ X.conj().T
    assert np.abs(sym + sym.conj().T).max() <= 1e-12
    np.testing.assert_allclose(tangent_project(p, xi), xi, atol=1e-12)


def test_retraction_examples(rng):
    p = circle_point(rng)
    assert retract(p, crandn(rng, 4, 3), 0.0).value is p.value
    unit = ManifoldPoint(np.array([[1.0 + 0j]]), CircleManifold(1.0))
    got = retract(unit, np.array([[-0.7 + 0.4j]]), 1.0).value
    np.testing.assert_allclose(got, [[0.6 + 0.8j]], atol=1e-15)


@given(seed=st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_scaled_unitary_retraction_lands_on_manifold(seed):
    rng = np.random.default_rng(seed)
    p = su_point(rng)
    q = retract(p, crandn(rng, 3, 5), 0.3)
    np.testing.assert_allclose(q.value @ q.value.conj().T, 2.0 * np.eye(3), atol=1e-10)
    assert q.violation() <= 1e-10


def test_retraction_errors(rng):
    p = circle_point(rng, (1, 1))
    with pytest.raises(DomainError):
        retract(p, -p.value, 1.0)
    with pytest.raises(DomainError):
        retract(p, p.value, -1.0)
    q = ManifoldPoint(np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex), ScaledUnitaryManifold(1.0))
    with pytest.raises(RankError):
        retract(q, np.array([[0.0, 0.0], [0.0, -1.0]]), 1.0)
    with pytest.raises(ShapeError):
        tangent_project(p, np.zeros((2, 2)))


def test_transport_examples(rng):
    p = circle_point(rng)
    xi = tangent_project(p, crandn(rng, 4, 3))
    np.testing.assert_allclose(transport(p, xi), xi, atol=1e-12)
    moved = transport(p, crandn(rng, 4, 3))
    assert np.abs(np.real(moved * p.value.conj())).max() <= 1e-12
    assert np.all(transport(p, np.zeros((4, 3))) == 0)


def test_circle_minimizer_matches_phase_projection(rng):
    A = crandn(rng, 6, 4)
    start = circle_point(rng, (6, 4))
    point, trace = rcg_minimize(lambda X: float(np.sum(np.abs(X - A) ** 2)), lambda X: 2 * (X - A), start,
                                RcgSettings(grad_tol=1e-10, max_inner_iters=500))
    oracle = 0.5 * np.exp(1j * np.angle(A))
    assert trace[-1] == pytest.approx(float(np.sum(np.abs(oracle - A) ** 2)), abs=1e-6)
    assert np.all(np.diff(trace) <= 0)


def test_scaled_unitary_minimizer_matches_procrustes(rng):
    B = crandn(rng, 3, 5)
    man = ScaledUnitaryManifold(2.0)
    point, trace = rcg_minimize(lambda X: float(np.sum(np.abs(X - B) ** 2)), lambda X: 2 * (X - B),
                                su_point(rng), RcgSettings(grad_tol=1e-10, max_inner_iters=500))
    oracle = man.polar(B)
    assert trace[-1] == pytest.approx(float(np.sum(np.abs(oracle - B) ** 2)), abs=1e-6)


def test_start_at_optimum_stops_immediately(rng):
    A = crandn(rng, 4, 3)
    opt = 0.5 * np.exp(1j * np.angle(A))
    info = RcgInfo()
    _, trace = rcg_minimize(lambda X: float(np.sum(np.abs(X - A) ** 2)), lambda X: 2 * (X - A),
                            ManifoldPoint(opt, CIRCLE), RcgSettings(grad_tol=1e-8), info=info)
    assert info.iterations <= 2 and max(trace) <= trace[0]


def test_riemannian_gradient_predicts_directional_derivative(rng):
    A = crandn(rng, 4, 3)
    cost = lambda X: float(np.sum(np.abs(X @ X.conj().T - A @ A.conj().T) ** 2))
    egrad = lambda X: 4 * (X @ X.conj().T - A @ A.conj().T) @ X
    p = circle_point(rng)
    rgrad = tangent_project(p, egrad(p.value))
    h = 1e-6
    for _ in range(20):
        xi = tangent_project(p, crandn(rng, 4, 3))
        fd = (cost(retract(p, xi, h).value) - cost(retract(p, -xi, h).value)) / (2 * h)
        assert fd == pytest.approx(inner(rgrad, xi), rel=1e-4, abs=1e-9)


def test_non_finite_cost_raises(rng):
    with pytest.raises(NumericError):
        rcg_minimize(lambda X: float("nan"), lambda X: X, circle_point(rng))


def test_infinite_trial_cost_is_rejected_not_fatal(rng):
    A = crandn(rng, 4, 3)
    start = circle_point(rng)
    x0 = start.value

    def cost(X):  # barrier: a ball around the start
        return float(np.sum(np.abs(X - A) ** 2)) if np.linalg.norm(X - x0) < 0.5 else np.inf

    point, trace = rcg_minimize(cost, lambda X: 2 * (X - A), start, RcgSettings(max_inner_iters=50))
    assert np.isfinite(trace[-1]) and np.linalg.norm(point.value - x0) < 0.5


@pytest.mark.parametrize("kw", [dict(armijo_slope=0.5), dict(armijo_shrink=1.0), dict(grad_tol=0.0)])
def test_settings_validation(kw):
    with pytest.raises(DomainError):
        RcgSettings(**kw)
