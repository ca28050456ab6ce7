import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_positive, svd_ridge
from stretchyreg.datasets import synthetic_three_points
from stretchyreg.exceptions import (
    DimensionError,
    DomainError,
    NumericOverflowError,
    SingularExponentError,
    SingularSystemError,
)
from stretchyreg.polybasis import enumerate_basis, expand
from stretchyreg.stretchy import (
    IllConditionedWarning,
    SolverConfig,
    contour_grid,
    elementwise_power,
    equilibrated_condition,
    lp_norm,
    qspace_measure,
    qtilde_measure,
    resolve_mode,
    solve,
    solve_detailed,
    solve_dual,
    solve_primal,
    stretch_exponent,
)

# Table 1: q -> coefficients grouped by degree (values as printed, 3 decimals)
TABLE1 = {
    5.0: [[-3.934], [12.013, 12.013], [14.754, 16.268, 16.268], [13.646, 13.646, 15.510, 15.510]],
    2.0: [[-4.726], [17.881, 17.881], [3.624, 5.459, 5.459], [0.729, 0.729, 1.280, 1.280]],
    1.75: [[-4.852], [18.856, 18.856], [1.761, 3.107, 3.107], [0.185, 0.185, 0.405, 0.405]],
    1.5: [[-4.956], [19.662, 19.662], [0.394, 0.985, 0.985], [0.012, 0.012, 0.041, 0.041]],
    1.3: [[-4.996], [19.967, 19.967], [0.019, 0.103, 0.103], [0.000, 0.000, 0.001, 0.001]],
    1.1: [[-5.000], [20.000, 20.000], [0.000, 0.000, 0.000], [0.000, 0.000, 0.000, 0.000]],
}


@pytest.mark.parametrize("q, e", [(2, 1), (1.1, 10), (0, -1), (3, 0.5)])
def test_stretch_exponent(q, e):
    assert stretch_exponent(q) == pytest.approx(e)


@pytest.mark.parametrize("q", [1.0, 1 + 1e-7, math.nan])
def test_stretch_exponent_rejects(q):
    with pytest.raises(DomainError):
        stretch_exponent(q)


def test_q_one_is_singular_exponent():
    with pytest.raises(SingularExponentError):
        SolverConfig(q=1.0)
    SolverConfig(q=1.0001)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(lam=-1)
    with pytest.raises(ValueError):
        SolverConfig(mode="lsqr")


def test_elementwise_power_examples(rng):
    A = rng.normal(size=(3, 4))
    np.testing.assert_array_equal(elementwise_power(A, 1), A)
    assert elementwise_power([[4.0]], 0.5)[0, 0] == 2
    assert elementwise_power([[2.0]], -1)[0, 0] == 0.5
    np.testing.assert_array_equal(elementwise_power([[-2.0]], 2), [[4.0]])


def test_elementwise_power_errors():
    with pytest.raises(DomainError):
        elementwise_power([[1.0, -0.5]], 0.5)
    assert elementwise_power([[0.0]], 0.5)[0, 0] == 0
    with pytest.raises(DomainError):
        elementwise_power([[0.0]], -1)
    with pytest.raises(NumericOverflowError):
        elementwise_power([[10.0]], 400)


def test_dual_q2_square_is_inverse(rng):
    P = random_positive(rng, 5, 5)
    y = rng.normal(size=5)
    np.testing.assert_allclose(solve_dual(P, y, SolverConfig(q=2)), np.linalg.solve(P, y),
                               atol=1e-9)


def test_dual_q2_min_norm_against_svd(rng):
    for _ in range(20):
        P = random_positive(rng, 5, 12)
        y = rng.normal(size=5)
        np.testing.assert_allclose(solve_dual(P, y, SolverConfig(q=2)), svd_ridge(P, y, 0),
                                   atol=1e-8)


def test_primal_q2_is_least_squares(rng):
    P = random_positive(rng, 30, 6)
    y = rng.normal(size=30)
    np.testing.assert_allclose(solve_primal(P, y, SolverConfig(q=2)),
                               np.linalg.lstsq(P, y, rcond=None)[0], atol=1e-9)


@pytest.mark.parametrize("q", [5, 3, 1.5, 1.3, 1.1])
def test_primal_identity_returns_y(q, rng):
    y = rng.normal(size=4)
    np.testing.assert_allclose(solve_primal(np.eye(4), y, SolverConfig(q=q)), y, atol=1e-14)


@pytest.mark.parametrize("q", [0, -0.5])
def test_identity_with_negative_exponent_is_out_of_domain(q):
    with pytest.raises(DomainError):
        solve_primal(np.eye(3), np.ones(3), SolverConfig(q=q))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.sampled_from([5.0, 3.0, 1.5, 1.3]), st.integers(0, 2**32 - 1))
def test_primal_dual_agree_on_square(n, q, seed):
    g = np.random.default_rng(seed)
    P = random_positive(g, n, n)
    y = g.normal(size=n)
    cfg = SolverConfig(q=q)
    np.testing.assert_allclose(solve_primal(P, y, cfg), solve_dual(P, y, cfg), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.floats(1e-3, 10), st.integers(0, 2**32 - 1))
def test_q2_ridge_reduction(m, n, lam, seed):
    g = np.random.default_rng(seed)
    P = random_positive(g, m, n)
    y = g.normal(size=m)
    cfg = SolverConfig(q=2, lam=lam)
    ref = np.linalg.solve(P.T @ P + lam * np.eye(n), P.T @ y)
    np.testing.assert_allclose(solve_primal(P, y, cfg), ref, atol=1e-10)
    ref_d = P.T @ np.linalg.solve(P @ P.T + lam * np.eye(m), y)
    np.testing.assert_allclose(solve_dual(P, y, cfg), ref_d, atol=1e-10)


@pytest.mark.parametrize("q", [2, 1.5, 1.3, 1.1, 0, -0.5])
def test_dual_interpolates(q, rng):
    for _ in range(10):
        m = rng.integers(2, 8)
        P = random_positive(rng, m, m + rng.integers(1, 12), 0.5, 1.5)
        y = rng.normal(size=m)
        alpha = solve_dual(P, y, SolverConfig(q=q))
        assert np.max(np.abs(P @ alpha - y)) < 1e-6 * np.max(np.abs(y))


def test_auto_mode_dispatch():
    assert resolve_mode("auto", 3, 10) == "dual"
    assert resolve_mode("auto", 67, 9) == "primal"
    assert resolve_mode("auto", 67, 43758) == "dual"
    assert resolve_mode("auto", 5, 5) == "primal"
    assert resolve_mode("primal", 3, 10) == "primal"


def test_solve_explicit_modes(rng):
    P = random_positive(rng, 6, 6)
    y = rng.normal(size=6)
    assert solve_detailed(P, y, SolverConfig(q=1.5, mode="dual")).mode == "dual"
    assert solve_detailed(P, y, SolverConfig(q=1.5, mode="primal")).mode == "primal"
    np.testing.assert_allclose(solve(P, y, SolverConfig(q=1.5, mode="dual")),
                               solve(P, y, SolverConfig(q=1.5, mode="primal")), atol=1e-8)


def test_singular_gram_errors():
    P = np.ones((3, 5))
    y = np.array([1.0, 2.0, 3.0])
    with pytest.raises(SingularSystemError, match="lam > 0"):
        solve_dual(P, y, SolverConfig(q=2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        alpha = solve_dual(P, y, SolverConfig(q=2, lam=1e-3))
    assert np.all(np.isfinite(alpha))


def test_fractional_power_of_negative_design_fails():
    P = np.array([[1.0, -0.5], [0.3, 0.7]])
    with pytest.raises(DomainError):
        solve_dual(P, np.ones(2), SolverConfig(q=5))


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        solve_dual(np.ones((3, 4)), np.ones(2), SolverConfig())


def test_column_scaling_does_not_trip_guard(rng):
    P = random_positive(rng, 20, 4)
    scale = np.array([1.0, 1e20, 1e-15, 1e30])
    y = rng.normal(size=20)
    a1 = solve_primal(P, y, SolverConfig(q=1.5))
    a2 = solve_primal(P * scale, y, SolverConfig(q=1.5))
    np.testing.assert_allclose(a2 * scale, a1, rtol=1e-8)
    assert equilibrated_condition(P.T ** 2 @ P) < 1e6


def test_deterministic(rng):
    P = random_positive(rng, 8, 30)
    y = rng.normal(size=8)
    cfg = SolverConfig(q=1.3, lam=1e-6)
    assert solve(P, y, cfg).tobytes() == solve(P.copy(), y.copy(), cfg).tobytes()


def _by_degree(alpha, basis):
    return [sorted(alpha[basis.degrees == k]) for k in range(basis.r + 1)]


@pytest.mark.parametrize("q", sorted(TABLE1))
def test_synthetic_table_by_degree(q):
    ds = synthetic_three_points()
    basis = enumerate_basis(2, 3)
    alpha = solve(expand(ds.X, basis), ds.y, SolverConfig(q=q))
    for got, want in zip(_by_degree(alpha, basis), TABLE1[q]):
        # printed to 3 decimals; one entry (3.6235) sits on a rounding edge
        np.testing.assert_allclose(got, sorted(want), atol=1e-3)


# measures


def test_lp_norm_examples():
    assert lp_norm([3, 4], 2) == pytest.approx(5)
    assert lp_norm([1, -1, 1], 1) == 3
    for p in (1, 1.5, 2, 7):
        assert lp_norm([2], p) == pytest.approx(2)
    with pytest.raises(DomainError):
        lp_norm([1, 2], 0.5)


def test_qtilde_examples():
    assert qtilde_measure([1, 1], 2) == pytest.approx(math.sqrt(2))
    assert qtilde_measure([-4], 1) == pytest.approx(2)
    assert qtilde_measure([0, 0], 1.3) == 0


def test_qspace_examples():
    assert qspace_measure([1, 1], 2) == pytest.approx(math.sqrt(2))
    assert qspace_measure([4], 1) == pytest.approx(2)
    with pytest.raises(DomainError):
        qspace_measure([-1], 1.5)
    with pytest.raises(DomainError):
        qspace_measure([-3, 1], 1)


def test_qspace_is_not_homogeneous():
    lhs = qspace_measure([4.0], 1.5)
    assert lhs == pytest.approx(4 ** 0.75)
    assert lhs == pytest.approx(2.828, abs=1e-3)
    assert lhs != pytest.approx(4 * qspace_measure([1.0], 1.5))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=8),
       st.floats(0.1, 5))
def test_qtilde_is_qspace_of_abs(v, q):
    assert qtilde_measure(v, q) == pytest.approx(qspace_measure(np.abs(v), q))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=8))
def test_measures_agree_at_two(v):
    a, b, c = lp_norm(v, 2), qtilde_measure(v, 2), qspace_measure(v, 2)
    assert a == pytest.approx(b) and b == pytest.approx(c)


def test_contour_grid_points():
    g = contour_grid("lp", 2, 0.0, 1.0, 6)
    row = g[np.isclose(g[:, 0], 0.6) & np.isclose(g[:, 1], 0.8)][0]
    assert row[2] == pytest.approx(1.0)
    g = contour_grid("qspace", 2, 0.0, 1.0, 2)
    assert g[-1, 2] == pytest.approx(math.sqrt(2))
    g = contour_grid("qtilde", 1.1, 0.0, 1.0, 2)
    assert g[1, 2] == pytest.approx(1.0)


def test_contour_grid_domain_markers():
    g = contour_grid("qspace", 1.5, -1, 1, 5)
    neg = (g[:, 0] < 0) | (g[:, 1] < 0)
    assert np.all(np.isnan(g[neg, 2]))
    assert np.all(np.isfinite(g[~neg, 2]))
    assert np.all(np.isfinite(contour_grid("qtilde", 1.5, -1, 1, 5)[:, 2]))
    sq = contour_grid("qspace2", 1.5, 0, 1, 3)[:, 2]
    np.testing.assert_allclose(sq, contour_grid("qspace", 1.5, 0, 1, 3)[:, 2] ** 2)
    with pytest.raises(ValueError):
        contour_grid("lp", 2, 0, 1, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.sampled_from([5.0, 3.0, 1.5, 1.3]), st.integers(0, 2**32 - 1))
def test_primal_dual_gap_within_conditioning_bound(n, q, seed):
    # generic positive draws: the forms agree up to eps * cond(P) * cond(P**e) * |alpha|
    g = np.random.default_rng(seed)
    P = random_positive(g, n, n)
    y = g.normal(size=n)
    cfg = SolverConfig(q=q)
    try:
        ap, ad = solve_primal(P, y, cfg), solve_dual(P, y, cfg)
    except SingularSystemError:
        return
    bound = (np.finfo(float).eps * np.linalg.cond(P) * np.linalg.cond(P.T ** cfg.exponent)
             * np.max(np.abs(ap)))
    assert np.max(np.abs(ap - ad)) <= 10 * bound + 1e-15
