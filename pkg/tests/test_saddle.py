import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matrixgames import (DomainError, NonConvergenceError, RegularizedObjective, comparator_value,
                         duality_gap, solve)
from matrixgames.adversaries import AdversarySpec, sequence
from matrixgames.regularizers import entropy_value

from conftest import B, MP, grid_minmax_2x2, random_simplex


def test_gap_examples():
    obj = RegularizedObjective(MP)
    assert duality_gap(obj, [0.5, 0.5], [0.5, 0.5]) == 0.0
    assert duality_gap(obj, [1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)
    # grid oracle for the same gap: max over y of x'Ay minus min over x of x'Ay
    g = np.linspace(0, 1, 1001)
    P = np.stack([g, 1 - g], 1)
    x, y = np.array([1.0, 0.0]), np.array([0.5, 0.5])
    assert (P @ MP.T @ x).max() - (P @ MP @ y).min() == pytest.approx(1.0)


def test_gap_rejects_infeasible():
    obj = RegularizedObjective(MP, 1.0, 0.1, 0.1)
    with pytest.raises(DomainError):
        duality_gap(obj, [0.05, 0.95], [0.5, 0.5])
    with pytest.raises(DomainError):
        duality_gap(obj, [0.5, 0.6], [0.5, 0.5])


def test_gap_at_boundary_with_entropy():
    # 0 ln 0 = 0, so a vertex is a legal point of the regularized game
    obj = RegularizedObjective(MP, 1.0)
    g = duality_gap(obj, [1.0, 0.0], [0.5, 0.5])
    # max over y' is logsumexp(1, -1) - ln 2 + R(x) = ln(e + 1/e); min over x' is 0 since My = 0
    assert g == pytest.approx(math.log(math.e + 1 / math.e), abs=1e-12)


def test_solve_matching_pennies():
    cert = solve(RegularizedObjective(MP), 1e-9)
    assert abs(cert.value) <= 1e-9 and cert.gap <= 1e-9
    np.testing.assert_allclose(cert.x.weights, [0.5, 0.5], atol=1e-8)


def test_solve_indifferent_row():
    cert = solve(RegularizedObjective(B), 1e-9)
    assert cert.value == pytest.approx(1.0, abs=1e-9)
    assert grid_minmax_2x2(B) == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_allclose(cert.y.weights, [1, 0], atol=1e-9)


def test_solve_zero_matrix_regularized():
    cert = solve(RegularizedObjective(np.zeros((3, 2)), 1.0, math.exp(-2), math.exp(-2)))
    np.testing.assert_allclose(cert.x.weights, [1 / 3] * 3, atol=1e-6)
    np.testing.assert_allclose(cert.y.weights, [0.5, 0.5], atol=1e-6)
    assert abs(cert.value) <= 1e-8


def test_comparator_examples():
    assert abs(comparator_value(MP)) <= 1e-8
    spec = AdversarySpec("theorem1_scenario1", horizon=10)
    assert abs(comparator_value(sequence(spec).sum(0))) <= 1e-8
    S4 = sequence(AdversarySpec("theorem1_scenario2", horizon=4)).sum(0)
    # S4 = [[4, -4], [0, 0]]: the row player hides in row 2, so the value is 0
    v = comparator_value(S4)
    assert v == pytest.approx(grid_minmax_2x2(S4), abs=4e-3)
    assert abs(v) <= 1e-8
    assert comparator_value(np.full((2, 2), 0.3)) == pytest.approx(0.3, abs=1e-8)


def test_comparator_grid_random(rng):
    for _ in range(10):
        S = rng.uniform(-1, 1, (2, 2))
        assert comparator_value(S) == pytest.approx(grid_minmax_2x2(S), abs=4e-3)


def test_certificates_random(rng):
    for _ in range(60):
        d1, d2 = rng.integers(2, 7, size=2)
        S = rng.uniform(-1, 1, (d1, d2)) * rng.uniform(0.1, 50)
        c = 0.0 if rng.random() < 0.4 else 10 ** rng.uniform(-3, 2)
        dmax = max(d1, d2)
        theta = float(rng.choice([0.0, math.exp(-2) / 2, 1 / (2 * dmax)]))
        if c > 0 and theta == 0 and rng.random() < 0.5:
            theta = 1e-6
        obj = RegularizedObjective(S, c, theta, theta)
        cert = solve(obj, 1e-8)
        assert cert.gap <= 1e-8
        assert duality_gap(obj, cert.x, cert.y) <= 1e-8


def test_warm_starts_agree(rng):
    # strong convexity with modulus c makes the saddle point unique
    for _ in range(10):
        d1, d2 = rng.integers(2, 6, size=2)
        S = rng.uniform(-3, 3, (d1, d2))
        c, eps = 10 ** rng.uniform(-1, 1), 1e-10
        obj = RegularizedObjective(S, c, 0.01, 0.01)
        a = solve(obj, eps)
        b = solve(obj, eps, start=(random_simplex(rng, d1, 0.01), random_simplex(rng, d2, 0.01)))
        tol = 10 * math.sqrt(eps / c)
        assert np.abs(a.x.weights - b.x.weights).sum() <= tol
        assert np.abs(a.y.weights - b.y.weights).sum() <= tol


def test_restricted_comparator_gap(rng):
    for _ in range(10):
        T, d = int(rng.integers(1, 20)), int(rng.integers(2, 5))
        S = rng.uniform(-1, 1, (T, d, d)).sum(0)
        theta = 1 / (4 * d)
        diff = abs(comparator_value(S, theta) - comparator_value(S, 0.0))
        assert diff <= 1.0 * 2 * theta * (d - 1) * T + 1e-8


def test_regularized_sandwich(rng):
    # adding c(R(x) - R(y)) moves the saddle value by at most c ln d either way
    for _ in range(10):
        d = int(rng.integers(2, 5))
        S = rng.uniform(-1, 1, (d, d)) * 5
        c = 10 ** rng.uniform(-1, 0.5)
        plain = comparator_value(S)
        reg = solve(RegularizedObjective(S, c), 1e-10).value
        assert -c * math.log(d) - 1e-8 <= reg - plain <= c * math.log(d) + 1e-8


def test_value_matches_objective():
    obj = RegularizedObjective(MP * 3, 0.5, 0.01, 0.01)
    cert = solve(obj)
    x, y = cert.x.weights, cert.y.weights
    direct = x @ obj.matrix @ y + 0.5 * (entropy_value(x) - entropy_value(y))
    assert cert.value == pytest.approx(direct, abs=1e-14)


def test_iteration_cap():
    S = np.random.default_rng(3).uniform(-1, 1, (6, 6))
    with pytest.raises(NonConvergenceError) as err:
        solve(RegularizedObjective(S * 100, 1e-3, 0.0, 0.0), 1e-14, max_iter=2)
    assert err.value.best_gap >= 0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.floats(-3, 2), st.integers(0, 2**32 - 1))
def test_gap_nonnegative_and_certified(d1, d2, logc, seed):
    r = np.random.default_rng(seed)
    S = r.uniform(-2, 2, (d1, d2))
    obj = RegularizedObjective(S, 10 ** logc, 0.0, 0.0)
    x, y = r.dirichlet(np.ones(d1)), r.dirichlet(np.ones(d2))
    assert duality_gap(obj, x, y) >= 0
    assert solve(obj, 1e-9).gap <= 1e-9
