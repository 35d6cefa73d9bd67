import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matrixgames import ConfigurationError, RunLedger, comparator_value, individual_regrets, ne_regret
from matrixgames import slope_fit
from matrixgames.adversaries import AdversarySpec, sequence
from matrixgames.game import RoundRecord
from matrixgames.metrics import CompensatedSum, empirical_gap, pair_gap

from conftest import B, MP, grid_minmax_2x2


def ledger_of(mats, xs, ys, payoffs=None):
    L = RunLedger(mats[0].shape[0], mats[0].shape[1])
    for t, (A, x, y) in enumerate(zip(mats, xs, ys), 1):
        p = float(x @ A @ y) if payoffs is None else payoffs[t - 1]
        L.add(RoundRecord(t, x, y, p, A))
    return L


def test_ne_regret_examples():
    h = np.array([0.5, 0.5])
    L = ledger_of([MP] * 20, [h] * 20, [h] * 20)
    assert ne_regret(L) <= 1e-8
    rng = np.random.default_rng(0)
    T = 10
    mats = sequence(AdversarySpec("theorem1_scenario1", horizon=T))
    xs, ys = rng.dirichlet([1, 1], T), rng.dirichlet([1, 1], T)
    L = ledger_of(mats, xs, ys)
    assert ne_regret(L) == pytest.approx(abs(L.cum_payoff), abs=1e-8)
    e1 = np.array([1.0, 0.0])
    L = ledger_of([B], [e1], [e1])
    assert grid_minmax_2x2(B) == pytest.approx(1.0, abs=1e-3)
    assert ne_regret(L) <= 1e-8


def test_individual_regret_examples():
    h = np.array([0.5, 0.5])
    row, col = individual_regrets(ledger_of([MP] * 5, [h] * 5, [h] * 5))
    assert row == 0.0 and col == 0.0
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    # row is best-responding (payoff -1 every round); the maximizing column
    # player earns -1 per round but column 1 would have paid +1
    row, col = individual_regrets(ledger_of([MP] * 7, [e1] * 7, [e2] * 7))
    assert row == 0.0 and col == 14.0


def test_regret_identity_random(rng):
    for _ in range(50):
        T, d1, d2 = rng.integers(1, 40), rng.integers(2, 5), rng.integers(2, 5)
        mats = rng.uniform(-1, 1, (T, d1, d2))
        L = ledger_of(mats, rng.dirichlet(np.ones(d1), T), rng.dirichlet(np.ones(d2), T))
        row, col = individual_regrets(L)
        gap = empirical_gap(L)
        assert row + col == pytest.approx(gap, rel=0, abs=8 * np.spacing(max(1.0, abs(gap))))
        assert ne_regret(L) >= 0
        # brute-force check of the per-player best fixed action
        tot = sum(x @ A @ y for A, x, y in zip(mats, *zip(*[(r.x, r.y) for r in L.records])))
        assert row == pytest.approx(tot - min(sum(A @ r.y for A, r in zip(mats, L.records))), abs=1e-12)


def test_bandit_payoffs_and_mixed(rng):
    x, y = np.array([0.5, 0.5]), np.array([0.5, 0.5])
    L = RunLedger(2, 2)
    L.add(RoundRecord(1, x, y, 1.0, MP, (0, 0)))
    L.add(RoundRecord(2, x, y, -1.0, MP, (0, 1)))
    assert L.cum_payoff == 0.0 and L.cum_mixed_payoff == 0.0
    assert ne_regret(L, mixed=True) <= 1e-8
    assert ne_regret(L, theta=0.25) == pytest.approx(0.0, abs=1e-8)


def test_ledger_validation():
    L = RunLedger(2, 2)
    with pytest.raises(ConfigurationError):
        ne_regret(L)
    with pytest.raises(ConfigurationError):
        L.add(RoundRecord(2, np.array([0.5, 0.5]), np.array([0.5, 0.5]), 0.0, MP))
    with pytest.raises(ConfigurationError):
        L.add(RoundRecord(1, np.array([0.5, 0.5]), np.array([0.5, 0.5]), 0.0, np.zeros((2, 3))))


def test_compensated_sum_exact():
    vals = [1e16, 1.0, -1e16, 1.0] * 1000
    cs = CompensatedSum()
    for v in vals:
        cs.add(v)
    assert cs.value == math.fsum(vals)
    arr = CompensatedSum(3)
    rng = np.random.default_rng(1)
    data = rng.normal(size=(5000, 3)) * 10 ** rng.uniform(-8, 8, size=(5000, 1))
    for row in data:
        arr.add(row)
    for k in range(3):
        assert arr.value[k] == pytest.approx(math.fsum(data[:, k]), rel=1e-15, abs=1e-300)


def test_restricted_comparator_sandwich(rng):
    for _ in range(5):
        T, d = 30, 3
        mats = rng.uniform(-1, 1, (T, d, d))
        S = mats.sum(0)
        theta = 0.05
        lo, hi = comparator_value(S, theta), comparator_value(S, 0.0)
        assert abs(lo - hi) <= 2 * theta * (d - 1) * T


def test_pair_gap():
    assert pair_gap(MP, np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0
    assert pair_gap(MP, np.array([1.0, 0.0]), np.array([0.5, 0.5])) == 1.0


def test_slope_examples():
    T = [2**k for k in range(4, 10)]
    assert slope_fit([(t, t) for t in T])[0] == pytest.approx(1.0)
    s, _, r2 = slope_fit([(t, math.sqrt(t)) for t in T])
    assert s == pytest.approx(0.5) and r2 == pytest.approx(1.0)
    assert slope_fit([(t, 0.0) for t in T])[0] == pytest.approx(0.0)
    with pytest.raises(ConfigurationError):
        slope_fit([(1, 1), (2, 2), (4, 4)])
    with pytest.raises(ConfigurationError):
        slope_fit([(4, 1)] * 5)


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.floats(-5, 5))
def test_slope_recovers_power(a, logc):
    T = [2**k for k in range(3, 12)]
    s, icpt, _ = slope_fit([(t, math.exp(logc) * t**a) for t in T])
    assert s == pytest.approx(a, abs=1e-9) and icpt == pytest.approx(logc, abs=1e-8)
