import math

import numpy as np
import pytest

from matrixgames import (ConfigurationError, LearnerParams, LearnerState, RegularizedObjective,
                         bandit_initial, bandit_step, duality_gap, hedge_rate, hedge_step,
                         movement_bound, one_point_estimate, sp_rftl_step)
from matrixgames.learners import (estimate_from_entry, inner_eps, movement, one_point_batch,
                                  sample_actions, sample_index)

from conftest import MP, grid_minmax_2x2


def test_inner_eps():
    assert inner_eps(1) == 1e-6 and inner_eps(10) == pytest.approx(1e-8)


def test_theorem3_schedule():
    p = LearnerParams.theorem3(400, 2, 2)
    assert p.eta == pytest.approx(20.0) and p.floor == pytest.approx(math.exp(-20))
    # exp(-eta G) above 1/d gets clamped to half of 1/d
    q = LearnerParams.theorem3(1, 5, 3)
    assert q.floor == pytest.approx(0.1)


def test_theorem5_schedule():
    p = LearnerParams.theorem5(4096, 2, 2)
    assert p.floor == pytest.approx(0.25) and p.eta == pytest.approx(4.0)
    with pytest.raises(ConfigurationError):
        LearnerParams.theorem5(64, 2, 2)      # 64^(-1/6) = 1/2 is not below 1/2
    with pytest.raises(ConfigurationError):
        LearnerParams.theorem5(700, 3, 3)     # 0.335 > 1/3


def test_bad_params():
    with pytest.raises(ConfigurationError):
        LearnerParams.explicit(-1.0, 0.1)
    with pytest.raises(ConfigurationError):
        LearnerParams(1.0, 0.1, schedule="nope")


def test_first_step_large_eta_is_uniform():
    params = LearnerParams.explicit(1e6, 0.0)
    s = LearnerState.initial(2, 2)
    nxt, (x, y) = sp_rftl_step(s, params, MP)
    np.testing.assert_allclose(x.weights, [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(y.weights, [0.5, 0.5], atol=1e-9)
    assert nxt.t == 2 and np.array_equal(nxt.S, MP)


def test_first_step_matches_grid_search():
    # pair for round 2 is the saddle of x'Ay + (1/eta)(R(x) - R(y)); check by brute force
    A = np.array([[0.2, -0.7], [0.9, 0.1]])
    eta = 3.0
    nxt, (x, y) = sp_rftl_step(LearnerState.initial(2, 2), LearnerParams.explicit(eta, 0.0), A)
    g = np.linspace(1e-6, 1 - 1e-6, 2001)
    H = g * np.log(g) + (1 - g) * np.log(1 - g)
    F = (g[:, None] * (A[0, 0] * g[None] + A[0, 1] * (1 - g[None]))
         + (1 - g[:, None]) * (A[1, 0] * g[None] + A[1, 1] * (1 - g[None]))
         + (H[:, None] - H[None]) / eta)
    i = np.argmin(F.max(axis=1))
    j = np.argmax(F.min(axis=0))
    assert abs(g[i] - x.weights[0]) <= 1e-3 and abs(g[j] - y.weights[0]) <= 1e-3


def test_zero_game_stays_uniform():
    params = LearnerParams.explicit(5.0, 0.01)
    s = LearnerState.initial(3, 2, 0.01)
    for _ in range(20):
        s, _ = sp_rftl_step(s, params, np.zeros((3, 2)))
        np.testing.assert_allclose(s.x, [1 / 3] * 3, atol=1e-12)
        np.testing.assert_allclose(s.y, [0.5, 0.5], atol=1e-12)


def test_constant_game_last_iterate_gap_shrinks():
    A = np.array([[0.5, -1.0], [-0.3, 0.8]])
    value = grid_minmax_2x2(A)
    gaps = {}
    for T in (16, 256):
        params = LearnerParams.theorem3(T, 2, 2)
        s = LearnerState.initial(2, 2, params.floor)
        for _ in range(T):
            s, _ = sp_rftl_step(s, params, A)
        gaps[T] = duality_gap(RegularizedObjective(A), s.x, s.y)
        # the next pair's value approaches the game value
        assert abs(s.x @ A @ s.y - value) <= gaps[T] + 2e-3
    assert gaps[256] < gaps[16]


def test_movement_bound_holds():
    rng = np.random.default_rng(0)
    params = LearnerParams.theorem3(300, 3, 3)
    s = LearnerState.initial(3, 3, params.floor)
    for t in range(1, 301):
        nxt, _ = sp_rftl_step(s, params, rng.uniform(-1, 1, (3, 3)))
        assert movement(s, nxt) <= movement_bound(t, params)
        s = nxt


def test_step_rejects_wrong_shape():
    with pytest.raises(ConfigurationError):
        sp_rftl_step(LearnerState.initial(2, 2), LearnerParams.explicit(1.0, 0.0), np.zeros((3, 2)))
    with pytest.raises(ConfigurationError):
        sp_rftl_step(LearnerState.initial(2, 2, 0.1), LearnerParams.explicit(1.0, 0.2), MP)


def test_sample_index_inverse_cdf():
    p = np.array([0.2, 0.5, 0.3])
    assert [sample_index(p, u) for u in (0.0, 0.19, 0.2, 0.69, 0.7, 0.999)] == [0, 0, 1, 1, 2, 2]


def test_one_point_examples():
    x = y = np.array([0.5, 0.5])
    est = estimate_from_entry(MP[0, 0], 0, 0, x, y)
    assert est.value == 4.0
    M = est.as_matrix()
    assert M[0, 0] == 4.0 and np.count_nonzero(M) == 1
    rng = np.random.default_rng(1)
    for _ in range(10):
        assert not one_point_estimate(np.zeros((2, 2)), x, y, rng).as_matrix().any()


def test_one_point_magnitude_bound():
    rng = np.random.default_rng(2)
    delta = 0.1
    x = np.array([delta, delta, 1 - 2 * delta])
    for _ in range(200):
        A = rng.uniform(-1, 1, (3, 3))
        assert abs(one_point_estimate(A, x, x, rng).value) <= 1 / delta**2 + 1e-12


def _mc_estimates(A, x, y, n, seed):
    rng = np.random.default_rng(seed)
    d1, d2 = A.shape
    i = np.searchsorted(np.cumsum(x), rng.random(n) * x.sum(), side="right").clip(max=d1 - 1)
    j = np.searchsorted(np.cumsum(y), rng.random(n) * y.sum(), side="right").clip(max=d2 - 1)
    return i, j, A[i, j] / (x[i] * y[j])


def test_vectorized_sampler_matches_library():
    rng_a, rng_b = np.random.default_rng(9), np.random.default_rng(9)
    x, y = np.array([0.1, 0.6, 0.3]), np.array([0.25, 0.25, 0.5])
    ours = [sample_actions(x, y, rng_a) for _ in range(50)]
    u = rng_b.random(100).reshape(50, 2)
    ref = [(sample_index(x, a), sample_index(y, b)) for a, b in u]
    assert ours == ref


def test_batch_matches_single_draws():
    A = np.arange(9.0).reshape(3, 3) - 4
    x, y = np.array([0.1, 0.6, 0.3]), np.array([0.25, 0.25, 0.5])
    single = [one_point_estimate(A, x, y, np.random.default_rng(4)) for _ in range(1)]
    rng = np.random.default_rng(4)
    seq = [one_point_estimate(A, x, y, rng) for _ in range(40)]
    i, j, v = one_point_batch(A, x, y, np.random.default_rng(4), 40)
    assert [(e.i, e.j, e.value) for e in seq] == list(zip(i.tolist(), j.tolist(), v.tolist()))
    assert (single[0].i, single[0].j) == (i[0], j[0])


def test_played_payoff_matches_mixed():
    rng = np.random.default_rng(5)
    A = rng.uniform(-1, 1, (3, 3))
    x, y = np.array([0.2, 0.5, 0.3]), np.array([0.6, 0.1, 0.3])
    n = 100_000
    i = np.array([sample_index(x, u) for u in rng.random(n)])
    j = np.array([sample_index(y, u) for u in rng.random(n)])
    played = A[i, j]
    se = played.std(ddof=1) / math.sqrt(n)
    assert abs(played.mean() - x @ A @ y) <= 3 * se


def test_estimated_payoff_matches_true():
    A = np.array([[0.3, -0.8, 0.1], [0.9, 0.0, -0.4], [-0.2, 0.5, 0.7]])
    x, y = np.array([0.2, 0.5, 0.3]), np.array([0.6, 0.1, 0.3])
    i, j, v = _mc_estimates(A, x, y, 100_000, 11)
    est = x[i] * v * y[j]               # x' A_hat y for a single-entry A_hat
    se = est.std(ddof=1) / math.sqrt(est.size)
    assert abs(est.mean() - x @ A @ y) <= 3 * se


def test_bandit_round_one_example():
    params = LearnerParams.explicit(2.0, 0.1)
    rng = np.random.default_rng(0)
    s = bandit_initial(2, 2, params, rng)
    s = s.__class__(s.t, s.S, s.x, s.y, s.floor, (0, 1))
    nxt, pair, actions = bandit_step(s, params, MP[0, 1], rng)
    assert nxt.S[0, 1] == -4.0 and np.count_nonzero(nxt.S) == 1
    assert nxt.actions == actions and pair[0].floor == 0.1


def test_bandit_zero_game():
    params = LearnerParams.explicit(2.0, 0.1)
    rng = np.random.default_rng(0)
    s = bandit_initial(2, 3, params, rng)
    for _ in range(30):
        s, _, _ = bandit_step(s, params, 0.0, rng)
    assert not s.S.any()
    np.testing.assert_allclose(s.x, [0.5, 0.5], atol=1e-12)


def test_bandit_needs_actions():
    with pytest.raises(ConfigurationError):
        bandit_step(LearnerState.initial(2, 2, 0.1), LearnerParams.explicit(1.0, 0.1), 0.0,
                    np.random.default_rng(0))


def test_hedge_examples():
    u = np.array([0.5, 0.5])
    np.testing.assert_array_equal(hedge_step(u, [0.0, 0.0], 0.3).weights, u)
    e = math.e
    np.testing.assert_allclose(hedge_step(u, [1.0, 0.0], 1.0).weights, [1 / (1 + e), e / (1 + e)])
    w, prev = np.full(3, 1 / 3), 1 / 3
    for _ in range(50):
        w = hedge_step(w, [0.5, 0.1, 0.9], 0.5).weights
        assert w[1] > prev
        prev = w[1]
    assert w[1] > 0.99


def test_hedge_huge_losses_do_not_overflow():
    w = hedge_step([0.5, 0.5], [1e300, -1e300], 10.0).weights
    np.testing.assert_array_equal(w, [0.0, 1.0])


def test_hedge_rate():
    assert hedge_rate(2, 100) == pytest.approx(math.sqrt(8 * math.log(2) / 100))
