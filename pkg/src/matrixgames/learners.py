"""Online learners for zero-sum games with changing payoff matrices.

* ``sp_rftl_step``: both players jointly play the saddle point of the
  entropy-regularized cumulative game (full information).
* ``bandit_step``: same engine fed with one-point estimates of the matrix,
  built from the single entry the players observe.
* ``hedge_step``: multiplicative weights, used as an individually
  no-regret baseline in self-play.
"""

from dataclasses import dataclass, replace
import logging
import math
from typing import Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError, NonConvergenceError
from .game import MixedStrategy, PayoffMatrix, as_entries, as_weights
from .regularizers import entropy_lipschitz
from .saddle import solve_arrays
from .validation import check_floor, check_positive, check_vector

log = logging.getLogger(__name__)

SCHEDULES = ("explicit", "theorem3", "theorem5")
INNER_EPS = 1e-6


def inner_eps(t):
    """Per-round solver tolerance ``1e-6 / t**2``; its sum over rounds stays bounded."""
    return INNER_EPS / (t * t)


@dataclass(frozen=True)
class LearnerParams:
    """Step scale ``eta``, simplex floor and the schedule they came from.

    ``floor`` is the entropy floor for the full-information learner and the
    exploration floor for the bandit learner.  Build scheduled parameters
    with :meth:`theorem3` or :meth:`theorem5`.
    """

    eta: float
    floor: float
    horizon: Optional[int] = None
    schedule: str = "explicit"

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ConfigurationError(f"unknown schedule {self.schedule!r}; expected one of {SCHEDULES}")
        object.__setattr__(self, "eta", check_positive(self.eta, "eta"))
        if not isinstance(self.floor, (int, float)) or not np.isfinite(self.floor) or self.floor < 0:
            raise ConfigurationError(f"floor must be a nonnegative finite real, got {self.floor!r}")
        object.__setattr__(self, "floor", float(self.floor))
        if self.horizon is not None and (int(self.horizon) != self.horizon or self.horizon < 1):
            raise ConfigurationError(f"horizon must be a positive integer, got {self.horizon!r}")

    @classmethod
    def explicit(cls, eta, floor, horizon=None):
        return cls(eta, floor, horizon, "explicit")

    @classmethod
    def theorem3(cls, horizon, d1, d2, bound=1.0):
        """``eta = sqrt(T) / G``, ``floor = exp(-eta G)`` with ``G`` the entry bound.

        The floor must not exceed ``min(1/d1, 1/d2)``; when it would, it is
        clamped to half that value and a warning is logged.
        """
        T = _horizon(horizon)
        G = check_positive(bound, "bound")
        eta = math.sqrt(T) / G
        floor = math.exp(-eta * G)
        cap = min(1.0 / d1, 1.0 / d2)
        if floor > cap:
            log.warning("floor exp(-eta G) = %.4g exceeds min(1/d1, 1/d2) = %.4g at T=%d; "
                        "clamping it to %.4g", floor, cap, T, cap / 2)
            floor = cap / 2
        return cls(eta, floor, T, "theorem3")

    @classmethod
    def theorem5(cls, horizon, d1, d2):
        """``floor = T**(-1/6)`` and ``eta = T**(1/6)``; needs ``floor < min(1/d1, 1/d2)``."""
        T = _horizon(horizon)
        floor = T ** (-1.0 / 6.0)
        eta = T ** (1.0 / 6.0)
        cap = min(1.0 / d1, 1.0 / d2)
        if not floor < cap:
            raise ConfigurationError(
                f"exploration floor T^(-1/6) = {floor:.4g} is not below min(1/d1, 1/d2) = {cap:.4g}; "
                f"use T > {max(d1, d2) ** 6} or explicit parameters")
        return cls(eta, floor, T, "theorem5")

    def reg_scale(self, t):
        return t / self.eta


def _horizon(T):
    if isinstance(T, bool) or not isinstance(T, (int, np.integer)) or T < 1:
        raise ConfigurationError(f"horizon must be a positive integer, got {T!r}")
    return int(T)


@dataclass(frozen=True)
class LearnerState:
    """Round counter, running matrix sum and the pair to play this round.

    ``t`` is the round about to be played, so ``S`` holds ``t - 1`` matrices
    (or estimates).  ``actions`` is the sampled action pair of the bandit
    learner and ``None`` otherwise.
    """

    t: int
    S: np.ndarray
    x: np.ndarray
    y: np.ndarray
    floor: float = 0.0
    actions: Optional[Tuple[int, int]] = None
    last_gap: float = 0.0
    solver_iterations: int = 0

    @classmethod
    def initial(cls, d1, d2, floor=0.0):
        """Round 1: nothing observed yet, both players uniform (the regularizer's minimizer)."""
        if d1 < 2 or d2 < 2:
            raise ConfigurationError(f"need d1, d2 >= 2, got {d1}x{d2}")
        floor = check_floor(floor, max(d1, d2), "floor")
        return cls(1, np.zeros((d1, d2)), np.full(d1, 1.0 / d1), np.full(d2, 1.0 / d2), floor)

    @property
    def shape(self):
        return self.S.shape

    @property
    def matrix_sum(self):
        return PayoffMatrix(self.S)

    def pair(self):
        return MixedStrategy(self.x, self.floor), MixedStrategy(self.y, self.floor)


@dataclass(frozen=True)
class OnePointEstimate:
    """Single-entry unbiased estimate of a payoff matrix."""

    i: int
    j: int
    value: float
    shape: Tuple[int, int]

    def as_matrix(self):
        out = np.zeros(self.shape)
        out[self.i, self.j] = self.value
        return out


def _advance(state, params, increment):
    """Add ``increment`` to the running sum and solve for the next pair."""
    t = state.t
    S = state.S + increment
    c = params.reg_scale(t)
    try:
        x, y, gap, its = solve_arrays(S, c, state.floor, state.floor, inner_eps(t), state.x, state.y)
    except NonConvergenceError as exc:
        raise NonConvergenceError(f"round {t}: {exc}", best_gap=exc.best_gap,
                                  iterations=exc.iterations) from exc
    return replace(state, t=t + 1, S=S, x=x, y=y, last_gap=gap, solver_iterations=its)


def _check_params(state, params):
    if params.floor != state.floor:
        raise ConfigurationError(f"state floor {state.floor} does not match params floor {params.floor}")


def sp_rftl_step(state, params, A_t):
    """Observe ``A_t`` after playing ``(state.x, state.y)`` and move to round ``t + 1``.

    Returns ``(next_state, (x_next, y_next))``.  The next pair is a saddle
    point, to tolerance ``inner_eps(t)``, of
    ``x' S_t y + (t / eta) (R(x) - R(y))`` over the floored simplexes.
    """
    _check_params(state, params)
    A = as_entries(A_t)
    if A.shape != state.shape:
        raise ConfigurationError(f"matrix of shape {A.shape} does not match the learner's {state.shape}")
    nxt = _advance(state, params, A)
    return nxt, nxt.pair()


def sample_index(p, u):
    """Inverse-CDF draw: smallest index whose cumulative weight exceeds ``u`` in [0, 1).

    ``u`` may be an array, in which case an index array comes back.
    """
    cdf = np.cumsum(p)
    i = np.searchsorted(cdf, np.asarray(u) * cdf[-1], side="right")
    if i.ndim == 0:
        return min(int(i), p.shape[0] - 1)
    return np.minimum(i, p.shape[0] - 1)


def sample_actions(x, y, rng):
    """Row index first, then column index, from one generator."""
    i = sample_index(as_weights(x), rng.random())
    j = sample_index(as_weights(y), rng.random())
    return i, j


def estimate_from_entry(value, i, j, x, y):
    xw, yw = as_weights(x), as_weights(y)
    return OnePointEstimate(i, j, float(value) / (xw[i] * yw[j]), (xw.shape[0], yw.shape[0]))


def one_point_estimate(A_t, x, y, rng):
    """Sample ``i ~ x``, ``j ~ y`` and return ``A[i, j] / (x_i y_j)`` placed at ``(i, j)``."""
    A = as_entries(A_t)
    xw, yw = as_weights(x), as_weights(y)
    if A.shape != (xw.shape[0], yw.shape[0]):
        raise ConfigurationError(f"matrix of shape {A.shape} does not match strategies "
                                 f"of lengths {xw.shape[0]}, {yw.shape[0]}")
    i, j = sample_actions(xw, yw, rng)
    return estimate_from_entry(A[i, j], i, j, xw, yw)


def one_point_batch(A_t, x, y, rng, n):
    """``n`` independent one-point estimates as ``(i, j, values)`` arrays.

    Consumes the generator exactly like ``n`` calls of :func:`one_point_estimate`.
    """
    A = as_entries(A_t)
    xw, yw = as_weights(x), as_weights(y)
    u = rng.random((int(n), 2))
    i, j = sample_index(xw, u[:, 0]), sample_index(yw, u[:, 1])
    return i, j, A[i, j] / (xw[i] * yw[j])


def bandit_initial(d1, d2, params, rng):
    state = LearnerState.initial(d1, d2, params.floor)
    return replace(state, actions=sample_actions(state.x, state.y, rng))


def bandit_step(state, params, observed, rng):
    """Consume the payoff observed at ``state.actions`` and move to round ``t + 1``.

    Returns ``(next_state, next_pair, next_actions)``; the next actions are
    drawn from the new pair.
    """
    _check_params(state, params)
    if state.actions is None:
        raise ConfigurationError("bandit state carries no sampled actions; build it with bandit_initial")
    if not np.isfinite(observed):
        raise ConfigurationError(f"observed payoff must be finite, got {observed!r}")
    i, j = state.actions
    est = estimate_from_entry(observed, i, j, state.x, state.y)
    increment = np.zeros(state.shape)
    increment[i, j] = est.value
    nxt = _advance(state, params, increment)
    actions = sample_actions(nxt.x, nxt.y, rng)
    nxt = replace(nxt, actions=actions)
    return nxt, nxt.pair(), actions


def hedge_rate(d, horizon):
    """``sqrt(8 ln d / T)``."""
    return math.sqrt(8.0 * math.log(d) / _horizon(horizon))


def hedge_step(weights, loss, eta_h, minimize=True):
    """Multiplicative weights: ``w_i <- w_i exp(-+ eta_h loss_i)``, renormalized."""
    w = as_weights(weights)
    g = check_vector(loss, "loss", w.shape[0])
    eta_h = check_positive(eta_h, "eta_h")
    expo = np.log(np.maximum(w, 1e-300)) + (-eta_h if minimize else eta_h) * g
    expo = np.where(w > 0, expo, -np.inf)
    expo -= expo.max()
    out = np.exp(expo)
    return MixedStrategy.from_weights(out / out.sum())


def movement_bound(t, params, bound=1.0):
    """Allowed l1 movement of the joint iterate between rounds ``t`` and ``t + 1``.

    ``(4 eta / t) (G + G_R / eta)`` for exact saddle points, where ``G`` is
    the entry bound and ``G_R`` bounds the entropy gradient on the floored
    simplex, plus ``4 sqrt(eps_t / (t / eta))`` for the inexact inner solve.
    """
    eta = params.eta
    g_r = entropy_lipschitz(params.floor) if params.floor > 0 else math.inf
    exact = (4.0 * eta / t) * (bound + g_r / eta)
    return exact + 4.0 * math.sqrt(inner_eps(t) / params.reg_scale(t))


def movement(state, nxt):
    return float(np.abs(state.x - nxt.x).sum() + np.abs(state.y - nxt.y).sum())


__all__ = [
    "LearnerParams", "LearnerState", "OnePointEstimate", "sp_rftl_step", "one_point_estimate",
    "bandit_initial", "bandit_step", "hedge_step", "hedge_rate", "inner_eps", "movement_bound",
    "movement", "sample_actions", "sample_index", "one_point_batch",
]
