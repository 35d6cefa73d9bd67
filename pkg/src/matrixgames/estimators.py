"""Estimator-style wrappers around the online learners.

Each estimator consumes payoff matrices one round at a time through
``partial_fit`` (or a whole ``(T, d1, d2)`` stack through ``fit``) and
``predict`` returns the strategy pair it will play next.  Hyperparameters
live in ``__init__`` so ``get_params`` / ``set_params`` / ``clone`` work
as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError
from .game import RoundRecord, as_entries
from .learners import (LearnerParams, LearnerState, bandit_initial, bandit_step, hedge_rate,
                       hedge_step, movement, movement_bound, sp_rftl_step)
from .metrics import RunLedger, individual_regrets, ne_regret
from .saddle import DEFAULT_EPS


def _as_rounds(X):
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ConfigurationError(f"expected a matrix or a (T, d1, d2) stack, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("payoff matrices contain non-finite values")
    return arr


class _OnlineGameEstimator(BaseEstimator):
    """Shared plumbing: round loop, ledger, regret accessors."""

    def fit(self, X, y=None):
        """Restart and play every round of ``X``."""
        rounds = _as_rounds(X)
        self._reset(rounds.shape[1], rounds.shape[2], len(rounds))
        for A in rounds:
            self._play(A)
        return self

    def partial_fit(self, X, y=None):
        """Play the next round(s); the first call fixes the game shape."""
        rounds = _as_rounds(X)
        if not hasattr(self, "ledger_"):
            self._reset(rounds.shape[1], rounds.shape[2], None)
        elif rounds.shape[1:] != self.ledger_.shape:
            raise ConfigurationError(f"matrices of shape {rounds.shape[1:]} do not match {self.ledger_.shape}")
        for A in rounds:
            self._play(A)
        return self

    def predict(self, X=None):
        """The pair ``(x, y)`` for the next round."""
        check_is_fitted(self, "ledger_")
        return self._next_pair()

    def ne_regret(self, eps=DEFAULT_EPS):
        check_is_fitted(self, "ledger_")
        return ne_regret(self.ledger_, eps)

    def individual_regrets(self):
        check_is_fitted(self, "ledger_")
        return individual_regrets(self.ledger_)

    def score(self, X=None, y=None):
        """Negative NE regret of the rounds played so far (higher is better)."""
        return -self.ne_regret()

    @property
    def n_rounds_(self):
        check_is_fitted(self, "ledger_")
        return self.ledger_.rounds

    def _horizon_for(self, T):
        H = self.horizon if self.horizon is not None else T
        if H is None:
            raise ConfigurationError("a horizon is needed for the scheduled parameters; "
                                     "pass horizon= or use fit on a full sequence")
        return int(H)


class OMGRFTL(_OnlineGameEstimator):
    """Full-information regularized follow-the-leader for both players.

    Parameters
    ----------
    schedule : {'theorem3', 'explicit'}
        ``theorem3`` derives ``eta`` and the floor from ``horizon`` and ``bound``.
    eta, floor : float, used with ``schedule='explicit'``.
    horizon : int or None
        Defaults to the length of the sequence passed to ``fit``.
    bound : float
        Entry bound of the payoff matrices.
    """

    def __init__(self, schedule="theorem3", eta=None, floor=None, horizon=None, bound=1.0):
        self.schedule = schedule
        self.eta = eta
        self.floor = floor
        self.horizon = horizon
        self.bound = bound

    def _params(self, d1, d2, T):
        if self.schedule == "theorem3":
            return LearnerParams.theorem3(self._horizon_for(T), d1, d2, self.bound)
        if self.schedule == "explicit":
            if self.eta is None or self.floor is None:
                raise ConfigurationError("explicit schedule needs eta and floor")
            return LearnerParams.explicit(self.eta, self.floor, self.horizon)
        raise ConfigurationError(f"unsupported schedule {self.schedule!r} for full information")

    def _reset(self, d1, d2, T):
        self.params_ = self._params(d1, d2, T)
        self.state_ = LearnerState.initial(d1, d2, self.params_.floor)
        self.ledger_ = RunLedger(d1, d2)
        self.movement_violations_ = 0

    def _play(self, A):
        A = as_entries(A)
        if np.max(np.abs(A)) > self.bound:
            raise ConfigurationError(f"matrix entries exceed the bound {self.bound}")
        s = self.state_
        self.ledger_.add(RoundRecord(s.t, s.x, s.y, float(s.x @ A @ s.y), A))
        nxt, _ = sp_rftl_step(s, self.params_, A)
        if movement(s, nxt) > movement_bound(s.t, self.params_, self.bound):
            self.movement_violations_ += 1
        self.state_ = nxt

    def _next_pair(self):
        return self.state_.x.copy(), self.state_.y.copy()


class BanditOMGRFTL(_OnlineGameEstimator):
    """Bandit-feedback variant: only the entry at the sampled actions is read.

    ``partial_fit`` receives the full matrix to keep the interface uniform,
    but the learner looks at a single entry of it.
    """

    def __init__(self, schedule="theorem5", eta=None, floor=None, horizon=None, random_state=None):
        self.schedule = schedule
        self.eta = eta
        self.floor = floor
        self.horizon = horizon
        self.random_state = random_state

    def _params(self, d1, d2, T):
        if self.schedule == "theorem5":
            return LearnerParams.theorem5(self._horizon_for(T), d1, d2)
        if self.schedule == "explicit":
            if self.eta is None or self.floor is None:
                raise ConfigurationError("explicit schedule needs eta and floor")
            if not self.floor > 0:
                raise ConfigurationError("bandit learner needs a positive floor")
            return LearnerParams.explicit(self.eta, self.floor, self.horizon)
        raise ConfigurationError(f"unsupported schedule {self.schedule!r} for bandit feedback")

    def _reset(self, d1, d2, T):
        self.params_ = self._params(d1, d2, T)
        self.rng_ = np.random.default_rng(self.random_state)
        self.state_ = bandit_initial(d1, d2, self.params_, self.rng_)
        self.ledger_ = RunLedger(d1, d2)

    def _play(self, A):
        A = as_entries(A)
        s = self.state_
        i, j = s.actions
        observed = float(A[i, j])
        self.ledger_.add(RoundRecord(s.t, s.x, s.y, observed, A, (i, j)))
        self.state_, _, _ = bandit_step(s, self.params_, observed, self.rng_)

    def _next_pair(self):
        return self.state_.x.copy(), self.state_.y.copy()

    def ne_regret(self, eps=DEFAULT_EPS, restricted=False, mixed=False):
        check_is_fitted(self, "ledger_")
        theta = self.params_.floor if restricted else 0.0
        return ne_regret(self.ledger_, eps, theta, mixed)


class HedgeSelfPlay(_OnlineGameEstimator):
    """Both players run multiplicative weights on their own payoffs."""

    def __init__(self, eta_h=None, horizon=None):
        self.eta_h = eta_h
        self.horizon = horizon

    def _reset(self, d1, d2, T):
        if self.eta_h is None:
            H = self._horizon_for(T)
            self.rates_ = (hedge_rate(d1, H), hedge_rate(d2, H))
        else:
            self.rates_ = (self.eta_h, self.eta_h)
        self.x_ = np.full(d1, 1.0 / d1)
        self.y_ = np.full(d2, 1.0 / d2)
        self.ledger_ = RunLedger(d1, d2)

    def _play(self, A):
        A = as_entries(A)
        x, y = self.x_, self.y_
        self.ledger_.add(RoundRecord(self.ledger_.rounds + 1, x, y, float(x @ A @ y), A))
        self.x_ = hedge_step(x, A @ y, self.rates_[0], minimize=True).weights
        self.y_ = hedge_step(y, A.T @ x, self.rates_[1], minimize=False).weights

    def _next_pair(self):
        return self.x_.copy(), self.y_.copy()


__all__ = ["OMGRFTL", "BanditOMGRFTL", "HedgeSelfPlay"]
