"""Regret bookkeeping: NE regret, individual regrets, growth-rate fits."""

import math

import numpy as np
from scipy import stats

from .exceptions import ConfigurationError
from .game import as_entries, as_weights
from .saddle import DEFAULT_EPS, comparator_value


class CompensatedSum:
    """Neumaier summation for a scalar or an array of running totals."""

    def __init__(self, shape=()):
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, value):
        v = np.asarray(value, dtype=np.float64)
        t = self.total + v
        big = np.abs(self.total) >= np.abs(v)
        self.comp = self.comp + np.where(big, (self.total - t) + v, (v - t) + self.total)
        self.total = t

    @property
    def value(self):
        out = self.total + self.comp
        return float(out) if out.ndim == 0 else out


class RunLedger:
    """Per-round records plus the running sums the regrets need.

    ``payoff`` is what the round paid: ``x' A y`` under full information,
    the sampled entry under bandit feedback.  ``mixed_payoff`` is always
    ``x' A y``; the individual regrets are defined through it.
    """

    def __init__(self, d1, d2, keep_records=True):
        self.shape = (d1, d2)
        self.records = [] if keep_records else None
        self.rounds = 0
        self._payoff = CompensatedSum()
        self._mixed = CompensatedSum()
        self._sum = CompensatedSum((d1, d2))
        self._row_scores = CompensatedSum(d1)   # sum_t A_t y_t
        self._col_scores = CompensatedSum(d2)   # sum_t A_t' x_t
        self.comparator = None

    def add(self, record):
        A = as_entries(record.matrix)
        x, y = as_weights(record.x), as_weights(record.y)
        if A.shape != self.shape:
            raise ConfigurationError(f"record matrix has shape {A.shape}, ledger is {self.shape}")
        if record.t != self.rounds + 1:
            raise ConfigurationError(f"expected round {self.rounds + 1}, got {record.t}")
        Ay = A @ y
        self._payoff.add(record.payoff)
        self._mixed.add(float(x @ Ay))
        self._sum.add(A)
        self._row_scores.add(Ay)
        self._col_scores.add(A.T @ x)
        self.rounds += 1
        self.comparator = None
        if self.records is not None:
            self.records.append(record)

    @property
    def cum_payoff(self):
        return self._payoff.value

    @property
    def cum_mixed_payoff(self):
        return self._mixed.value

    @property
    def matrix_sum(self):
        return self._sum.value

    @property
    def row_scores(self):
        return self._row_scores.value

    @property
    def col_scores(self):
        return self._col_scores.value


def ne_regret(ledger, eps=DEFAULT_EPS, theta=0.0, mixed=False):
    """``|sum of payoffs - min_x max_y x' (sum A_t) y|``, comparator certified to ``eps``.

    ``theta > 0`` takes the comparator over the floored simplexes instead;
    ``mixed`` uses ``x_t' A_t y_t`` in place of the realized payoffs.
    """
    if ledger.rounds == 0:
        raise ConfigurationError("empty ledger")
    value = comparator_value(ledger.matrix_sum, theta, eps)
    if theta == 0.0:
        ledger.comparator = value
    total = ledger.cum_mixed_payoff if mixed else ledger.cum_payoff
    return abs(total - value)


def individual_regrets(ledger):
    """``(row_regret, col_regret)`` against the best fixed action in hindsight.

    Their sum is the duality gap ``max_j (sum A_t' x_t)_j - min_i (sum A_t y_t)_i``
    of the empirical play.
    """
    if ledger.rounds == 0:
        raise ConfigurationError("empty ledger")
    total = ledger.cum_mixed_payoff
    row = total - float(np.min(ledger.row_scores))
    col = float(np.max(ledger.col_scores)) - total
    return row, col


def empirical_gap(ledger):
    return float(np.max(ledger.col_scores)) - float(np.min(ledger.row_scores))


def pair_gap(S, x, y):
    """Bilinear duality gap ``max_j (S'x)_j - min_i (S y)_i`` of a fixed pair."""
    return float(np.max(S.T @ x)) - float(np.min(S @ y))


def slope_fit(points):
    """OLS fit of ``ln(regret)`` on ``ln(T)``; returns ``(slope, intercept, r2)``.

    Regrets are clamped below at 1e-12.
    """
    pts = list(points)
    if len(pts) < 4:
        raise ConfigurationError(f"slope fit needs at least 4 points, got {len(pts)}")
    T = np.array([p[0] for p in pts], dtype=np.float64)
    r = np.array([p[1] for p in pts], dtype=np.float64)
    if np.any(T <= 0) or not np.all(np.isfinite(T)) or not np.all(np.isfinite(r)):
        raise ConfigurationError("slope fit needs positive finite horizons and finite regrets")
    if np.unique(T).size < 2:
        raise ConfigurationError("slope fit needs at least two distinct horizons")
    fit = stats.linregress(np.log(T), np.log(np.maximum(r, 1e-12)))
    r2 = fit.rvalue ** 2 if math.isfinite(fit.rvalue) else 1.0
    return float(fit.slope), float(fit.intercept), float(r2)


__all__ = ["RunLedger", "CompensatedSum", "ne_regret", "individual_regrets", "empirical_gap",
           "pair_gap", "slope_fit"]
