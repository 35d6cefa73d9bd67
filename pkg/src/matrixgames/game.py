"""Payoff matrices, mixed strategies on (restricted) simplexes, linear best responses."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError, DomainError
from .validation import (SIMPLEX_TOL, check_floor, check_in_simplex, check_matrix,
                         check_same_dims, check_vector)


def _readonly(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """A bounded ``d1 x d2`` payoff matrix; the row player pays ``x' A y``.

    ``bound`` defaults to the largest absolute entry.
    """

    entries: np.ndarray
    bound: float = None

    def __post_init__(self):
        arr = check_matrix(self.entries, "payoff matrix")
        max_abs = float(np.max(np.abs(arr)))
        bound = max_abs if self.bound is None else float(self.bound)
        if not np.isfinite(bound) or bound < 0:
            raise ConfigurationError(f"bound must be a nonnegative finite real, got {self.bound!r}")
        if max_abs > bound:
            raise DomainError(f"entry of magnitude {max_abs} exceeds the declared bound {bound}")
        object.__setattr__(self, "entries", _readonly(arr))
        object.__setattr__(self, "bound", bound)

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, PayoffMatrix):
            return NotImplemented
        return self.bound == other.bound and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.entries.tobytes(), self.entries.shape, self.bound))


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability vector whose weights are all at least ``floor``."""

    weights: np.ndarray
    floor: float = 0.0

    def __post_init__(self):
        w = check_vector(self.weights, "weights")
        if w.shape[0] < 1:
            raise ConfigurationError("a strategy needs at least one coordinate")
        floor = check_floor(self.floor, w.shape[0], "floor")
        check_in_simplex(w, floor)
        object.__setattr__(self, "weights", _readonly(w))
        object.__setattr__(self, "floor", floor)

    @classmethod
    def from_weights(cls, weights, floor=0.0):
        """Build a strategy after snapping round-off (up to 1e-12) back onto the set."""
        w = np.asarray(weights, dtype=np.float64)
        floor = check_floor(floor, w.shape[0], "floor")
        w = np.maximum(w, floor)
        excess = w.sum() - 1.0
        if abs(excess) > 0:
            slack = w - floor
            total = slack.sum()
            if total > 0:
                w = floor + slack * ((total - excess) / total)
        return cls(w, floor)

    @classmethod
    def uniform(cls, d, floor=0.0):
        return cls(np.full(d, 1.0 / d), floor)

    @property
    def dim(self):
        return self.weights.shape[0]

    def __len__(self):
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return self.floor == other.floor and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.weights.tobytes(), self.floor))


@dataclass(frozen=True)
class RoundRecord:
    """What happened in round ``t``.

    ``payoff`` is ``x' A y`` under full information and the sampled entry
    ``A[i, j]`` under bandit feedback, where ``actions = (i, j)``.
    """

    t: int
    x: np.ndarray
    y: np.ndarray
    payoff: float
    matrix: Optional[np.ndarray] = None
    actions: Optional[Tuple[int, int]] = None


def as_entries(A):
    if isinstance(A, PayoffMatrix):
        return A.entries
    return check_matrix(A, min_dim=1)


def as_weights(x):
    if isinstance(x, MixedStrategy):
        return x.weights
    return check_vector(x, "strategy")


def matrix_bound(A):
    if isinstance(A, PayoffMatrix):
        return A.bound
    return float(np.max(np.abs(as_entries(A))))


def payoff(A, x, y):
    """Expected payoff ``x' A y`` of the row (minimizing) player."""
    M = as_entries(A)
    xw, yw = as_weights(x), as_weights(y)
    check_same_dims(M, xw, yw)
    return float(xw @ M @ yw)


def lipschitz_l1(A):
    """Lipschitz constant of ``(x, y) -> x' A y`` in the l1 norm: the entry bound."""
    return matrix_bound(A)


def lipschitz_l2(A):
    """Lipschitz constant in the l2 norm, ``sqrt(c) * (sqrt(d1) + sqrt(d2))``.

    The square root of the entry bound is kept as published even though a
    bound linear in ``c`` is what scaling arguments suggest for ``c < 1``.
    """
    M = as_entries(A)
    d1, d2 = M.shape
    if d1 < 2 or d2 < 2:
        raise ConfigurationError(f"need d1, d2 >= 2, got {d1}x{d2}")
    return float(np.sqrt(matrix_bound(A)) * (np.sqrt(d1) + np.sqrt(d2)))


def project_restricted(z, theta):
    """Map a point of the full simplex to an l1-nearest point of the theta-floored simplex.

    Coordinates below ``theta`` are raised to it and the added mass is taken
    from the coordinates above ``theta`` in proportion to their excess over
    ``theta``.  One pass suffices: what remains above the floor is exactly
    ``1 - theta * d``.
    """
    w = as_weights(z)
    d = w.shape[0]
    theta = check_floor(theta, d)
    check_in_simplex(w, 0.0, "z")
    below = w < theta
    added = float(np.sum(theta - w[below]))
    out = np.where(below, theta, w)
    if added > 0:
        slack = np.where(below, 0.0, w - theta)
        total = slack.sum()
        out = theta + slack * ((total - added) / total)
    return MixedStrategy.from_weights(out, theta)


def best_response_linear(score, theta=0.0, maximize=True):
    """Optimize ``score . y`` over the theta-floored simplex.

    Every coordinate gets ``theta``; the remaining ``1 - theta * d`` goes to
    the best coordinate, lowest index on ties.
    """
    s = check_vector(score, "score")
    d = s.shape[0]
    theta = check_floor(theta, d)
    best = int(np.argmax(s) if maximize else np.argmin(s))
    w = np.full(d, theta)
    w[best] += 1.0 - theta * d
    return MixedStrategy.from_weights(w, theta)


def uniform_strategy(d, floor=0.0):
    return MixedStrategy.uniform(d, floor)


__all__ = [
    "PayoffMatrix", "MixedStrategy", "RoundRecord", "payoff", "lipschitz_l1", "lipschitz_l2",
    "project_restricted", "best_response_linear", "uniform_strategy", "SIMPLEX_TOL",
]
