"""Shifted negative entropy on (restricted) simplexes and its exact linear-plus-entropy optimizer."""

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .exceptions import ConfigurationError, DomainError
from .game import MixedStrategy, as_weights
from .validation import check_floor, check_positive, check_vector


@dataclass(frozen=True)
class NegEntropy:
    """``R(x) = sum_i x_i ln x_i + ln d``, nonnegative on the simplex."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigurationError(f"dimension must be an integer >= 2, got {self.dim!r}")

    @property
    def offset(self):
        return float(np.log(self.dim))

    def _check(self, x):
        w = as_weights(x)
        if w.shape[0] != self.dim:
            raise ConfigurationError(f"expected a strategy of length {self.dim}, got {w.shape[0]}")
        return w

    def value(self, x):
        w = self._check(x)
        return float(np.sum(xlogy(w, w)) + self.offset)

    def gradient(self, x):
        w = self._check(x)
        if np.any(w <= 0):
            raise DomainError("entropy gradient is undefined at a zero coordinate; use a positive floor")
        return 1.0 + np.log(w)

    def lipschitz_bound(self, theta):
        """Bound on the sup-norm of the gradient over the theta-floored simplex."""
        if not np.isfinite(theta) or theta <= 0:
            raise DomainError(f"theta must be positive, got {theta!r}")
        check_floor(theta, self.dim)
        return max(abs(float(np.log(theta))), 1.0)


def entropy_value(x):
    w = as_weights(x)
    return NegEntropy(w.shape[0]).value(w)


def entropy_lipschitz(theta):
    """``max(|ln theta|, 1)``, without a dimension check."""
    if not np.isfinite(theta) or theta <= 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    return max(abs(float(np.log(theta))), 1.0)


def logsumexp(z):
    m = z.max()
    if not np.isfinite(m):
        return m
    return m + np.log(np.exp(z - m).sum())


def clipped_softmax_logits(z, theta):
    """Maximize ``z . y - R(y)`` over the theta-floored simplex.

    Returns ``(y, log_unclipped)`` where ``y_i = max(theta, exp(z_i - L))``
    with ``L`` chosen so that ``y`` sums to one, and ``log_unclipped`` is
    ``z - L`` (the log of the weight before clipping).  The clipped set is
    always a prefix of the coordinates sorted by ``z``, so it is found by a
    single scan instead of a bisection on ``L``.
    """
    d = z.shape[0]
    log_free = z - logsumexp(z)
    y = np.exp(log_free)
    if theta <= 0 or y.min() >= theta:
        return y, log_free
    order = np.argsort(z, kind="stable")
    zs = z[order]
    # tail[k] = logsumexp(zs[k:]); candidate k clips the k smallest coordinates
    tail = np.logaddexp.accumulate(zs[::-1])[::-1]
    mass = 1.0 - theta * np.arange(d)
    ok = mass > 0
    L = np.full(d, np.inf)
    L[ok] = tail[ok] - np.log(mass[ok])
    feasible = ok & (zs - L >= np.log(theta))
    if feasible.any():
        k = int(np.argmax(feasible))
        L = L[k]
    else:
        # theta == 1/d up to rounding: the set is a single point
        k = d
        L = zs[-1] - np.log(theta)
    log_un = z - L
    clipped = np.zeros(d, dtype=bool)
    clipped[order[:k]] = True
    y = np.where(clipped, theta, np.exp(log_un))
    # fix the last ulp of the sum on the free coordinates
    free = ~clipped
    if free.any():
        s = y.sum()
        if s != 1.0:
            y[free] *= (1.0 - theta * k) / y[free].sum()
    return y, log_un


def clipped_softmax(score, c, theta=0.0, maximize=True):
    """Exact optimizer of ``score . y - c R(y)`` (maximize) or ``score . x + c R(x)`` (minimize).

    The optimum is the softmax of ``+-score / c`` with every coordinate that
    would fall below ``theta`` pinned at ``theta``.
    """
    s = check_vector(score, "score")
    c = check_positive(c, "c")
    theta = check_floor(theta, s.shape[0])
    z = s / c if maximize else -s / c
    y, _ = clipped_softmax_logits(z, theta)
    return MixedStrategy.from_weights(y, theta)


def kkt_residual(score, c, theta, y, maximize=True):
    """Largest violation of the optimality conditions of ``clipped_softmax`` at ``y``.

    On free coordinates ``score_i / c - ln y_i`` must be constant; on
    clipped ones it must not exceed that constant.
    """
    s = np.asarray(score, dtype=np.float64)
    w = as_weights(y)
    z = s / c if maximize else -s / c
    zero = w == 0.0
    g = z - np.log(w, where=~zero, out=np.full_like(w, np.inf))
    free = w > theta * (1 + 1e-9) if theta > 0 else ~zero
    if not free.any():
        return 0.0
    level = np.median(g[free])
    res = float(np.max(np.abs(g[free] - level)))
    clipped = ~free & ~zero
    if clipped.any():
        res = max(res, float(np.max(np.maximum(g[clipped] - level, 0.0))))
    if zero.any():
        # an exact zero is fine when the true weight exp(z - level) underflows anyway
        res = max(res, float(np.max(np.exp(np.minimum(z[zero] - level, 0.0)))) if theta == 0
                  else float(theta))
    res = max(res, abs(float(w.sum()) - 1.0), float(np.max(np.maximum(theta - w, 0.0))))
    return res


__all__ = ["NegEntropy", "clipped_softmax", "clipped_softmax_logits", "entropy_lipschitz",
           "entropy_value", "kkt_residual"]
