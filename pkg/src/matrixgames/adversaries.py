"""Payoff-matrix sequences.

Emission is a pure function of ``(spec, t, history)``.  Random matrices
come from a generator keyed on ``(seed, t)`` so a sequence does not depend
on how many rounds were drawn before, or on the horizon.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ConfigurationError
from .game import PayoffMatrix, as_weights
from .validation import check_matrix

KINDS = ("fixed", "theorem1_scenario1", "theorem1_scenario2", "random_bounded",
         "adaptive_best_response")

MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])
# column player's first action dominates: value 1
ROW_INDIFFERENT = np.array([[1.0, -1.0], [1.0, -1.0]])

_ADVERSARY_STREAM = 0x61647672  # keeps adversary draws apart from learner draws


@dataclass(frozen=True, eq=False)
class AdversarySpec:
    kind: str
    d1: int = 2
    d2: int = 2
    bound: float = 1.0
    horizon: Optional[int] = None
    seed: int = 0
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown adversary kind {self.kind!r}; expected one of {KINDS}")
        for name in ("d1", "d2"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 2:
                raise ConfigurationError(f"{name} must be an integer >= 2, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not np.isfinite(self.bound) or self.bound <= 0:
            raise ConfigurationError(f"bound must be a positive finite real, got {self.bound!r}")
        object.__setattr__(self, "bound", float(self.bound))
        if self.horizon is not None:
            if isinstance(self.horizon, bool) or int(self.horizon) != self.horizon or self.horizon < 1:
                raise ConfigurationError(f"horizon must be a positive integer, got {self.horizon!r}")
            object.__setattr__(self, "horizon", int(self.horizon))
        if self.kind.startswith("theorem1"):
            if (self.d1, self.d2) != (2, 2):
                raise ConfigurationError(f"{self.kind} needs a 2x2 game, got {self.d1}x{self.d2}")
            if self.horizon is None or self.horizon % 2:
                raise ConfigurationError(f"{self.kind} needs an even horizon, got {self.horizon!r}")
            if self.bound < 1:
                raise ConfigurationError(f"{self.kind} emits entries of magnitude 1; bound {self.bound} is too small")
        M = self.matrix
        if self.kind == "fixed" and M is None:
            raise ConfigurationError("fixed adversary needs a matrix")
        if self.kind == "adaptive_best_response" and M is None:
            if (self.d1, self.d2) != (2, 2):
                raise ConfigurationError("adaptive_best_response without a matrix plays +-matching pennies "
                                         f"and needs a 2x2 game, got {self.d1}x{self.d2}")
            if self.bound < 1:
                raise ConfigurationError(f"bound {self.bound} is below the matching-pennies entries")
        if M is not None:
            M = check_matrix(M, "adversary matrix")
            if M.shape != (self.d1, self.d2):
                raise ConfigurationError(f"adversary matrix is {M.shape[0]}x{M.shape[1]}, "
                                         f"expected {self.d1}x{self.d2}")
            if np.max(np.abs(M)) > self.bound:
                raise ConfigurationError(f"adversary matrix has entries above the bound {self.bound}")
            M = M.copy()
            M.flags.writeable = False
            object.__setattr__(self, "matrix", M)

    @property
    def base_matrix(self):
        return MATCHING_PENNIES if self.matrix is None else self.matrix


def round_rng(seed, t):
    """Generator for round ``t`` of the adversary seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(_ADVERSARY_STREAM, int(t))))


def emit(spec, t, history=()):
    """Payoff matrix for round ``t``; ``history`` holds the records of rounds ``1..t-1`` only."""
    if isinstance(t, bool) or int(t) != t or t < 1:
        raise ConfigurationError(f"round index must be a positive integer, got {t!r}")
    if spec.horizon is not None and t > spec.horizon:
        raise ConfigurationError(f"round {t} is past the horizon {spec.horizon}")
    kind = spec.kind
    if kind == "fixed":
        M = spec.matrix
    elif kind == "theorem1_scenario1":
        M = MATCHING_PENNIES if t <= spec.horizon // 2 else np.zeros((2, 2))
    elif kind == "theorem1_scenario2":
        M = MATCHING_PENNIES if t <= spec.horizon // 2 else ROW_INDIFFERENT
    elif kind == "random_bounded":
        M = round_rng(spec.seed, t).uniform(-spec.bound, spec.bound, size=(spec.d1, spec.d2))
    else:
        M = _adaptive(spec, t, history)
    return PayoffMatrix(M, spec.bound)


def _adaptive(spec, t, history):
    """``+M`` or ``-M``, whichever costs the row player more against last round's pair."""
    M = spec.base_matrix
    if t == 1 or not history:
        return M
    last = history[-1]
    if last.t != t - 1:
        raise ConfigurationError(f"history ends at round {last.t}, expected round {t - 1}")
    x, y = as_weights(last.x), as_weights(last.y)
    v = float(x @ M @ y)
    return -M if v < 0 else M


def sequence(spec, T=None):
    """All matrices of a history-free adversary, as a ``(T, d1, d2)`` array."""
    if spec.kind == "adaptive_best_response":
        raise ConfigurationError("the adaptive adversary needs the play history; call emit per round")
    T = spec.horizon if T is None else T
    if T is None:
        raise ConfigurationError("horizon unknown")
    return np.stack([emit(spec, t).entries for t in range(1, T + 1)])


__all__ = ["AdversarySpec", "emit", "sequence", "round_rng", "KINDS", "MATCHING_PENNIES",
           "ROW_INDIFFERENT"]
