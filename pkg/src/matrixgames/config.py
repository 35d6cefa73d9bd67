"""Experiment configuration: an INI file with four sections.

::

    [experiment]
    algorithm = omg_rftl            # comma list allowed
    horizons = 256, 512, 1024
    seeds = 0, 1, 2
    eps = 1e-8                      # comparator tolerance
    running_ne = false              # per-round NE regret column (slow)

    [adversary]
    kind = theorem1_scenario2
    d1 = 2
    d2 = 2
    bound = 1.0
    matrix = 1 -1; -1 1             # rows separated by ';'

    [params]
    schedule = theorem3             # theorem3 | theorem5 | explicit
    eta = 16.0
    floor = 1e-7
    eta_h = 0.1

    [output]
    dir = results
    jsonl = false

Only ``[experiment]`` and ``adversary.kind`` are required.  Unknown
sections and keys are rejected with the line they appear on.
"""

import configparser
import hashlib
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .adversaries import KINDS, AdversarySpec
from .exceptions import ConfigurationError, MatrixGameError
from .learners import LearnerParams

ALGORITHMS = ("omg_rftl", "bandit_omg_rftl", "hedge_selfplay", "sp_rftl_custom")

_SCHEMA = {
    "experiment": {"algorithm", "horizons", "seeds", "eps", "running_ne"},
    "adversary": {"kind", "d1", "d2", "bound", "matrix"},
    "params": {"schedule", "eta", "floor", "eta_h"},
    "output": {"dir", "jsonl"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: Tuple[str, ...]
    adversary_kind: str
    horizons: Tuple[int, ...]
    seeds: Tuple[int, ...]
    d1: int = 2
    d2: int = 2
    bound: float = 1.0
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None
    schedule: Optional[str] = None
    eta: Optional[float] = None
    floor: Optional[float] = None
    eta_h: Optional[float] = None
    eps: float = 1e-8
    running_ne: bool = False
    out_dir: str = "results"
    jsonl: bool = False
    source_text: str = field(default="", repr=False, compare=False)

    def adversary(self, T, seed):
        M = None if self.matrix is None else np.array(self.matrix, dtype=np.float64)
        return AdversarySpec(self.adversary_kind, self.d1, self.d2, self.bound, T, seed, M)

    def cells(self):
        """Every (algorithm, adversary, T, seed) cell in sorted key order."""
        return sorted((a, self.adversary_kind, T, s)
                      for a in self.algorithms for T in self.horizons for s in self.seeds)

    def with_seeds(self, seeds):
        return replace(self, seeds=tuple(int(s) for s in seeds))

    @property
    def digest(self):
        return hashlib.sha256(self.source_text.encode()).hexdigest()


def _line_index(text):
    """Map ``(section, key)`` to the 1-based line where it is set."""
    where, section = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), n)
    return where


class _Reader:
    def __init__(self, parser, lines, source):
        self.parser, self.lines, self.source = parser, lines, source

    def fail(self, section, key, msg):
        n = self.lines.get((section, key)) or self.lines.get((section, None))
        loc = f"{self.source}:{n}" if n else self.source
        name = f"{section}.{key}" if key else section
        raise ConfigurationError(f"{loc}: {name}: {msg}")

    def raw(self, section, key):
        if not self.parser.has_section(section) or not self.parser.has_option(section, key):
            return None
        v = self.parser.get(section, key).strip()
        return v if v else None

    def get(self, section, key, conv, default=None, required=False):
        v = self.raw(section, key)
        if v is None:
            if required:
                self.fail(section, key, "missing required value")
            return default
        try:
            return conv(v)
        except (ValueError, MatrixGameError) as exc:
            self.fail(section, key, f"bad value {v!r}: {exc}")


def _int_list(v):
    out = tuple(int(p) for p in re.split(r"[,\s]+", v.strip()) if p)
    if not out:
        raise ValueError("empty list")
    return out


def _str_list(v):
    return tuple(p for p in re.split(r"[,\s]+", v.strip()) if p)


def _bool(v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _matrix(v):
    rows = [r for r in v.split(";") if r.strip()]
    M = tuple(tuple(float(p) for p in re.split(r"[,\s]+", r.strip()) if p) for r in rows)
    if not M or len({len(r) for r in M}) != 1:
        raise ValueError("rows must be non-empty and of equal length")
    return M


def parse_config(text, source="<config>"):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    lines = _line_index(text)
    rd = _Reader(parser, lines, source)
    for section in parser.sections():
        if section not in _SCHEMA:
            rd.fail(section, None, f"unknown section; expected one of {sorted(_SCHEMA)}")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                rd.fail(section, key, f"unknown key; expected one of {sorted(_SCHEMA[section])}")
    if not parser.has_section("experiment"):
        raise ConfigurationError(f"{source}: missing [experiment] section")

    algorithms = rd.get("experiment", "algorithm", _str_list, required=True)
    for a in algorithms:
        if a not in ALGORITHMS:
            rd.fail("experiment", "algorithm", f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
    horizons = rd.get("experiment", "horizons", _int_list, required=True)
    if any(T < 1 for T in horizons):
        rd.fail("experiment", "horizons", "horizons must be positive")
    seeds = rd.get("experiment", "seeds", _int_list, default=(0,))
    if any(s < 0 for s in seeds):
        rd.fail("experiment", "seeds", "seeds must be nonnegative")
    eps = rd.get("experiment", "eps", float, default=1e-8)
    if not eps > 0:
        rd.fail("experiment", "eps", "must be positive")

    kind = rd.get("adversary", "kind", str, required=True)
    if kind not in KINDS:
        rd.fail("adversary", "kind", f"unknown kind {kind!r}; expected one of {KINDS}")
    schedule = rd.get("params", "schedule", str)
    if schedule is not None and schedule not in ("theorem3", "theorem5", "explicit"):
        rd.fail("params", "schedule", f"unknown schedule {schedule!r}")

    cfg = ExperimentConfig(
        algorithms=algorithms, adversary_kind=kind, horizons=horizons, seeds=seeds,
        d1=rd.get("adversary", "d1", int, 2), d2=rd.get("adversary", "d2", int, 2),
        bound=rd.get("adversary", "bound", float, 1.0), matrix=rd.get("adversary", "matrix", _matrix),
        schedule=schedule, eta=rd.get("params", "eta", float), floor=rd.get("params", "floor", float),
        eta_h=rd.get("params", "eta_h", float), eps=eps,
        running_ne=rd.get("experiment", "running_ne", _bool, False),
        out_dir=rd.get("output", "dir", str, "results"), jsonl=rd.get("output", "jsonl", _bool, False),
        source_text=text)
    # let the adversary validate dimensions, bound and matrix for every horizon
    for T in horizons:
        try:
            cfg.adversary(T, seeds[0])
        except ConfigurationError as exc:
            rd.fail("adversary", None, f"{exc} (T={T})")
    for a in algorithms:
        _check_algorithm(rd, cfg, a)
    return cfg


def _check_algorithm(rd, cfg, algorithm):
    sched = cfg.schedule
    if algorithm == "sp_rftl_custom" or sched == "explicit":
        if algorithm != "hedge_selfplay" and (cfg.eta is None or cfg.floor is None):
            rd.fail("params", None, f"{algorithm} with explicit parameters needs eta and floor")
    if algorithm == "omg_rftl" and sched == "theorem5":
        rd.fail("params", "schedule", "theorem5 applies to bandit_omg_rftl only")
    if algorithm == "bandit_omg_rftl" and sched == "theorem3":
        rd.fail("params", "schedule", "theorem3 applies to full-information learners only")
    if algorithm == "bandit_omg_rftl" and sched != "explicit":
        for T in cfg.horizons:
            try:
                LearnerParams.theorem5(T, cfg.d1, cfg.d2)
            except ConfigurationError as exc:
                rd.fail("experiment", "horizons", str(exc))


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


__all__ = ["ExperimentConfig", "parse_config", "load_config", "ALGORITHMS"]
