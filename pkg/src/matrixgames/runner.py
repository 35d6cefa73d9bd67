"""Run experiment cells and write their results.

A cell is one ``(algorithm, adversary, T, seed)`` combination.  Cells share
nothing, so they can run in a process pool; results are sorted by cell key
before anything is written, which keeps the output bytes independent of
scheduling.  Wall-clock times go to ``timings.csv`` so that ``rounds.csv``
and ``summary.csv`` are reproducible byte for byte.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
import io
import json
import os
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import __version__
from .adversaries import emit
from .exceptions import ConfigurationError, NumericError
from .game import RoundRecord
from .learners import (LearnerParams, LearnerState, bandit_initial, bandit_step, hedge_rate,
                       hedge_step, movement, movement_bound, sp_rftl_step)
from .metrics import RunLedger, individual_regrets, ne_regret, pair_gap

ROUND_COLUMNS = ["algorithm", "adversary", "d1", "d2", "T", "seed", "t", "payoff", "cum_payoff",
                 "ne_regret_running", "row_regret", "col_regret", "gap"]
SUMMARY_COLUMNS = ["algorithm", "adversary", "d1", "d2", "T", "seed", "status", "eta", "floor",
                   "cum_payoff", "comparator", "ne_regret", "ne_regret_restricted", "ne_regret_mixed",
                   "row_regret", "col_regret", "last_gap", "movement_violations",
                   "movement_max_ratio", "solver_iterations", "error"]
TIMING_COLUMNS = ["algorithm", "adversary", "T", "seed", "wall_ns"]

_LEARNER_STREAM = 0x6c726e72


def learner_rng(seed, T):
    """Learner generator for one run, split from the master seed by the run's horizon."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(_LEARNER_STREAM, int(T))))


@dataclass
class CellResult:
    key: tuple
    rows: List[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    wall_ns: int = 0
    failed: bool = False


def fmt(v):
    """Shortest round-trip text for floats, plain text otherwise."""
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def learner_params(cfg, algorithm, T):
    d1, d2 = cfg.d1, cfg.d2
    sched = cfg.schedule
    if algorithm == "sp_rftl_custom" or sched == "explicit":
        return LearnerParams.explicit(cfg.eta, cfg.floor, T)
    if algorithm == "bandit_omg_rftl":
        return LearnerParams.theorem5(T, d1, d2)
    return LearnerParams.theorem3(T, d1, d2, cfg.bound)


def run_cell(cfg, key):
    """Play one cell to the end (or to the first numeric failure)."""
    algorithm, _, T, seed = key
    res = CellResult(key)
    start = time.perf_counter_ns()
    spec = cfg.adversary(T, seed)
    ledger = RunLedger(cfg.d1, cfg.d2)
    info = {"status": "ok", "error": "", "movement_violations": None, "movement_max_ratio": None,
            "solver_iterations": None, "eta": None, "floor": None, "last_gap": None}
    try:
        if algorithm == "hedge_selfplay":
            nxt = _run_hedge(cfg, spec, T, ledger, res, info)
        elif algorithm == "bandit_omg_rftl":
            nxt = _run_bandit(cfg, spec, T, seed, ledger, res, info)
        else:
            nxt = _run_full(cfg, algorithm, spec, T, ledger, res, info)
        S = ledger.matrix_sum
        info["last_gap"] = pair_gap(S / T, nxt[0], nxt[1])
    except NumericError as exc:
        info["status"], info["error"] = "failed", str(exc)
        res.failed = True
    summary = {"algorithm": algorithm, "adversary": cfg.adversary_kind, "d1": cfg.d1, "d2": cfg.d2,
               "T": T, "seed": seed}
    summary.update(info)
    if ledger.rounds:
        summary["cum_payoff"] = ledger.cum_payoff
        row, col = individual_regrets(ledger)
        summary["row_regret"], summary["col_regret"] = row, col
        try:
            summary["ne_regret"] = ne_regret(ledger, cfg.eps)
            summary["comparator"] = ledger.comparator
            if algorithm == "bandit_omg_rftl":
                summary["ne_regret_restricted"] = ne_regret(ledger, cfg.eps, theta=info["floor"])
                summary["ne_regret_mixed"] = ne_regret(ledger, cfg.eps, mixed=True)
        except NumericError as exc:
            summary["status"], summary["error"] = "failed", f"comparator: {exc}"
            res.failed = True
    res.summary = summary
    res.wall_ns = time.perf_counter_ns() - start
    return res


def _row(cfg, key, ledger, record, running_ne):
    algorithm, kind, T, seed = key
    row, col = individual_regrets(ledger)
    t = record.t
    out = {"algorithm": algorithm, "adversary": kind, "d1": cfg.d1, "d2": cfg.d2, "T": T,
           "seed": seed, "t": t, "payoff": record.payoff, "cum_payoff": ledger.cum_payoff,
           "row_regret": row, "col_regret": col,
           "gap": pair_gap(ledger.matrix_sum / t, record.x, record.y)}
    if running_ne:
        out["ne_regret_running"] = ne_regret(ledger, cfg.eps)
    return out


def _history(ledger):
    return ledger.records


def _run_full(cfg, algorithm, spec, T, ledger, res, info):
    params = learner_params(cfg, algorithm, T)
    info["eta"], info["floor"] = params.eta, params.floor
    state = LearnerState.initial(cfg.d1, cfg.d2, params.floor)
    violations, worst, iters = 0, 0.0, 0
    try:
        for t in range(1, T + 1):
            A = emit(spec, t, _history(ledger)).entries
            rec = RoundRecord(t, state.x, state.y, float(state.x @ A @ state.y), A)
            ledger.add(rec)
            res.rows.append(_row(cfg, res.key, ledger, rec, cfg.running_ne))
            nxt, _ = sp_rftl_step(state, params, A)
            ratio = movement(state, nxt) / movement_bound(t, params, cfg.bound)
            worst = max(worst, ratio)
            violations += ratio > 1.0
            iters += nxt.solver_iterations
            state = nxt
    finally:
        info["movement_violations"], info["movement_max_ratio"] = violations, worst
        info["solver_iterations"] = iters
    return state.x, state.y


def _run_bandit(cfg, spec, T, seed, ledger, res, info):
    params = learner_params(cfg, "bandit_omg_rftl", T)
    info["eta"], info["floor"] = params.eta, params.floor
    rng = learner_rng(seed, T)
    state = bandit_initial(cfg.d1, cfg.d2, params, rng)
    iters = 0
    try:
        for t in range(1, T + 1):
            # the actions for round t were drawn before A_t exists
            i, j = state.actions
            A = emit(spec, t, _history(ledger)).entries
            observed = float(A[i, j])
            rec = RoundRecord(t, state.x, state.y, observed, A, (i, j))
            ledger.add(rec)
            res.rows.append(_row(cfg, res.key, ledger, rec, cfg.running_ne))
            state, _, _ = bandit_step(state, params, observed, rng)
            iters += state.solver_iterations
    finally:
        info["solver_iterations"] = iters
    return state.x, state.y


def _run_hedge(cfg, spec, T, ledger, res, info):
    d1, d2 = cfg.d1, cfg.d2
    rx, ry = (cfg.eta_h, cfg.eta_h) if cfg.eta_h is not None else (hedge_rate(d1, T), hedge_rate(d2, T))
    info["eta"] = rx
    x, y = np.full(d1, 1.0 / d1), np.full(d2, 1.0 / d2)
    for t in range(1, T + 1):
        A = emit(spec, t, _history(ledger)).entries
        rec = RoundRecord(t, x, y, float(x @ A @ y), A)
        ledger.add(rec)
        res.rows.append(_row(cfg, res.key, ledger, rec, cfg.running_ne))
        x, y = hedge_step(x, A @ y, rx, True).weights, hedge_step(y, A.T @ x, ry, False).weights
    return x, y


def run_cells(cfg, jobs=1):
    keys = cfg.cells()
    if jobs <= 1 or len(keys) <= 1:
        results = [run_cell(cfg, k) for k in keys]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_cell, [cfg] * len(keys), keys))
    return sorted(results, key=lambda r: r.key)


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def render(cfg, results):
    """File name -> text for everything a run writes."""
    cols = [c for c in ROUND_COLUMNS if cfg.running_ne or c != "ne_regret_running"]
    rows = [r for res in results for r in res.rows]
    files = {
        "rounds.csv": _csv_text(cols, rows),
        "summary.csv": _csv_text(SUMMARY_COLUMNS, [res.summary for res in results]),
        "timings.csv": _csv_text(TIMING_COLUMNS, [
            {"algorithm": r.key[0], "adversary": r.key[1], "T": r.key[2], "seed": r.key[3],
             "wall_ns": r.wall_ns} for r in results]),
    }
    if cfg.jsonl:
        lines = []
        for res in results:
            for r in res.rows:
                lines.append(json.dumps({c: r.get(c) for c in cols}))
            lines.append(json.dumps({"summary": True, **res.summary}))
        files["rounds.jsonl"] = "\n".join(lines) + "\n"
    files["manifest.json"] = json.dumps({
        "tool": "matrixgames", "version": __version__, "config_sha256": cfg.digest,
        "algorithms": list(cfg.algorithms), "adversary": cfg.adversary_kind,
        "horizons": list(cfg.horizons), "seeds": list(cfg.seeds),
        "cells": [{"algorithm": r.key[0], "T": r.key[2], "seed": r.key[3],
                   "status": r.summary.get("status")} for r in results],
    }, indent=2) + "\n"
    return files


def write_outputs(out_dir, files):
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run_experiment(cfg, out_dir=None, jobs=1):
    """Run every cell and write the outputs; returns ``(results, out_dir)``."""
    out_dir = out_dir or cfg.out_dir
    results = run_cells(cfg, jobs)
    write_outputs(out_dir, render(cfg, results))
    return results, out_dir


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def replay_check(cfg, recorded_dir, jobs=1):
    """Re-run a recorded experiment and compare it field by field.

    Seeds come from ``cfg`` (after any override), not from the manifest, so a
    recording made with other seeds fails at its first row.  Returns
    ``(ok, message)``; the message names the first divergence.
    """
    man_path = os.path.join(recorded_dir, "manifest.json")
    if not os.path.exists(man_path):
        raise ConfigurationError(f"no manifest.json in {recorded_dir}")
    with open(man_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("config_sha256") != cfg.digest:
        return False, "config differs from the one recorded in the manifest"
    files = render(cfg, run_cells(cfg, jobs))
    for name in ("rounds.csv", "summary.csv"):
        path = os.path.join(recorded_dir, name)
        if not os.path.exists(path):
            return False, f"{name} missing from the recording"
        old = _read_csv(path)
        new = list(csv.reader(io.StringIO(files[name])))
        msg = _first_divergence(name, old, new)
        if msg:
            return False, msg
    return True, "recording reproduced exactly"


def _first_divergence(name, old, new):
    if not old or old[0] != new[0]:
        return f"{name}: header differs"
    header = old[0]
    idx = {c: header.index(c) for c in ("algorithm", "T", "seed")}
    t_col = header.index("t") if "t" in header else None
    for n, (a, b) in enumerate(zip(old[1:], new[1:]), 2):
        if a == b:
            continue
        cell = "/".join(b[idx[c]] if len(b) == len(header) else "?" for c in ("algorithm", "T", "seed"))
        for col, va, vb in zip(header, a, b):
            if va != vb:
                where = f"round {b[t_col]}" if t_col is not None else "summary"
                return f"{name} line {n}: cell {cell}, column {col}, {where}: recorded {va!r}, replayed {vb!r}"
        return f"{name} line {n}: row length differs"
    if len(old) != len(new):
        return f"{name}: {len(old) - 1} recorded rows, {len(new) - 1} replayed"
    return None


__all__ = ["run_cell", "run_cells", "run_experiment", "replay_check", "render", "learner_rng",
           "ROUND_COLUMNS", "SUMMARY_COLUMNS"]
