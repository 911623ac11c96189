"""Replica orchestration: derived seeds, parallel sample -> spectrum
pipelines, order-stable aggregation, and the expectation-bound checks.

Replica i always runs under seed derive_seed(master_seed, i), so the
result set is a pure function of the config. Workers only change the
schedule; aggregation consumes rows in replica-index order, making the
report bitwise identical for any worker count.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import brownian
from ._rng import derive_seed
from .symbolic import Alphabet
from .transfer import (DEFAULT_MAX_ITERS, DEFAULT_TOL, TransferOperator,
                       build_potential, pathwise_bounds, power_iterate,
                       ratio_representation)

WORKERS_ENV = "RUELLE_RAND_WORKERS"


@dataclass(frozen=True)
class ReplicaConfig:
    level: int
    alphabet: Alphabet = Alphabet(2)
    beta: float = 1.0
    master_seed: int = 0
    replicas: int = 1
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.replicas < 1:
            raise ValueError("need at least one replica")


@dataclass(frozen=True)
class ReplicaRow:
    """Per-replica record; the CSV sidecar and all checks read from here."""

    index: int
    seed: int
    eigenvalue: float
    log_eigenvalue: float
    m1: float
    b1: float
    iterations: int
    residual: float
    converged: bool
    lower_ok: bool
    upper_ok: bool
    positive_ok: bool
    ratio_gap: float


@dataclass(frozen=True)
class McReport:
    n_converged: int
    n_failed: int
    mean_lambda: float
    stderr_lambda: float
    mean_log_lambda: float
    stderr_log_lambda: float
    quantiles: dict
    bound_violations: dict
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "n_converged": self.n_converged,
            "n_failed": self.n_failed,
            "mean_lambda": self.mean_lambda,
            "stderr_lambda": self.stderr_lambda,
            "mean_log_lambda": self.mean_log_lambda,
            "stderr_log_lambda": self.stderr_log_lambda,
            "quantiles": dict(self.quantiles),
            "bound_violations": dict(self.bound_violations),
            "wall_time": self.wall_time,
        }


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, else the RUELLE_RAND_WORKERS env var, else 1."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV, "").strip()
        workers = int(env) if env else 1
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


def _replica_row(arg: tuple[ReplicaConfig, int]) -> ReplicaRow:
    config, i = arg
    seed = derive_seed(config.master_seed, i)
    grid = brownian.sample(config.level, config.alphabet, seed)
    L = TransferOperator(build_potential(grid, config.beta))
    res = power_iterate(L, config.tol, config.max_iters)
    if res.converged:
        bounds = pathwise_bounds(L, res, grid)
        positive = bool(np.all(res.h.values > 0) and np.all(res.nu > 0))
        ratio = ratio_representation(L, res, grid)
        ratio_gap = abs(ratio - res.eigenvalue) / res.eigenvalue
    else:
        bounds = {"lower_ok": False, "upper_ok": False}
        positive = False
        ratio_gap = math.inf
    return ReplicaRow(
        index=i,
        seed=seed,
        eigenvalue=res.eigenvalue,
        log_eigenvalue=res.log_eigenvalue,
        m1=float(np.max(grid.values)),
        b1=float(grid.values[-1]),
        iterations=res.iterations,
        residual=res.residual,
        converged=res.converged,
        lower_ok=bounds["lower_ok"],
        upper_ok=bounds["upper_ok"],
        positive_ok=positive,
        ratio_gap=ratio_gap,
    )


def run_replicas(config: ReplicaConfig, workers: int | None = None) -> list[ReplicaRow]:
    """All replica rows, in replica-index order regardless of schedule."""
    workers = resolve_workers(workers)
    args = [(config, i) for i in range(config.replicas)]
    if workers == 1:
        return [_replica_row(a) for a in args]
    chunk = max(1, config.replicas // (4 * workers))
    with get_context("fork").Pool(workers) as pool:
        return pool.map(_replica_row, args, chunksize=chunk)


def aggregate(config: ReplicaConfig, rows: list[ReplicaRow],
              wall_time: float) -> McReport:
    good = [r for r in rows if r.converged]
    if not good:
        raise RuntimeError("all replicas failed to converge; check level/beta/tol")
    lams = np.array([r.eigenvalue for r in good])
    logs = np.array([r.log_eigenvalue for r in good])
    n = lams.size

    def _se(v):
        return float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0

    q = np.quantile(lams, [0.01, 0.5, 0.99])
    return McReport(
        n_converged=n,
        n_failed=len(rows) - n,
        mean_lambda=float(lams.mean()),
        stderr_lambda=_se(lams),
        mean_log_lambda=float(logs.mean()),
        stderr_log_lambda=_se(logs),
        quantiles={"q01": float(q[0]), "q50": float(q[1]), "q99": float(q[2])},
        bound_violations={
            "lower": sum(1 for r in good if not r.lower_ok),
            "upper": sum(1 for r in good if not r.upper_ok),
            "positivity": sum(1 for r in good if not r.positive_ok),
        },
        wall_time=wall_time,
    )


def run(config: ReplicaConfig, workers: int | None = None) -> McReport:
    t0 = time.perf_counter()
    rows = run_replicas(config, workers)
    return aggregate(config, rows, time.perf_counter() - t0)


def _study_row(arg: tuple[ReplicaConfig, tuple[int, ...], int]) -> list[float]:
    config, levels, i = arg
    seed = derive_seed(config.master_seed, i)
    grid = brownian.sample(levels[0], config.alphabet, seed)
    logs = []
    for target in levels:
        while grid.level < target:
            grid = brownian.refine(grid)
        L = TransferOperator(build_potential(grid, config.beta))
        res = power_iterate(L, config.tol, config.max_iters)
        logs.append(res.log_eigenvalue)
    return logs


def refinement_study(config: ReplicaConfig, levels,
                     workers: int | None = None) -> dict:
    """Coupled-path depth study: each replica's single Brownian path is
    refined through the given levels and the eigenvalue recomputed; the
    mean absolute drift of log lambda per adjacent level pair must shrink
    as depth grows."""
    levels = tuple(int(l) for l in levels)
    if list(levels) != sorted(set(levels)):
        raise ValueError("levels must be strictly ascending")
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    workers = resolve_workers(workers)
    args = [(config, levels, i) for i in range(config.replicas)]
    if workers == 1:
        table = [_study_row(a) for a in args]
    else:
        with get_context("fork").Pool(workers) as pool:
            table = pool.map(_study_row, args)
    logs = np.array(table)  # replicas x levels
    drifts = np.mean(np.abs(np.diff(logs, axis=1)), axis=0)
    return {
        "levels": list(levels),
        "pairs": [f"{a}->{b}" for a, b in zip(levels, levels[1:])],
        "mean_abs_drift": [float(d) for d in drifts],
        "decreasing": bool(np.all(np.diff(drifts) < 0)),
    }


def tightened_upper_check(config: ReplicaConfig, workers: int | None = None,
                          rows: list[ReplicaRow] | None = None) -> dict:
    """Expectation bounds on mean lambda: the a priori band upper
    2m e^(1/2), and the sharper empirical mean_lambda <= m * mean(e^M1)
    + 3 stderr. Precomputed rows may be passed to reuse a run."""
    if rows is None:
        rows = run_replicas(config, workers)
    good = [r for r in rows if r.converged]
    if not good:
        raise RuntimeError("all replicas failed to converge")
    lams = np.array([r.eigenvalue for r in good])
    exp_m1 = np.exp(np.array([r.m1 for r in good]))
    n = lams.size
    mean_lambda = float(lams.mean())
    stderr = float(lams.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    m = config.alphabet.m
    band_upper = 2 * m * math.exp(0.5)
    tightened = m * float(exp_m1.mean()) + 3 * stderr
    return {
        "mean_lambda": mean_lambda,
        "stderr_lambda": stderr,
        "band_upper": band_upper,
        "band_bound_ok": bool(mean_lambda <= band_upper),
        "mean_exp_m1": float(exp_m1.mean()),
        "tightened_upper": tightened,
        "tightened_bound_ok": bool(mean_lambda <= tightened),
    }
