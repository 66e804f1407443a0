"""Experiment orchestration: run trials of a solver and serialize the results."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
import statistics
import sys
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any

import numpy as np
import scipy

from .algorithms import ScaleConfig, brute_force, lp_advanced, lp_approx, lp_scale
from .candidates import CandidateSpec, generate_candidates
from .cascade import MIP, CascadeKind, CascadeModel, Evaluator
from .graph import CandidateEdge, NetworkInstance, candidate_distance_index
from .rounding import RoundingConfig, SuggestionResult

log = logging.getLogger(__name__)

ALGORITHMS = ("lp-approx", "lp-advanced", "lp-scale", "brute-force")
SIG_DIGITS = 6


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "lp-advanced"
    candidates: CandidateSpec = field(default_factory=CandidateSpec)
    cascade: CascadeModel = MIP
    k: int = 3
    p: float = 0.5
    iter_m: int = 200
    eps_tol: float = 0.01
    npi: int = 400
    cutoff_ratio: float = 0.05
    seed: int = 0
    soft_tau: float | None = None  # None = hard parity
    trials: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if self.iter_m < 1:
            raise ValueError("iter_m must be >= 1")
        if self.eps_tol < 0:
            raise ValueError("eps_tol must be >= 0")
        if self.npi < 1:
            raise ValueError("npi must be >= 1")
        if not 0.0 <= self.cutoff_ratio < 1.0:
            raise ValueError("cutoff_ratio must lie in [0, 1)")
        if self.soft_tau is not None and not self.soft_tau >= 0:
            raise ValueError("soft fairness tolerance must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def fairness_mode(self) -> str:
        return "hard" if self.soft_tau is None else f"soft({self.soft_tau:g})"

    def as_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "candidates": self.candidates.method.value,
            "max_candidates_per_node": self.candidates.max_per_node,
            "cascade": self.cascade.kind.value,
            "ic_samples": self.cascade.ic_samples if self.cascade.kind is CascadeKind.IC else None,
            "k": self.k,
            "p": self.p,
            "iter_m": self.iter_m,
            "eps_tol": self.eps_tol,
            "npi": self.npi,
            "cutoff_ratio": self.cutoff_ratio,
            "seed": self.seed,
            "fairness_mode": self.fairness_mode,
            "trials": self.trials,
        }


@dataclass
class TrialRecord:
    trial: int
    seed: int
    result: SuggestionResult | None
    runtime_s: float
    lift_pct: float = math.nan
    disparity: float = math.nan  # raw ratio under the report's cascade model
    total_spread: float = math.nan
    group_avgs: tuple[float, ...] = ()
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return self.result.status


@dataclass
class RunReport:
    config: RunConfig
    trials: list[TrialRecord]
    initial_disparity: float
    baseline_spread: float
    n_nodes: int
    n_edges: int
    n_candidates: int
    environment: dict[str, Any]
    node_ids: tuple[str, ...] | None = None
    group_ids: tuple[str, ...] | None = None
    generator: dict[str, Any] | None = None

    def _ok(self) -> list[TrialRecord]:
        return [t for t in self.trials if t.error is None]

    def aggregate(self) -> dict[str, dict[str, float]]:
        """Mean and sample stdev of lift, disparity (percent) and runtime over successful trials."""
        ok = self._ok()
        cols = {
            "lift_pct": [t.lift_pct for t in ok],
            "disparity_pct": [100.0 * t.disparity for t in ok],
            "runtime_s": [t.runtime_s for t in ok],
        }
        out = {}
        for name, xs in cols.items():
            mean = statistics.fmean(xs) if xs else math.nan
            sd = statistics.stdev(xs) if len(xs) > 1 else 0.0 if xs else math.nan
            out[name] = {"mean": mean, "stdev": sd}
        return out

    @property
    def any_infeasible(self) -> bool:
        return any(t.error is None and t.result.status == "infeasible" for t in self.trials)


def environment_stamp() -> dict[str, Any]:
    try:
        from importlib.metadata import version

        pkg = version("artifact")
    except Exception:
        pkg = "unknown"
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "package": pkg,
    }


def _solve(config: RunConfig, instance: NetworkInstance, candidates: list[CandidateEdge], seed: int):
    a = config.algorithm
    if a == "lp-approx":
        rc = RoundingConfig(config.iter_m, config.eps_tol, seed=seed)
        return lp_approx(instance, candidates, rounding=rc, soft_tau=config.soft_tau)
    if a == "lp-advanced":
        rc = RoundingConfig(config.iter_m, config.eps_tol, MIP, seed)
        return lp_advanced(instance, candidates, rounding=rc, cutoff_ratio=config.cutoff_ratio,
                           soft_tau=config.soft_tau)
    if a == "lp-scale":
        rc = RoundingConfig(config.iter_m, config.eps_tol, MIP, seed)
        sc = ScaleConfig(npi=config.npi, rounding=rc, cutoff_ratio=config.cutoff_ratio)
        return lp_scale(instance, candidates, config=sc, soft_tau=config.soft_tau)
    res = brute_force(instance, candidates)
    res.seed = seed
    return res


def run(
    config: RunConfig,
    instance: NetworkInstance,
    candidates: list[CandidateEdge] | None = None,
    generator: dict[str, Any] | None = None,
) -> RunReport:
    """Run ``config.trials`` trials with seeds ``seed + t`` and score each under ``config.cascade``.

    ``instance.k`` and ``instance.p`` are overridden by the config.  A failing
    trial is recorded with its error; if every trial fails the last error is raised.
    """
    instance = replace(instance, k=config.k, p=config.p)
    if candidates is None:
        candidates = generate_candidates(instance.graph, config.candidates)
    index = candidate_distance_index(instance.graph, instance.sources, candidates)
    base_ev = Evaluator(instance, index, config.cascade, seed=config.seed)
    init_disp, base_total, _ = base_ev.score(np.zeros(0, dtype=np.int64))

    records = []
    last_exc = None
    for t in range(config.trials):
        seed = config.seed + t
        t0 = time.perf_counter()
        try:
            res = _solve(config, instance, candidates, seed)
        except Exception as exc:  # recorded, not fatal
            log.error("trial %d (seed %d) failed: %s", t, seed, exc)
            last_exc = exc
            records.append(TrialRecord(t, seed, None, time.perf_counter() - t0, error=f"{type(exc).__name__}: {exc}"))
            continue
        runtime = time.perf_counter() - t0
        ev = Evaluator(instance, index, config.cascade, seed=seed)
        empty = np.zeros(0, dtype=np.int64)
        _, trial_base, _ = ev.score(empty)
        disp, total, avgs = ev.score(index.positions(res.chosen))
        lift = 100.0 * (total - trial_base) / trial_base if trial_base > 0 else math.nan
        records.append(TrialRecord(t, seed, res, runtime, lift, disp, total, tuple(float(a) for a in avgs)))
    if all(r.error is not None for r in records):
        raise last_exc

    return RunReport(
        config=config,
        trials=records,
        initial_disparity=init_disp,
        baseline_spread=base_total,
        n_nodes=instance.n,
        n_edges=instance.graph.edge_count,
        n_candidates=len(candidates),
        environment=environment_stamp(),
        node_ids=instance.labels,
        group_ids=instance.group_labels,
        generator=generator,
    )


def _num(x):
    """Six significant digits; non-finite values become strings so JSON stays strict."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def _labelled_edges(report: RunReport, res: SuggestionResult) -> list[list[str]]:
    ids = report.node_ids
    if ids is None:
        return [[e.u, e.v] for e in res.chosen]
    return [[ids[e.u], ids[e.v]] for e in res.chosen]


def report_payload(report: RunReport, *, include_environment: bool = True) -> dict[str, Any]:
    trials = []
    for t in report.trials:
        row = {
            "trial": t.trial,
            "seed": t.seed,
            "status": t.status,
            "lift_pct": _num(t.lift_pct),
            "disparity_pct": _num(100.0 * t.disparity),
            "total_spread": _num(t.total_spread),
            "group_averages": [_num(a) for a in t.group_avgs],
            "runtime_s": _num(t.runtime_s),
        }
        if t.error is not None:
            row["error"] = t.error
        else:
            res = t.result
            row["solver_disparity_pct"] = _num(100.0 * res.disparity)
            row["solver_lift_pct"] = _num(res.lift_pct)
            row["rounds_evaluated"] = res.rounds_evaluated
            row["n_chosen"] = len(res.chosen)
            row["chosen"] = _labelled_edges(report, res)
        trials.append(row)
    agg = {k: {s: _num(v) for s, v in d.items()} for k, d in report.aggregate().items()}
    payload = {
        "config": report.config.as_dict(),
        "instance": {
            "nodes": report.n_nodes,
            "edges": report.n_edges,
            "candidates": report.n_candidates,
            "initial_disparity_pct": _num(100.0 * report.initial_disparity),
            "baseline_spread": _num(report.baseline_spread),
            "node_ids": list(report.node_ids) if report.node_ids is not None else None,
            "group_ids": list(report.group_ids) if report.group_ids is not None else None,
            "generator": report.generator,
        },
        "aggregate": agg,
        "trials": trials,
    }
    if include_environment:
        payload["environment"] = report.environment
    return payload


CSV_FIELDS = ("trial", "seed", "status", "n_chosen", "lift_pct", "disparity_pct", "total_spread", "runtime_s",
              "lift_pct_stdev", "disparity_pct_stdev", "runtime_s_stdev", "error")


def emit(report: RunReport, fmt: str = "json") -> str:
    """Serialize a report.  Disparity is in percent.  CSV has one row per trial plus an aggregate row."""
    if fmt == "json":
        return json.dumps(report_payload(report), indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for t in report.trials:
        w.writerow({
            "trial": t.trial,
            "seed": t.seed,
            "status": t.status,
            "n_chosen": len(t.result.chosen) if t.result is not None else "",
            "lift_pct": _num(t.lift_pct),
            "disparity_pct": _num(100.0 * t.disparity),
            "total_spread": _num(t.total_spread),
            "runtime_s": _num(t.runtime_s),
            "error": t.error or "",
        })
    agg = report.aggregate()
    ok = [t for t in report.trials if t.error is None]
    w.writerow({
        "trial": "aggregate",
        "seed": report.config.seed,
        "status": f"{len(ok)}/{len(report.trials)} ok",
        "n_chosen": _num(statistics.fmean(len(t.result.chosen) for t in ok)),
        "lift_pct": _num(agg["lift_pct"]["mean"]),
        "disparity_pct": _num(agg["disparity_pct"]["mean"]),
        "total_spread": _num(statistics.fmean(t.total_spread for t in ok)),
        "runtime_s": _num(agg["runtime_s"]["mean"]),
        "lift_pct_stdev": _num(agg["lift_pct"]["stdev"]),
        "disparity_pct_stdev": _num(agg["disparity_pct"]["stdev"]),
        "runtime_s_stdev": _num(agg["runtime_s"]["stdev"]),
        "error": "",
    })
    return buf.getvalue()
