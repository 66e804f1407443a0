"""Randomized rounding of fractional edge weights and best-of-many selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .cascade import RMPP, CascadeModel, Evaluator, lift_pct
from .graph import INF, CandidateDistanceIndex, CandidateEdge, NetworkInstance


@dataclass(frozen=True)
class RoundingConfig:
    iter_m: int = 200
    eps_tol: float = 0.01
    eval_model: CascadeModel = RMPP
    seed: int = 0

    def __post_init__(self):
        if self.iter_m < 1:
            raise ValueError("iter_m must be >= 1")
        if self.eps_tol < 0:
            raise ValueError("eps_tol must be >= 0")


@dataclass
class SuggestionResult:
    chosen: tuple[CandidateEdge, ...]
    disparity: float
    total_spread: float
    lift_pct: float
    algorithm: str
    seed: int
    rounds_evaluated: int
    status: str = "optimal"
    group_avgs: tuple[float, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(e.u, e.v) for e in self.chosen]


def round_once(y_star: Sequence[float], seed) -> np.ndarray:
    """Positions j with ``u_j < y*_j``; ``u`` is the uniform stream seeded by ``seed``."""
    y = np.asarray(y_star, dtype=np.float64)
    u = np.random.default_rng(seed).random(y.shape[0])
    return np.flatnonzero(u < y)


def round_select(
    y_star: Sequence[float],
    instance: NetworkInstance,
    index: CandidateDistanceIndex,
    config: RoundingConfig,
    algorithm: str = "round",
) -> SuggestionResult:
    """Round ``iter_m`` times and keep the widest-spread selection among the fairest.

    Rounding i draws from the stream ``(seed, i)``.  Selections whose disparity
    is within ``eps_tol`` of the minimum observed are eligible; among those the
    largest total spread wins, then smaller disparity, then earlier i.
    """
    if config.iter_m < 1:
        raise ValueError("iter_m must be >= 1")
    y = np.clip(np.asarray(y_star, dtype=np.float64), 0.0, 1.0)
    ev = Evaluator(instance, index, config.eval_model, seed=config.seed)

    rounds = []
    cache: dict[bytes, tuple[float, float, np.ndarray]] = {}
    for i in range(config.iter_m):
        sel = round_once(y, [config.seed, i])
        key = sel.tobytes()
        if key not in cache:
            cache[key] = ev.score(sel)
        disp, total, avgs = cache[key]
        rounds.append((disp, total, i, sel, avgs))

    best_disp = min(r[0] for r in rounds)
    if best_disp == INF:
        eligible = rounds
    else:
        eligible = [r for r in rounds if r[0] - best_disp <= config.eps_tol]
    disp, total, i, sel, avgs = min(eligible, key=lambda r: (-r[1], r[0], r[2]))

    _, base_total, _ = ev.score(np.zeros(0, dtype=np.int64))
    try:
        lift = lift_pct(total, base_total)
    except ValueError:
        lift = float("nan")
    return SuggestionResult(
        chosen=tuple(index.candidates[j] for j in sel),
        disparity=disp,
        total_spread=total,
        lift_pct=lift,
        algorithm=algorithm,
        seed=config.seed,
        rounds_evaluated=config.iter_m,
        group_avgs=tuple(float(a) for a in avgs),
        details={"winning_round": i, "min_disparity": best_disp},
    )
