"""Top-level solvers: single-pass LP rounding, the iterative variant, the
forest-fire scaled variant, and exhaustive search for small instances."""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .cascade import (
    MIP,
    Evaluator,
    disparity_of,
    fairness_report,
    lift_pct,
    spread_from_distances,
    spread_mip,
)
from .graph import CandidateEdge, NetworkInstance, candidate_distance_index
from .lp import LpStatus, build_lp, solve_lp
from .rounding import RoundingConfig, SuggestionResult, round_select

log = logging.getLogger(__name__)

BRUTE_FORCE_CAP = 2**20


class InstanceTooLarge(ValueError):
    pass


def iteration_seed(seed: int, t: int) -> int:
    """Seed for the t-th LP/round pass; pass 0 reuses ``seed`` itself."""
    if t == 0:
        return seed
    return int(np.random.SeedSequence([seed, t]).generate_state(1)[0])


def _budget_array(instance: NetworkInstance, budgets) -> np.ndarray:
    if budgets is None:
        return np.full(instance.n, instance.k, dtype=np.int64)
    return np.asarray(budgets, dtype=np.int64).copy()


def _solve_and_round(
    instance: NetworkInstance,
    candidates: Sequence[CandidateEdge],
    budgets,
    rounding: RoundingConfig,
    soft_tau: float | None,
    algorithm: str,
) -> tuple[SuggestionResult, dict[int, float]]:
    """One index -> LP -> rounding pass.  Returns the result and y* keyed by edge index."""
    index = candidate_distance_index(instance.graph, instance.sources, candidates)
    model = build_lp(instance, index, budgets, soft_tau=soft_tau)
    sol = solve_lp(model)
    if sol.status is not LpStatus.OPTIMAL:
        ev = Evaluator(instance, index, rounding.eval_model, rounding.seed)
        disp, total, avgs = ev.score(np.zeros(0, dtype=np.int64))
        res = SuggestionResult((), disp, total, 0.0, algorithm, rounding.seed, 0, status=sol.status.value,
                               group_avgs=tuple(avgs))
        return res, {}
    res = round_select(sol.y_star, instance, index, rounding, algorithm)
    res.details.update(lp_objective=sol.objective, lp_vars=model.n_vars,
                       lp_rows=model.A_ub.shape[0] + model.A_eq.shape[0])
    y = {e.index: float(sol.y_star[j]) for j, e in enumerate(index.candidates)}
    return res, y


def lp_approx(
    instance: NetworkInstance,
    candidates: Sequence[CandidateEdge],
    budgets=None,
    *,
    rounding: RoundingConfig | None = None,
    soft_tau: float | None = None,
) -> SuggestionResult:
    """Solve the relaxation once and round it; metrics use ``rounding.eval_model`` (RMPP by default)."""
    rounding = rounding or RoundingConfig()
    res, _ = _solve_and_round(instance, candidates, _budget_array(instance, budgets), rounding, soft_tau,
                              "lp-approx")
    return res


def enforce_budgets(
    instance: NetworkInstance, chosen: Sequence[CandidateEdge], y: dict[int, float], budgets: np.ndarray
) -> list[CandidateEdge]:
    """Keep chosen edges in descending y* order while every budget node has room; drop the rest."""
    left = budgets.copy()
    kept = []
    for e in sorted(chosen, key=lambda e: (-y.get(e.index, 0.0), e.index)):
        nodes = instance.budget_nodes(e)
        if all(left[v] > 0 for v in nodes):
            for v in nodes:
                left[v] -= 1
            kept.append(e)
    return sorted(kept, key=lambda e: e.index)


def _final_result(
    instance: NetworkInstance, chosen: list[CandidateEdge], algorithm: str, seed: int, rounds: int, **details
) -> SuggestionResult:
    base = spread_mip(instance, [])
    rep = fairness_report(instance, spread_mip(instance, chosen), skip_empty=True)
    base_total = float(base.sum())
    return SuggestionResult(
        chosen=tuple(sorted(chosen, key=lambda e: e.index)),
        disparity=rep.disparity,
        total_spread=rep.total_spread,
        lift_pct=lift_pct(rep.total_spread, base_total) if base_total > 0 else float("nan"),
        algorithm=algorithm,
        seed=seed,
        rounds_evaluated=rounds,
        group_avgs=rep.group_avgs,
        details=details,
    )


def lp_advanced(
    instance: NetworkInstance,
    candidates: Sequence[CandidateEdge],
    k: int | None = None,
    *,
    rounding: RoundingConfig | None = None,
    cutoff_ratio: float = 0.05,
    soft_tau: float | None = None,
) -> SuggestionResult:
    """Repeat LP + MIP-scored rounding, folding accepted edges into the graph.

    Budgets shrink after each pass and candidates touching an exhausted
    budget are dropped.  Stops when a pass picks nothing or fewer than
    ``cutoff_ratio`` of the original candidates remain.
    """
    if not 0 <= cutoff_ratio < 1:
        raise ValueError("cutoff_ratio must lie in [0, 1)")
    rounding = rounding or RoundingConfig(eval_model=MIP)
    k = instance.k if k is None else k
    budgets = np.full(instance.n, k, dtype=np.int64)
    remaining = [e for e in candidates if all(budgets[v] > 0 for v in instance.budget_nodes(e))]
    graph = instance.graph
    sol: list[CandidateEdge] = []
    rounds = passes = 0
    status = "optimal"
    while remaining:
        cfg = replace(rounding, seed=iteration_seed(rounding.seed, passes))
        res, y = _solve_and_round(instance.with_graph(graph), remaining, budgets, cfg, soft_tau, "lp-advanced")
        passes += 1
        rounds += res.rounds_evaluated
        if not res.feasible:
            if not sol:
                status = res.status
            break
        picked = enforce_budgets(instance, res.chosen, y, budgets)
        if not picked:
            break
        sol.extend(picked)
        graph = graph.with_edges(e.pair() for e in picked)
        for e in picked:
            for v in instance.budget_nodes(e):
                budgets[v] -= 1
        taken = {e.index for e in picked}
        remaining = [
            e for e in remaining
            if e.index not in taken and all(budgets[v] > 0 for v in instance.budget_nodes(e))
        ]
        if len(remaining) < cutoff_ratio * len(candidates):
            break
    res = _final_result(instance, sol, "lp-advanced", rounding.seed, rounds, passes=passes)
    res.status = status
    return res


@dataclass
class ForestFireState:
    """Growing forest-fire sample.  ``burned`` keeps ignition order and only grows."""

    burned: list[int]
    p_forward: float = 0.4
    seed: int = 0
    frontier: deque = field(default_factory=deque)
    _burned_set: set = field(default_factory=set, repr=False)
    _rng: np.random.Generator | None = field(default=None, repr=False)

    @classmethod
    def start(cls, sources, p_forward: float = 0.4, seed: int = 0) -> "ForestFireState":
        if not 0 <= p_forward < 1:
            raise ValueError("p_forward must lie in [0, 1)")
        burned = sorted(set(sources))
        return cls(burned, p_forward, seed, deque(burned), set(burned), np.random.default_rng(seed))


def forest_fire_expand(graph, state: ForestFireState, target_total: int) -> ForestFireState:
    """Burn outward until ``min(target_total, n)`` nodes are burned (mutates and returns ``state``).

    Each burning node ignites a geometric number (mean p/(1-p)) of its
    unburned neighbours, breadth-first.  When the fire dies, it restarts at a
    uniformly random burned node that still has unburned neighbours, or at a
    random unburned node once the burned region is closed.
    """
    target = min(target_total, graph.n)
    burned, seen, rng = state.burned, state._burned_set, state._rng
    adj = graph.adj

    def ignite(w: int):
        seen.add(w)
        burned.append(w)
        state.frontier.append(w)

    while len(burned) < target:
        if not state.frontier:
            restart = _random_open_node(burned, seen, adj, rng)
            if restart is None:
                rest = [v for v in range(graph.n) if v not in seen]
                ignite(rest[rng.integers(len(rest))])
            else:
                state.frontier.append(restart)
            continue
        node = state.frontier.popleft()
        fresh = [w for w in adj[node] if w not in seen]
        if not fresh:
            continue
        count = min(int(rng.geometric(1.0 - state.p_forward)) - 1, len(fresh))
        for w in rng.permutation(fresh)[:count]:
            if len(burned) >= target:
                break
            ignite(int(w))
    return state


def _random_open_node(burned, seen, adj, rng, tries: int = 64):
    """Uniform burned node with an unburned neighbour (rejection sampling, exact scan as fallback)."""
    for _ in range(tries):
        b = burned[rng.integers(len(burned))]
        if any(w not in seen for w in adj[b]):
            return b
    open_nodes = [b for b in burned if any(w not in seen for w in adj[b])]
    return open_nodes[rng.integers(len(open_nodes))] if open_nodes else None


@dataclass(frozen=True)
class ScaleConfig:
    npi: int = 400
    rounding: RoundingConfig = field(default_factory=lambda: RoundingConfig(eval_model=MIP))
    cutoff_ratio: float = 0.05
    p_forward: float = 0.4

    def __post_init__(self):
        if self.npi < 1:
            raise ValueError("npi must be >= 1")
        if not 0 <= self.cutoff_ratio < 1:
            raise ValueError("cutoff_ratio must lie in [0, 1)")


def lp_scale(
    instance: NetworkInstance,
    candidates: Sequence[CandidateEdge],
    k: int | None = None,
    config: ScaleConfig | None = None,
    *,
    soft_tau: float | None = None,
) -> SuggestionResult:
    """Solve growing forest-fire samples, each candidate edge at most once.

    Every pass grows the sample by ``npi`` nodes, takes the unprocessed
    candidates inside it, and solves the induced sub-instance (with edges
    accepted so far).  A last pass over the full graph handles what the
    samples left behind.
    """
    config = config or ScaleConfig()
    k = instance.k if k is None else k
    n = instance.n
    seed = config.rounding.seed
    budgets = np.full(n, k, dtype=np.int64)
    state = ForestFireState.start(instance.sources, config.p_forward, seed)
    excluded: set[int] = set()
    sol: list[CandidateEdge] = []
    graph = instance.graph
    passes = rounds = processed = 0
    skipped = []
    while True:
        forest_fire_expand(instance.graph, state, len(state.burned) + config.npi)
        full = len(state.burned) >= n
        nodes = list(range(n)) if full else list(state.burned)
        sub, local = instance.with_graph(graph).induced(nodes)
        batch = [e for e in candidates if e.index not in excluded and e.u in local and e.v in local]
        excluded.update(e.index for e in batch)
        processed += len(batch)
        batch = [e for e in batch if all(budgets[v] > 0 for v in instance.budget_nodes(e))]
        if batch:
            cfg = replace(config.rounding, seed=iteration_seed(seed, passes))
            local_batch = [CandidateEdge(local[e.u], local[e.v], e.index) for e in batch]
            local_budgets = budgets[nodes]
            res, y = _solve_and_round(sub, local_batch, local_budgets, cfg, soft_tau, "lp-scale")
            rounds += res.rounds_evaluated
            if not res.feasible:
                log.warning("lp-scale pass %d: sub-problem %s on %d nodes, skipped", passes, res.status, len(nodes))
                skipped.append(passes)
            else:
                picked_local = enforce_budgets(sub, res.chosen, y, local_budgets)
                by_index = {e.index: e for e in batch}
                picked = [by_index[e.index] for e in picked_local]
                sol.extend(picked)
                graph = graph.with_edges(e.pair() for e in picked)
                for e in picked:
                    for v in instance.budget_nodes(e):
                        budgets[v] -= 1
        passes += 1
        if full:
            break
    return _final_result(instance, sol, "lp-scale", seed, rounds, passes=passes,
                         candidates_processed=processed, skipped_passes=skipped)


def brute_force(
    instance: NetworkInstance,
    candidates: Sequence[CandidateEdge],
    k: int | None = None,
    cap: int = BRUTE_FORCE_CAP,
) -> SuggestionResult:
    """Exhaustive search over budget-feasible candidate subsets under RMPP.

    Returns the widest-spread subset among those with minimum disparity
    (within 1e-9).  ``details`` also carries the unconstrained best spread.
    """
    k = instance.k if k is None else k
    index = candidate_distance_index(instance.graph, instance.sources, candidates)
    m = len(candidates)
    p, sources = instance.p, instance.sources
    mask = np.ones(instance.n, dtype=bool)
    mask[list(sources)] = False
    groups = instance.groups[mask]
    sizes = np.bincount(groups, minlength=instance.num_groups).astype(np.float64)
    present = sizes > 0
    budget_nodes = [instance.budget_nodes(e) for e in candidates]
    ptr = index.entry_ptr

    best_fair = None  # (disparity, -spread, order, subset, avgs)
    best_any = None  # (-spread, order, subset)
    count = 0
    left = np.full(instance.n, k, dtype=np.int64)
    chosen: list[int] = []

    def visit(d: np.ndarray):
        nonlocal best_fair, best_any, count
        count += 1
        if count > cap:
            raise InstanceTooLarge("instance too large for brute force")
        f = spread_from_distances(d, p, sources)[mask]
        avgs = np.bincount(groups, weights=f, minlength=len(sizes))[present] / sizes[present]
        disp, total = disparity_of(avgs), float(f.sum())
        subset = tuple(chosen)
        if best_any is None or total > -best_any[0]:
            best_any = (-total, count, subset)
        if best_fair is None or disp < best_fair[0] - 1e-9 or (
            abs(disp - best_fair[0]) <= 1e-9 and total > -best_fair[1]
        ) or (disp == best_fair[0] == math.inf and total > -best_fair[1]):
            best_fair = (disp, -total, count, subset, avgs)

    def dfs(j: int, d: np.ndarray):
        if j == m:
            visit(d)
            return
        dfs(j + 1, d)
        nodes = budget_nodes[j]
        if all(left[v] > 0 for v in nodes):
            for v in nodes:
                left[v] -= 1
            chosen.append(j)
            d2 = d.copy()
            sl = slice(ptr[j], ptr[j + 1])
            np.minimum.at(d2, index.entry_node[sl], index.entry_dist[sl])
            dfs(j + 1, d2)
            chosen.pop()
            for v in nodes:
                left[v] += 1

    base = np.asarray(index.baseline, dtype=np.float64)
    dfs(0, base)
    base_total = float(spread_from_distances(base, p, sources)[mask].sum())
    disp, neg_total, _, subset, avgs = best_fair
    try:
        lift = lift_pct(-neg_total, base_total)
    except ValueError:
        lift = float("nan")
    return SuggestionResult(
        chosen=tuple(candidates[j] for j in subset),
        disparity=disp,
        total_spread=-neg_total,
        lift_pct=lift,
        algorithm="brute-force",
        seed=0,
        rounds_evaluated=count,
        group_avgs=tuple(float(a) for a in avgs),
        details={
            "subsets_evaluated": count,
            "unconstrained_spread": -best_any[0],
            "unconstrained_chosen": [candidates[j].index for j in best_any[2]],
        },
    )
