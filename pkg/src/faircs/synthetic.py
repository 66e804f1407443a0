"""Random two-group social graphs with a controllable initial disparity."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .cascade import fairness_report, spread_mip
from .graph import Graph, NetworkInstance


@dataclass(frozen=True)
class SyntheticParams:
    n: int
    minority: float = 0.4
    edges_per_node: int = 3
    n_sources: int = 3
    homophily: float = 0.8
    p: float = 0.5
    k: int = 3
    directed: bool = False
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def synthetic_instance(params: SyntheticParams) -> NetworkInstance:
    """Grow a graph node by node; each newcomer links to ``edges_per_node`` earlier nodes,
    picking its own group with probability ``homophily``.  Content nodes come from group 0."""
    rng = np.random.default_rng([params.seed, params.n])
    n = params.n
    groups = (rng.random(n) < params.minority).astype(np.int64)
    groups[0], groups[1] = 0, 1
    edges = set()
    members = {0: [0], 1: [1]}
    edges.add((0, 1))
    for v in range(2, n):
        g = int(groups[v])
        want = min(params.edges_per_node, v)
        picked = set()
        while len(picked) < want:
            side = g if rng.random() < params.homophily else 1 - g
            pool = members[side] if members[side] else members[1 - side]
            picked.add(pool[rng.integers(len(pool))])
        for u in picked:
            edges.add((u, v))
        members[g].append(v)
    pool = np.flatnonzero(groups == 0)
    sources = rng.choice(pool, size=min(params.n_sources, len(pool)), replace=False)
    graph = Graph(n, sorted(edges), directed=params.directed)
    return NetworkInstance(graph, groups, frozenset(int(s) for s in sources), params.p, params.k)


def initial_disparity(instance: NetworkInstance) -> float:
    return fairness_report(instance, spread_mip(instance, [])).disparity


def instance_with_disparity(
    n: int,
    window: tuple[float, float] = (0.30, 0.35),
    seed: int = 0,
    max_attempts: int = 400,
    **kwargs,
) -> tuple[NetworkInstance, SyntheticParams, float]:
    """Resample (bisecting on homophily) until the initial MIP disparity lands in ``window``."""
    lo, hi = window
    h_lo, h_hi = 0.5, 1.0
    for attempt in range(max_attempts):
        h = 0.5 * (h_lo + h_hi)
        params = SyntheticParams(n=n, homophily=h, seed=seed * 100_003 + attempt, **kwargs)
        inst = synthetic_instance(params)
        disp = initial_disparity(inst)
        if lo <= disp <= hi:
            return inst, params, disp
        if disp < lo:
            h_lo = h
        else:
            h_hi = h
        if h_hi - h_lo < 0.02:
            h_lo, h_hi = max(0.5, h - 0.1), min(1.0, h + 0.1)
    raise RuntimeError(f"no instance with initial disparity in {window} after {max_attempts} attempts")
