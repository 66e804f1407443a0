"""Content-spread evaluation under RMPP, MIP and Monte-Carlo IC, plus fairness metrics.

A spread vector is a float array over all nodes.  Content nodes carry 0 so
that sums, group averages and lift run over non-source nodes only.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import (
    INF,
    CandidateDistanceIndex,
    CandidateEdge,
    NetworkInstance,
    apply_diff,
    edge_delta_multiple,
    multi_source_shortest_distances,
)

IC_CHUNK = 4096


class CascadeKind(str, enum.Enum):
    RMPP = "rmpp"
    MIP = "mip"
    IC = "ic"


@dataclass(frozen=True)
class CascadeModel:
    kind: CascadeKind = CascadeKind.RMPP
    ic_samples: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "kind", CascadeKind(self.kind))
        if self.kind is CascadeKind.IC and self.ic_samples < 1:
            raise ValueError("ic_samples must be >= 1")


RMPP = CascadeModel(CascadeKind.RMPP)
MIP = CascadeModel(CascadeKind.MIP)


@dataclass(frozen=True)
class FairnessReport:
    group_avgs: tuple[float, ...]
    disparity: float
    total_spread: float
    lift_pct: float | None = None

    @property
    def infinite_disparity(self) -> bool:
        return self.disparity == INF


def spread_from_distances(dist, p: float, sources: Iterable[int]) -> np.ndarray:
    d = np.asarray(dist, dtype=np.float64)
    finite = np.isfinite(d)
    out = np.zeros_like(d)
    out[finite] = p ** d[finite]
    out[list(sources)] = 0.0
    return out


def rmpp_distances(index: CandidateDistanceIndex, positions: Sequence[int]) -> np.ndarray:
    """Per node, the shortest distance using at most one of the chosen candidate edges."""
    d = np.asarray(index.baseline, dtype=np.float64)
    if len(positions):
        ptr = index.entry_ptr
        sel = np.concatenate([np.arange(ptr[j], ptr[j + 1]) for j in positions])
        if sel.size:
            np.minimum.at(d, index.entry_node[sel], index.entry_dist[sel])
    return d


def spread_rmpp(
    instance: NetworkInstance, index: CandidateDistanceIndex, chosen: Iterable[CandidateEdge]
) -> np.ndarray:
    d = rmpp_distances(index, index.positions(chosen))
    return spread_from_distances(d, instance.p, instance.sources)


def spread_mip(instance: NetworkInstance, chosen: Iterable[CandidateEdge | tuple[int, int]]) -> np.ndarray:
    """Best single-path probability in the graph augmented with ``chosen``: ``p ** hop distance``."""
    pairs = [(e.u, e.v) if isinstance(e, CandidateEdge) else tuple(e) for e in chosen]
    graph = instance.graph.with_edges(pairs) if pairs else instance.graph
    dist = multi_source_shortest_distances(graph, instance.sources)
    return spread_from_distances(dist, instance.p, instance.sources)


def spread_ic(
    instance: NetworkInstance,
    chosen: Iterable[CandidateEdge | tuple[int, int]],
    samples: int,
    seed: int,
) -> np.ndarray:
    """Monte-Carlo IC estimate via live-edge sampling.

    Each sample keeps every edge of ``E ∪ chosen`` independently with
    probability ``p`` and records which nodes the content nodes reach.
    Samples are drawn in fixed-size chunks, chunk ``c`` from the stream
    ``(seed, c)``, so the estimate does not depend on scheduling.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pairs = [(e.u, e.v) if isinstance(e, CandidateEdge) else tuple(e) for e in chosen]
    graph = instance.graph.with_edges(pairs) if pairs else instance.graph
    n, p = graph.n, instance.p
    edges = graph.edges()
    src = np.array([u for u, _ in edges], dtype=np.int64)
    dst = np.array([v for _, v in edges], dtype=np.int64)
    if not graph.directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    m = len(edges)
    sources = sorted(instance.sources)
    # column e of push adds into node dst[e]
    scatter = sp.csr_matrix(
        (np.ones(len(dst), dtype=np.float32), (np.arange(len(dst)), dst)), shape=(len(dst), n)
    )

    hits = np.zeros(n, dtype=np.int64)
    for c, start in enumerate(range(0, samples, IC_CHUNK)):
        size = min(IC_CHUNK, samples - start)
        rng = np.random.default_rng([seed, c])
        live = rng.random((size, m)) < p
        if not graph.directed:
            live = np.concatenate([live, live], axis=1)
        reached = np.zeros((size, n), dtype=bool)
        reached[:, sources] = True
        # label propagation to a fixed point; at most n-1 rounds
        for _ in range(max(n - 1, 1)):
            push = (reached[:, src] & live).astype(np.float32)
            new = reached | (np.asarray(push @ scatter) > 0)
            if np.array_equal(new, reached):
                break
            reached = new
        hits += reached.sum(axis=0)
    out = hits / samples
    out[sources] = 0.0
    return out


def group_sizes(instance: NetworkInstance) -> np.ndarray:
    mask = np.ones(instance.n, dtype=bool)
    mask[list(instance.sources)] = False
    return np.bincount(instance.groups[mask], minlength=instance.num_groups)


def disparity_of(avgs: Sequence[float]) -> float:
    """Largest ratio between group averages, minus one.

    All-zero averages count as equal (0); a zero next to a positive average is infinite.
    """
    avgs = np.asarray(avgs, dtype=np.float64)
    hi, lo = avgs.max(), avgs.min()
    if hi <= 0.0:
        return 0.0
    if lo <= 0.0:
        return INF
    return float(hi / lo - 1.0)


def fairness_report(
    instance: NetworkInstance,
    spread: np.ndarray,
    baseline_spread: np.ndarray | None = None,
    *,
    skip_empty: bool = False,
) -> FairnessReport:
    """Group averages over non-source nodes, disparity, total and (optionally) lift.

    A group with no non-source member is an error unless ``skip_empty``, in
    which case it is left out of the averages.
    """
    sizes = group_sizes(instance)
    empty = sizes == 0
    if empty.any() and not skip_empty:
        raise ValueError(f"groups {np.flatnonzero(empty).tolist()} have no non-source nodes")
    mask = np.ones(instance.n, dtype=bool)
    mask[list(instance.sources)] = False
    spread = np.asarray(spread, dtype=np.float64)
    sums = np.bincount(instance.groups[mask], weights=spread[mask], minlength=instance.num_groups)
    avgs = sums[~empty] / sizes[~empty]
    total = float(spread[mask].sum())
    lift = None
    if baseline_spread is not None:
        lift = lift_pct(total, float(np.asarray(baseline_spread, dtype=np.float64)[mask].sum()))
    return FairnessReport(tuple(float(a) for a in avgs), disparity_of(avgs), total, lift)


def lift_pct(total: float, baseline_total: float) -> float:
    """Percent increase of total spread over the baseline total (ratio of sums)."""
    if baseline_total <= 0.0:
        raise ValueError("lift undefined: baseline content spread is zero")
    return 100.0 * (total - baseline_total) / baseline_total


class Evaluator:
    """Fast repeated evaluation of edge selections on one instance.

    Used by the rounding loop; RMPP reads precomputed single-edge diffs from
    ``index``, MIP reruns the incremental diff over the whole selection.
    """

    def __init__(self, instance: NetworkInstance, index: CandidateDistanceIndex, model: CascadeModel = RMPP,
                 seed: int = 0):
        self.instance = instance
        self.index = index
        self.model = model
        self.seed = seed
        mask = np.ones(instance.n, dtype=bool)
        mask[list(instance.sources)] = False
        self._mask = mask
        self._groups = instance.groups[mask]
        self._sizes = np.bincount(self._groups, minlength=instance.num_groups).astype(np.float64)
        self._present = self._sizes > 0

    def spread(self, positions: Sequence[int]) -> np.ndarray:
        idx = self.index
        if self.model.kind is CascadeKind.RMPP:
            d = rmpp_distances(idx, positions)
            return spread_from_distances(d, self.instance.p, self.instance.sources)
        chosen = [idx.candidates[j] for j in positions]
        if self.model.kind is CascadeKind.MIP:
            diff = edge_delta_multiple(self.instance.graph, idx.baseline, chosen)
            return spread_from_distances(apply_diff(idx.baseline, diff), self.instance.p, self.instance.sources)
        return spread_ic(self.instance, chosen, self.model.ic_samples, self.seed)

    def score(self, positions: Sequence[int]) -> tuple[float, float, np.ndarray]:
        """``(disparity, total spread, group averages)`` of a selection.

        Groups without non-source nodes are left out of the disparity.
        """
        f = self.spread(positions)[self._mask]
        sums = np.bincount(self._groups, weights=f, minlength=len(self._sizes))
        avgs = sums[self._present] / self._sizes[self._present]
        return disparity_of(avgs), float(f.sum()), avgs
