"""Candidate-edge generation: friend-of-friend, intersecting group count, explicit lists."""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass

from .graph import CandidateEdge, Graph, make_candidates


class CandidateMethod(str, enum.Enum):
    FOF = "fof"
    IGC = "igc"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class CandidateSpec:
    method: CandidateMethod = CandidateMethod.FOF
    max_per_node: int | None = None
    path: str | None = None  # edge-list file for EXPLICIT

    def __post_init__(self):
        object.__setattr__(self, "method", CandidateMethod(self.method))
        if self.method is CandidateMethod.EXPLICIT and not self.path:
            raise ValueError("explicit candidates need an edge-list file")


def _canonical(graph: Graph, u: int, w: int) -> tuple[int, int]:
    return (u, w) if graph.directed or u < w else (w, u)


def fof_candidates(graph: Graph) -> list[CandidateEdge]:
    """Pairs two hops apart that are not yet connected, sorted lexicographically.

    Directed graphs follow out-edges only (u -> a -> w gives candidate u -> w).
    """
    pairs = set()
    adj = graph.adj
    for u in range(graph.n):
        for a in adj[u]:
            for w in adj[a]:
                if w != u and not graph.has_edge(u, w):
                    pairs.add(_canonical(graph, u, w))
    return make_candidates(sorted(pairs))


def _group_owners(graph: Graph) -> list[tuple[int, ...]]:
    """For each node x, the nodes u whose closed neighbourhood N[u] contains x."""
    owners: list[list[int]] = [[x] for x in range(graph.n)]
    for u in range(graph.n):
        for w in graph.adj[u]:
            owners[w].append(u)
    return [tuple(o) for o in owners]


def igc_ratings(graph: Graph, v: int, owners: list[tuple[int, ...]] | None = None) -> dict[int, int]:
    """Intersecting-group ratings of every non-friend of ``v``.

    Every node's closed neighbourhood is a group.  A node w scores one point
    per friend f of v that shares at least one group with w.
    """
    if owners is None:
        owners = _group_owners(graph)
    adj = graph.adj
    friends = set(adj[v])
    rated: dict[int, set[int]] = defaultdict(set)
    for f in friends:
        for u in owners[f]:
            for w in (u, *adj[u]):
                if w != v and w not in friends:
                    rated[w].add(f)
    return {w: len(fs) for w, fs in rated.items()}


def igc_candidates(graph: Graph) -> list[CandidateEdge]:
    """Top third (rounded up) of each node's rated non-friends; ties favour the lower id."""
    pairs = set()
    owners = _group_owners(graph)
    for v in range(graph.n):
        ratings = igc_ratings(graph, v, owners)
        if not ratings:
            continue
        ranked = sorted(ratings.items(), key=lambda kv: (-kv[1], kv[0]))
        for w, _ in ranked[: math.ceil(len(ranked) / 3)]:
            pairs.add(_canonical(graph, v, w))
    return make_candidates(sorted(pairs))


def cap_per_node(graph: Graph, candidates: list[CandidateEdge], max_per_node: int) -> list[CandidateEdge]:
    """Keep at most ``max_per_node`` candidates per tail node, in list order, then re-index."""
    count: dict[int, int] = defaultdict(int)
    kept = []
    for e in candidates:
        if count[e.u] < max_per_node:
            count[e.u] += 1
            kept.append((e.u, e.v))
    return make_candidates(kept)


def generate_candidates(graph: Graph, spec: CandidateSpec) -> list[CandidateEdge]:
    if spec.method is CandidateMethod.FOF:
        cands = fof_candidates(graph)
    elif spec.method is CandidateMethod.IGC:
        cands = igc_candidates(graph)
    else:
        raise ValueError("explicit candidates are read from file, see io.read_candidates")
    if spec.max_per_node is not None:
        cands = cap_per_node(graph, cands, spec.max_per_node)
    return cands
