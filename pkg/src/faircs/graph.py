"""Graph representation, content-source metadata and hop-distance maintenance.

Distances are unit-weight hop counts from the nearest content node.  All
containers here are immutable once built so they can be shared freely between
workers.  ``INF`` marks nodes that no content node reaches.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

INF = math.inf

DistanceMap = tuple  # tuple[int | float, ...], INF for unreachable nodes
DiffMap = dict  # dict[int, int]: node -> strictly improved distance


class Graph:
    """Adjacency-list graph over dense node ids ``0..n-1``.

    Undirected edges are stored in both adjacency lists.  Self-loops are
    rejected and duplicate edges are collapsed.
    """

    __slots__ = ("n", "directed", "adj", "_edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], directed: bool = False):
        self.n = int(n)
        self.directed = bool(directed)
        seen: set[tuple[int, int]] = set()
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) references a node outside 0..{self.n - 1}")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            key = (u, v) if directed or u < v else (v, u)
            if key in seen:
                continue
            seen.add(key)
            adj[u].append(v)
            if not directed:
                adj[v].append(u)
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(nbrs) for nbrs in adj)
        self._edges = frozenset(seen)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def edges(self) -> list[tuple[int, int]]:
        """Edges in canonical form, sorted (``u < v`` for undirected graphs)."""
        return sorted(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        if self.directed:
            return (u, v) in self._edges
        return ((u, v) if u < v else (v, u)) in self._edges

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adj[u]

    def with_edges(self, extra: Iterable[tuple[int, int]]) -> "Graph":
        return Graph(self.n, list(self._edges) + [tuple(e) for e in extra], self.directed)

    def induced(self, nodes: Sequence[int]) -> tuple["Graph", dict[int, int]]:
        """Subgraph on ``nodes`` relabelled to ``0..len(nodes)-1`` (in the given order)."""
        local = {v: i for i, v in enumerate(nodes)}
        edges = [(local[u], local[v]) for u, v in self._edges if u in local and v in local]
        return Graph(len(nodes), edges, self.directed), local

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.edge_count}, {kind})"


@dataclass(frozen=True)
class CandidateEdge:
    """A non-existing edge that may be suggested; ``index`` identifies it across runs."""

    u: int
    v: int
    index: int

    def pair(self) -> tuple[int, int]:
        return (self.u, self.v)


@dataclass(frozen=True)
class NetworkInstance:
    graph: Graph
    groups: np.ndarray  # int group label per node, dense in 0..c-1
    sources: frozenset[int]
    p: float = 0.5
    k: int = 1
    labels: tuple[str, ...] | None = None  # original node ids, by dense id
    group_labels: tuple[str, ...] | None = None  # original group names, by dense group id

    def __post_init__(self):
        groups = np.asarray(self.groups, dtype=np.int64)
        groups.setflags(write=False)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "sources", frozenset(int(s) for s in self.sources))
        n = self.graph.n
        if groups.shape != (n,):
            raise ValueError(f"expected {n} group labels, got {groups.shape[0]}")
        if not self.sources:
            raise ValueError("no content nodes")
        if any(not 0 <= s < n for s in self.sources):
            raise ValueError("content node outside the graph")
        if n and (groups.min() < 0 or set(np.unique(groups)) != set(range(groups.max() + 1))):
            raise ValueError("group labels must be dense in 0..c-1 with every group non-empty")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"activation probability must lie in (0, 1], got {self.p}")
        if self.k < 0:
            raise ValueError("budget k must be non-negative")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_groups(self) -> int:
        return int(self.groups.max()) + 1 if self.n else 0

    def budget_nodes(self, edge: CandidateEdge) -> tuple[int, ...]:
        """Nodes whose suggestion budget an edge consumes: the tail when directed, both ends otherwise."""
        return (edge.u,) if self.graph.directed else (edge.u, edge.v)

    def with_graph(self, graph: Graph) -> "NetworkInstance":
        return replace(self, graph=graph)

    def induced(self, nodes: Sequence[int]) -> tuple["NetworkInstance", dict[int, int]]:
        """Sub-instance on ``nodes`` (which must contain every content node).

        Group labels are re-densified over the groups present in the sample.
        """
        sub_graph, local = self.graph.induced(nodes)
        present = sorted(set(int(self.groups[v]) for v in nodes))
        remap = {g: i for i, g in enumerate(present)}
        groups = np.array([remap[int(self.groups[v])] for v in nodes], dtype=np.int64)
        sources = frozenset(local[s] for s in self.sources if s in local)
        labels = tuple(self.labels[v] for v in nodes) if self.labels else None
        gl = tuple(self.group_labels[g] for g in present) if self.group_labels else None
        return NetworkInstance(sub_graph, groups, sources, self.p, self.k, labels, gl), local


def multi_source_shortest_distances(graph: Graph, sources: Iterable[int]) -> DistanceMap:
    """BFS hop distance from the nearest source; ``INF`` where unreachable."""
    sources = list(sources)
    if not sources:
        raise ValueError("no content nodes")
    dist: list = [INF] * graph.n
    frontier = []
    for s in sources:
        if dist[s] != 0:
            dist[s] = 0
            frontier.append(s)
    adj = graph.adj
    level = 0
    while frontier:
        level += 1
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if dist[w] == INF:
                    dist[w] = level
                    nxt.append(w)
        frontier = nxt
    return tuple(dist)


def _extra_adjacency(edges: Iterable[CandidateEdge | tuple[int, int]], directed: bool) -> dict[int, list[int]]:
    extra: dict[int, list[int]] = defaultdict(list)
    for e in edges:
        u, v = (e.u, e.v) if isinstance(e, CandidateEdge) else e
        extra[u].append(v)
        if not directed:
            extra[v].append(u)
    return extra


def distance_diff(
    graph: Graph,
    baseline: DistanceMap,
    seeds: Iterable[tuple[int, int | float]],
    extra: Mapping[int, Sequence[int]] | None = None,
) -> DiffMap:
    """Nodes whose distance strictly improves when the given tentative distances are offered.

    Seeds are processed in nondecreasing distance using one bucket per
    distance.  A popped node is settled only if it beats both its baseline and
    any earlier settlement; its neighbours are then offered at distance + 1.
    ``extra`` carries adjacency of edges being added alongside, so that an
    improvement can travel through a second new edge.
    """
    buckets: dict[int, list[int]] = defaultdict(list)
    for node, d in seeds:
        if d != INF:
            buckets[int(d)].append(node)
    if not buckets:
        return {}
    diff: DiffMap = {}
    adj = graph.adj
    level = min(buckets)
    while buckets:
        queue = buckets.pop(level, None)
        if queue:
            nxt = level + 1
            for node in queue:
                if node in diff or baseline[node] <= level:
                    continue
                diff[node] = level
                for w in adj[node]:
                    if w not in diff and baseline[w] > nxt:
                        buckets[nxt].append(w)
                if extra is not None:
                    for w in extra.get(node, ()):
                        if w not in diff and baseline[w] > nxt:
                            buckets[nxt].append(w)
        level += 1
    return diff


def _edge_seeds(graph: Graph, baseline: DistanceMap, edge: CandidateEdge | tuple[int, int]):
    u, v = (edge.u, edge.v) if isinstance(edge, CandidateEdge) else edge
    seeds = [(v, baseline[u] + 1)]
    if not graph.directed:
        seeds.append((u, baseline[v] + 1))
    return seeds


def edge_delta_single(graph: Graph, baseline: DistanceMap, edge: CandidateEdge | tuple[int, int]) -> DiffMap:
    return distance_diff(graph, baseline, _edge_seeds(graph, baseline, edge))


def edge_delta_multiple(
    graph: Graph, baseline: DistanceMap, edges: Iterable[CandidateEdge | tuple[int, int]]
) -> DiffMap:
    """Joint distance improvement from adding all ``edges`` to ``graph``.

    Equal to a fresh BFS on the augmented graph minus ``baseline``; edges whose
    tail is only reached through another new edge are followed as well.
    """
    edges = list(edges)
    if not edges:
        return {}
    seeds = []
    for e in edges:
        seeds.extend(_edge_seeds(graph, baseline, e))
    return distance_diff(graph, baseline, seeds, _extra_adjacency(edges, graph.directed))


def apply_diff(baseline: DistanceMap, diff: Mapping[int, int]) -> DistanceMap:
    dist = list(baseline)
    for v, d in diff.items():
        dist[v] = d
    return tuple(dist)


@dataclass(frozen=True)
class CandidateDistanceIndex:
    """Baseline distances plus the single-edge improvement map of every candidate.

    ``per_edge[j]`` is the DiffMap of ``candidates[j]`` (the (e_j, d_ij) pairs
    grouped by edge).  ``best`` holds each node's best distance reachable with
    at most one candidate edge; ``r_m`` is the largest finite ``best`` over
    non-source nodes.  ``entry_*`` arrays are a flat CSR copy of ``per_edge``
    for vectorised evaluation.
    """

    baseline: DistanceMap
    candidates: tuple[CandidateEdge, ...]
    per_edge: tuple[DiffMap, ...]
    best: DistanceMap
    r_m: int
    position: Mapping[int, int] = field(repr=False)
    entry_ptr: np.ndarray = field(repr=False)
    entry_node: np.ndarray = field(repr=False)
    entry_dist: np.ndarray = field(repr=False)

    def positions(self, chosen: Iterable[CandidateEdge]) -> list[int]:
        out = []
        for e in chosen:
            pos = self.position.get(e.index)
            if pos is None or self.candidates[pos] != e:
                raise ValueError(f"candidate edge {e} is not part of this index")
            out.append(pos)
        return out

    def improved_by(self) -> dict[int, list[tuple[int, int]]]:
        """Per node, the ``(d_ij, j)`` pairs sorted by distance then edge position."""
        by_node: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for j, diff in enumerate(self.per_edge):
            for v, d in diff.items():
                by_node[v].append((d, j))
        for lst in by_node.values():
            lst.sort()
        return dict(by_node)


def candidate_distance_index(
    graph: Graph, sources: Iterable[int], candidates: Sequence[CandidateEdge]
) -> CandidateDistanceIndex:
    sources = frozenset(sources)
    baseline = multi_source_shortest_distances(graph, sources)
    per_edge = []
    for e in candidates:
        if graph.has_edge(e.u, e.v):
            raise ValueError(f"candidate {e} is already an edge of the graph")
        per_edge.append(edge_delta_single(graph, baseline, e))

    best = list(baseline)
    for diff in per_edge:
        for v, d in diff.items():
            if d < best[v]:
                best[v] = d
    finite = [best[v] for v in range(graph.n) if v not in sources and best[v] != INF]
    r_m = int(max(finite)) if finite else 0

    sizes = np.fromiter((len(d) for d in per_edge), dtype=np.int64, count=len(per_edge))
    ptr = np.zeros(len(per_edge) + 1, dtype=np.int64)
    np.cumsum(sizes, out=ptr[1:])
    nodes = np.fromiter((v for d in per_edge for v in d), dtype=np.int64, count=int(ptr[-1]))
    dists = np.fromiter((x for d in per_edge for x in d.values()), dtype=np.float64, count=int(ptr[-1]))
    for arr in (ptr, nodes, dists):
        arr.setflags(write=False)

    position = {e.index: j for j, e in enumerate(candidates)}
    if len(position) != len(candidates):
        raise ValueError("candidate edge indices must be unique")
    return CandidateDistanceIndex(
        baseline=baseline,
        candidates=tuple(candidates),
        per_edge=tuple(per_edge),
        best=tuple(best),
        r_m=r_m,
        position=position,
        entry_ptr=ptr,
        entry_node=nodes,
        entry_dist=dists,
    )


def make_candidates(pairs: Iterable[tuple[int, int]], start: int = 0) -> list[CandidateEdge]:
    return [CandidateEdge(int(u), int(v), start + j) for j, (u, v) in enumerate(pairs)]
