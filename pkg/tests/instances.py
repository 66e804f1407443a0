"""Instance builders shared by the tests."""
from __future__ import annotations

import numpy as np

from faircs.graph import Graph, NetworkInstance, make_candidates


def random_graph(rng, n, p_edge, directed):
    edges = set()
    for u in range(n):
        for v in range(n):
            if u == v or (not directed and v < u):
                continue
            if rng.random() < p_edge:
                edges.add((u, v))
    return sorted(edges)


def random_instance(rng, n, p_edge=0.12, directed=False, n_groups=2, n_sources=1, p=0.5, k=1):
    edges = random_graph(rng, n, p_edge, directed)
    groups = np.arange(n) % n_groups
    rng.shuffle(groups)
    sources = rng.choice(n, size=n_sources, replace=False)
    return NetworkInstance(Graph(n, edges, directed), groups, frozenset(int(s) for s in sources), p, k)


def random_non_edges(rng, graph, count):
    pairs = set()
    tries = 0
    while len(pairs) < count and tries < 50 * count + 100:
        tries += 1
        u, v = (int(x) for x in rng.integers(0, graph.n, size=2))
        if u == v or graph.has_edge(u, v):
            continue
        pairs.add((u, v) if graph.directed or u < v else (v, u))
    return make_candidates(sorted(pairs))


def mirrored_trees(seed: int, m: int, noise_pairs: int = 5, k: int = 2):
    """Source s, group-0 tree A hung from s, and an identical group-1 tree B hung one hop lower.

    B's root b0 hangs off A's root, so every B node starts one hop farther out
    than its A twin (initial disparity 100% at p = 0.5).  Candidates: the
    restoring shortcut (s, b0), plus ``noise_pairs`` grandparent shortcuts
    inside A, each mirrored in B.  Choosing only (s, b0) makes the two groups
    identical, so a zero-disparity selection always exists.
    """
    rng = np.random.default_rng(seed)
    parent = [None] + [int(rng.integers(0, i)) for i in range(1, m)]
    s = 0

    def A(i):
        return 1 + i

    def B(i):
        return 1 + m + i

    edges = [(s, A(0)), (A(0), B(0))]
    for i in range(1, m):
        edges.append((A(parent[i]), A(i)))
        edges.append((B(parent[i]), B(i)))
    groups = np.array([0] + [0] * m + [1] * m)
    gp = [(parent[parent[i]], i) for i in range(m) if parent[i] is not None and parent[parent[i]] is not None]
    order = rng.permutation(len(gp))
    pairs = {(s, B(0))}
    for t in order[:noise_pairs]:
        a, b = gp[t]
        pairs.add(tuple(sorted((A(a), A(b)))))
        pairs.add(tuple(sorted((B(a), B(b)))))
    graph = Graph(1 + 2 * m, edges)
    return NetworkInstance(graph, groups, frozenset({s}), 0.5, k), make_candidates(sorted(pairs))


def chain(n, directed=True):
    """0 -> 1 -> ... -> n-1 with source 0."""
    return Graph(n, [(i, i + 1) for i in range(n - 1)], directed)


def mirrored_random(seed: int, m: int, p_edge: float = 0.25, noise_pairs: int = 3, p: float = 0.5, k: int = 2):
    """Like ``mirrored_trees`` but the twin halves are a random connected graph H.

    s - a0 - b0 with H copied onto both sides, so every B node sits exactly one
    hop farther out than its A twin.  Candidates: (s, b0) plus ``noise_pairs``
    random non-edges of H, each added on both sides.
    """
    rng = np.random.default_rng(seed)
    h = set()
    for i in range(1, m):
        j = int(rng.integers(0, i))
        h.add((j, i))  # spanning tree keeps H connected
    for u in range(m):
        for v in range(u + 1, m):
            if rng.random() < p_edge:
                h.add((u, v))
    s = 0

    def A(i):
        return 1 + i

    def B(i):
        return 1 + m + i

    edges = [(s, A(0)), (A(0), B(0))]
    for u, v in sorted(h):
        edges.append((A(u), A(v)))
        edges.append((B(u), B(v)))
    non = [(u, v) for u in range(m) for v in range(u + 1, m) if (u, v) not in h]
    picks = rng.permutation(len(non))[:noise_pairs]
    pairs = {(s, B(0))}
    for t in picks:
        u, v = non[t]
        pairs.add((A(u), A(v)))
        pairs.add((B(u), B(v)))
    groups = np.array([0] + [0] * m + [1] * m)
    graph = Graph(1 + 2 * m, edges)
    return NetworkInstance(graph, groups, frozenset({s}), p, k), make_candidates(sorted(pairs))
