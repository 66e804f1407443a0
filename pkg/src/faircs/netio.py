"""Reading and writing networks: tab-separated edge lists and a node CSV."""
from __future__ import annotations

import csv
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import CandidateEdge, Graph, NetworkInstance, make_candidates

log = logging.getLogger(__name__)

NODE_HEADER = ("node", "group", "is_source")
_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


class NetworkFormatError(ValueError):
    pass


def _natural_key(label: str):
    # integer-looking ids sort numerically, everything else lexicographically after them
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def read_edge_pairs(path, *, what: str = "edge") -> list[tuple[int, str, str]]:
    """(line number, u, v) for every non-comment line of an edge list."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split("\t") if "\t" in text else text.split()
            parts = [x.strip() for x in parts if x.strip()]
            if len(parts) != 2:
                raise NetworkFormatError(f"{path}:{lineno}: malformed {what} line {text!r}, expected 'u<TAB>v'")
            if parts[0] == parts[1]:
                raise NetworkFormatError(f"{path}:{lineno}: self-loop on {parts[0]!r}")
            pairs.append((lineno, parts[0], parts[1]))
    return pairs


def read_nodes(path) -> tuple[list[str], list[str], list[bool]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), 1) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise NetworkFormatError(f"{path}: empty node file, expected header {','.join(NODE_HEADER)}")
    header = tuple(c.strip().lower() for c in rows[0][1])
    missing = [c for c in NODE_HEADER if c not in header]
    if missing:
        raise NetworkFormatError(
            f"{path}:{rows[0][0]}: node file header must be {','.join(NODE_HEADER)} (missing {', '.join(missing)})"
        )
    col = {c: header.index(c) for c in NODE_HEADER}
    ids, groups, flags = [], [], []
    seen = set()
    for lineno, row in rows[1:]:
        if len(row) < len(header):
            raise NetworkFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        node = row[col["node"]].strip()
        group = row[col["group"]].strip()
        flag = row[col["is_source"]].strip().lower()
        if not node:
            raise NetworkFormatError(f"{path}:{lineno}: empty node id")
        if not group:
            raise NetworkFormatError(f"{path}:{lineno}: node {node!r} has no group")
        if flag not in _TRUE and flag not in _FALSE:
            raise NetworkFormatError(f"{path}:{lineno}: is_source must be 0/1 or true/false, got {flag!r}")
        if node in seen:
            raise NetworkFormatError(f"{path}:{lineno}: node {node!r} listed twice")
        seen.add(node)
        ids.append(node)
        groups.append(group)
        flags.append(flag in _TRUE)
    return ids, groups, flags


def load_network(
    edges_path,
    nodes_path,
    *,
    p: float = 0.5,
    k: int = 1,
    directed: bool = False,
    sources: Iterable[str] | None = None,
) -> NetworkInstance:
    """Build an instance from an edge list and a ``node,group,is_source`` CSV.

    Node ids are relabeled 0..n-1 in natural order of their original ids; the
    originals are kept in ``instance.labels``.  ``sources`` (original ids)
    overrides the is_source column when given.
    """
    ids, group_names, flags = read_nodes(nodes_path)
    order = sorted(range(len(ids)), key=lambda i: _natural_key(ids[i]))
    labels = tuple(ids[i] for i in order)
    dense = {lab: j for j, lab in enumerate(labels)}

    names = sorted(set(group_names), key=_natural_key)
    gid = {g: i for i, g in enumerate(names)}
    groups = np.array([gid[group_names[i]] for i in order], dtype=np.int64)

    if sources is None:
        src = {dense[ids[i]] for i in range(len(ids)) if flags[i]}
    else:
        src = set()
        for s in sources:
            if s not in dense:
                raise NetworkFormatError(f"content node {s!r} is not in {nodes_path}")
            src.add(dense[s])
    if not src:
        raise NetworkFormatError(f"{nodes_path}: zero content nodes (no row has is_source=1)")

    edges = []
    seen = {}
    for lineno, a, b in read_edge_pairs(edges_path):
        for x in (a, b):
            if x not in dense:
                raise NetworkFormatError(f"{edges_path}:{lineno}: unknown node {x!r}")
        u, v = dense[a], dense[b]
        key = (u, v) if directed or u < v else (v, u)
        if key in seen:
            log.warning("%s:%d: duplicate edge %s-%s (first on line %d), ignored", edges_path, lineno, a, b, seen[key])
            continue
        seen[key] = lineno
        edges.append(key)

    graph = Graph(len(labels), edges, directed=directed)
    return NetworkInstance(graph, groups, frozenset(src), p, k, labels, tuple(names))


def read_sources(path) -> list[str]:
    """One content-node id per line, '#' comments allowed."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.split("#", 1)[0].strip()
            if text:
                out.extend(x.strip() for x in text.replace(",", " ").split())
    return out


def read_candidates(path, instance: NetworkInstance) -> list[CandidateEdge]:
    """Explicit candidate list in edge-list format, mapped through the instance's node ids.

    Pairs that already are edges, and repeated pairs, are dropped with a warning.
    """
    labels = instance.labels or tuple(str(i) for i in range(instance.n))
    dense = {lab: j for j, lab in enumerate(labels)}
    graph = instance.graph
    pairs = []
    seen = set()
    for lineno, a, b in read_edge_pairs(path, what="candidate"):
        for x in (a, b):
            if x not in dense:
                raise NetworkFormatError(f"{path}:{lineno}: unknown node {x!r}")
        u, v = dense[a], dense[b]
        key = (u, v) if graph.directed or u < v else (v, u)
        if graph.has_edge(u, v):
            log.warning("%s:%d: candidate %s-%s is already an edge, ignored", path, lineno, a, b)
            continue
        if key in seen:
            log.warning("%s:%d: duplicate candidate %s-%s, ignored", path, lineno, a, b)
            continue
        seen.add(key)
        pairs.append(key)
    return make_candidates(pairs)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_network(instance: NetworkInstance, edges_path, nodes_path) -> None:
    """Inverse of load_network (ids written as their original labels)."""
    labels = instance.labels or tuple(str(i) for i in range(instance.n))
    gnames = instance.group_labels or tuple(str(g) for g in range(instance.num_groups))
    lines = ["# u\tv"] + [f"{labels[u]}\t{labels[v]}" for u, v in instance.graph.edges()]
    atomic_write_text(edges_path, "\n".join(lines) + "\n")
    rows = [",".join(NODE_HEADER)]
    for i in range(instance.n):
        rows.append(f"{labels[i]},{gnames[int(instance.groups[i])]},{int(i in instance.sources)}")
    atomic_write_text(nodes_path, "\n".join(rows) + "\n")


def write_candidates(candidates: Sequence[CandidateEdge], path, labels: Sequence[str] | None = None) -> None:
    lab = (lambda x: labels[x]) if labels is not None else str
    atomic_write_text(path, "".join(f"{lab(e.u)}\t{lab(e.v)}\n" for e in candidates))
