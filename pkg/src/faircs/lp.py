"""LP relaxation of fair content-spread edge selection.

Variables are ``y_j`` (edge j suggested) and ``x_{ir}`` (node i within r
hops of a content node).  The objective ``sum_r delta_r sum_i x_ir`` equals the
RMPP content spread for integral points because the ``delta`` weights
telescope to ``p ** d``.  Indicators that are fixed by the baseline graph are
folded into constants (one placeholder column per group carries them into
the parity rows); indicators no candidate can satisfy are dropped.
"""
from __future__ import annotations

import bisect
import enum
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .graph import INF, CandidateDistanceIndex, NetworkInstance

log = logging.getLogger(__name__)

FEAS_TOL = 1e-7


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpSolverError(RuntimeError):
    pass


def compute_delta_weights(p: float, r_m: int) -> np.ndarray:
    """``delta[r-1]`` for r = 1..r_m: ``p**r - p**(r+1)``, and ``p**r_m`` at the last slot."""
    if r_m < 1:
        raise ValueError(f"r_m must be >= 1, got {r_m}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    r = np.arange(1, r_m + 1, dtype=np.float64)
    delta = p**r - p ** (r + 1)
    delta[-1] = p**r_m
    return delta


def lp_horizon(index: CandidateDistanceIndex, sources) -> int:
    """Largest distance the LP must represent.

    At least ``r_m``; raised to the largest finite baseline of any node that
    stays in the LP and to the largest distance any single candidate gives
    such a node.  A selection that misses a node's best edge can still reach
    it through a worse one, and that spread must show up in the objective.
    """
    h = index.r_m
    for v, (b, best) in enumerate(zip(index.baseline, index.best)):
        if v in sources or best == INF:
            continue
        if b != INF and b > h:
            h = int(b)
    if len(index.entry_dist):
        keep = np.array([v not in sources and index.best[v] != INF for v in index.entry_node], dtype=bool)
        if keep.any():
            h = max(h, int(index.entry_dist[keep].max()))
    return max(h, 1)
    return max(h, 1)


class CoverageSets(Mapping):
    """``S_ir`` as a prefix-union view: ``(i, r) -> edge positions j with d_ij <= r``.

    Keys cover r below the node's baseline distance (larger r is fixed to
    one by the reduction) and up to ``horizon``; empty sets are not keys.
    """

    def __init__(self, index: CandidateDistanceIndex, horizon: int | None = None):
        self._by_node = index.improved_by()
        self._baseline = index.baseline
        self._horizon = horizon if horizon is not None else lp_horizon(index, ())
        self._dists = {v: [d for d, _ in lst] for v, lst in self._by_node.items()}

    def edges(self, i: int, r: int) -> list[int]:
        lst = self._by_node.get(i, ())
        cut = bisect.bisect_right(self._dists.get(i, ()), r)
        return [j for _, j in lst[:cut]]

    def rows(self, i: int) -> range:
        if i not in self._by_node:
            return range(0)
        top = min(self._baseline[i] - 1, self._horizon) if self._baseline[i] != INF else self._horizon
        return range(int(self._dists[i][0]), int(top) + 1)

    def __getitem__(self, key):
        i, r = key
        if r not in self.rows(i):
            raise KeyError(key)
        return tuple(self.edges(i, r))

    def __iter__(self):
        for i in sorted(self._by_node):
            for r in self.rows(i):
                yield (i, r)

    def __len__(self):
        return sum(len(self.rows(i)) for i in self._by_node)


def build_sir(index: CandidateDistanceIndex, horizon: int | None = None) -> CoverageSets:
    return CoverageSets(index, horizon)


@dataclass
class Reduction:
    x_vars: list[tuple[int, int]]  # surviving (node, r)
    x_weight: np.ndarray
    x_cover: list[list[int]]
    group_constant: np.ndarray  # per group, sum of forced-one contributions
    dropped_nodes: list[int]  # unreachable even with a candidate edge
    forced_one: int  # number of x_ir replaced by constant 1

    @property
    def constant(self) -> float:
        return float(self.group_constant.sum())


def reduce_variables(
    index: CandidateDistanceIndex, deltas: np.ndarray, groups: np.ndarray, sources
) -> Reduction:
    horizon = len(deltas)
    sets = CoverageSets(index, horizon)
    tail = np.cumsum(deltas[::-1])[::-1]  # tail[r-1] = sum_{r'>=r} delta_r'
    num_groups = int(np.max(groups)) + 1 if len(groups) else 0
    group_constant = np.zeros(num_groups)
    x_vars, x_weight, x_cover, dropped = [], [], [], []
    forced = 0
    for i, (b, best) in enumerate(zip(index.baseline, index.best)):
        if i in sources:
            continue
        if best == INF:
            dropped.append(i)
            continue
        if b != INF:
            group_constant[groups[i]] += tail[int(b) - 1]
            forced += horizon - int(b) + 1
        for r in sets.rows(i):
            x_vars.append((i, r))
            x_weight.append(deltas[r - 1])
            x_cover.append(sets.edges(i, r))
    return Reduction(x_vars, np.asarray(x_weight, dtype=np.float64), x_cover, group_constant, dropped, forced)


@dataclass
class LpModel:
    """``maximize c.z + constant  s.t.  A_ub z <= b_ub,  A_eq z = b_eq,  lb <= z <= ub``.

    Column layout: candidate edges (``n_y``), then x indicators, then one
    placeholder per group pinned to 1.
    """

    c: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    constant: float
    n_y: int
    x_vars: list[tuple[int, int]]
    n_coverage: int
    n_budget: int
    n_parity: int
    row_names: list[str] = field(default_factory=list)
    eq_names: list[str] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def var_name(self, col: int) -> str:
        if col < self.n_y:
            return f"y{col}"
        col -= self.n_y
        if col < len(self.x_vars):
            i, r = self.x_vars[col]
            return f"x{i}_{r}"
        return f"z{col - len(self.x_vars)}"


@dataclass
class LpSolution:
    status: LpStatus
    y_star: np.ndarray
    x_star: np.ndarray
    objective: float

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def budget_rows(instance: NetworkInstance, candidates, budgets) -> dict[int, list[int]]:
    rows: dict[int, list[int]] = {}
    for j, e in enumerate(candidates):
        for v in instance.budget_nodes(e):
            rows.setdefault(v, []).append(j)
    return rows


def build_lp(
    instance: NetworkInstance,
    index: CandidateDistanceIndex,
    budgets=None,
    *,
    soft_tau: float | None = None,
    reduce: bool = True,
) -> LpModel:
    """Assemble the relaxation.

    ``budgets`` gives the remaining per-node budget (defaults to ``instance.k``).
    ``soft_tau`` swaps the parity equalities for ``|avg_g - avg_h| <= tau`` over
    all group pairs; ``inf`` removes fairness entirely.  ``reduce=False``
    keeps every ``x_ir`` for r in 1..horizon (fixed ones pinned by bounds)
    and exists to cross-check the reduction.
    """
    n = instance.n
    if budgets is None:
        budgets = np.full(n, instance.k, dtype=np.int64)
    budgets = np.asarray(budgets)
    sources = instance.sources
    groups = instance.groups
    horizon = lp_horizon(index, sources)
    deltas = compute_delta_weights(instance.p, horizon)
    m = len(index.candidates)

    if reduce:
        red = reduce_variables(index, deltas, groups, sources)
        x_vars, x_weight, x_cover = red.x_vars, red.x_weight, red.x_cover
        x_lb = np.zeros(len(x_vars))
        group_constant = red.group_constant
    else:
        sets = CoverageSets(index, horizon)
        x_vars, x_weight, x_cover, fixed = [], [], [], []
        for i, (b, best) in enumerate(zip(index.baseline, index.best)):
            if i in sources or best == INF:
                continue
            for r in range(1, horizon + 1):
                x_vars.append((i, r))
                x_weight.append(deltas[r - 1])
                is_fixed = b != INF and r >= b
                fixed.append(is_fixed)
                x_cover.append([] if is_fixed else sets.edges(i, r))
        x_weight = np.asarray(x_weight, dtype=np.float64)
        x_lb = np.asarray(fixed, dtype=np.float64)
        group_constant = np.zeros(instance.num_groups)

    nx_ = len(x_vars)
    c_groups = instance.num_groups
    n_vars = m + nx_ + c_groups
    x0, z0 = m, m + nx_

    c = np.zeros(n_vars)
    c[x0:z0] = x_weight

    rows, cols, vals, b_ub, names = [], [], [], [], []
    r_id = 0
    n_cov = 0
    for t, cover in enumerate(x_cover):
        if not reduce and x_lb[t] == 1.0:
            continue
        rows.append(r_id); cols.append(x0 + t); vals.append(1.0)
        for j in cover:
            rows.append(r_id); cols.append(j); vals.append(-1.0)
        b_ub.append(0.0)
        i, r = x_vars[t]
        names.append(f"cover_{i}_{r}")
        r_id += 1
        n_cov += 1

    brows = budget_rows(instance, index.candidates, budgets)
    for v in sorted(brows):
        for j in brows[v]:
            rows.append(r_id); cols.append(j); vals.append(1.0)
        b_ub.append(float(max(budgets[v], 0)))
        names.append(f"budget_{v}")
        r_id += 1
    n_budget = len(brows)

    # size-normalised group spread: sum_{x in g} w x / |g| + C_g z_g / |g|
    sizes = np.zeros(c_groups)
    for v in range(n):
        if v not in sources:
            sizes[groups[v]] += 1
    present = [g for g in range(c_groups) if sizes[g] > 0]

    def group_terms(g: int) -> dict[int, float]:
        terms = {x0 + t: x_weight[t] / sizes[g] for t, (i, _) in enumerate(x_vars) if groups[i] == g}
        if group_constant[g]:
            terms[z0 + g] = group_constant[g] / sizes[g]
        return terms

    eq_rows, eq_cols, eq_vals, eq_names = [], [], [], []
    n_parity = 0
    terms = {g: group_terms(g) for g in present}
    if soft_tau is None:
        for a, b in zip(present, present[1:]):
            for col, w in terms[a].items():
                eq_rows.append(n_parity); eq_cols.append(col); eq_vals.append(w)
            for col, w in terms[b].items():
                eq_rows.append(n_parity); eq_cols.append(col); eq_vals.append(-w)
            eq_names.append(f"parity_{a}_{b}")
            n_parity += 1
    elif np.isfinite(soft_tau):
        for a in present:
            for b in present:
                if a == b:
                    continue
                for col, w in terms[a].items():
                    rows.append(r_id); cols.append(col); vals.append(w)
                for col, w in terms[b].items():
                    rows.append(r_id); cols.append(col); vals.append(-w)
                b_ub.append(float(soft_tau))
                names.append(f"soft_{a}_{b}")
                r_id += 1
                n_parity += 1

    A_ub = sp.csr_matrix((vals, (rows, cols)), shape=(r_id, n_vars))
    A_eq = sp.csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(n_parity if soft_tau is None else 0, n_vars))
    lb = np.zeros(n_vars)
    ub = np.ones(n_vars)
    lb[x0:z0] = x_lb
    lb[z0:] = 1.0
    return LpModel(
        c=c,
        A_ub=A_ub,
        b_ub=np.asarray(b_ub, dtype=np.float64),
        A_eq=A_eq,
        b_eq=np.zeros(A_eq.shape[0]),
        lb=lb,
        ub=ub,
        constant=float(group_constant.sum()),
        n_y=m,
        x_vars=list(x_vars),
        n_coverage=n_cov,
        n_budget=n_budget,
        n_parity=n_parity,
        row_names=names,
        eq_names=eq_names,
    )


def _highs(c, model: LpModel, extra_row=None, extra_rhs=None):
    A_ub, b_ub = model.A_ub, model.b_ub
    if extra_row is not None:
        A_ub = sp.vstack([A_ub, sp.csr_matrix(extra_row.reshape(1, -1))], format="csr")
        b_ub = np.append(b_ub, extra_rhs)
    return linprog(
        c,
        A_ub=A_ub if A_ub.shape[0] else None,
        b_ub=b_ub if A_ub.shape[0] else None,
        A_eq=model.A_eq if model.A_eq.shape[0] else None,
        b_eq=model.b_eq if model.A_eq.shape[0] else None,
        bounds=np.column_stack([model.lb, model.ub]),
        method="highs",
        options={
            "primal_feasibility_tolerance": FEAS_TOL,
            "dual_feasibility_tolerance": FEAS_TOL,
            "presolve": True,
        },
    )


def solve_lp(model: LpModel, *, sparse_y: bool = True) -> LpSolution:
    """Solve with HiGHS; values are clamped to [0, 1] afterwards.

    With ``sparse_y`` a second solve picks, among optimal solutions, one with
    the least total edge mass.  The first LP is degenerate in y: an edge whose
    coverage the optimum does not credit (its x held below the cover to meet
    parity) can sit at any value for free, yet once rounded it changes the
    real spread and breaks the balance the LP was built around.  The
    reported objective is always the first solve's optimum.
    """
    m, nx_ = model.n_y, len(model.x_vars)
    if model.n_vars == 0:
        return LpSolution(LpStatus.OPTIMAL, np.zeros(0), np.zeros(0), model.constant)
    res = _highs(-model.c, model)
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, np.zeros(m), np.zeros(nx_), float("nan"))
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, np.zeros(m), np.zeros(nx_), float("inf"))
    if res.status != 0:
        raise LpSolverError(f"LP solver failed (status {res.status}): {res.message}")
    z = res.x
    objective = float(model.c @ np.clip(z, 0.0, 1.0) + model.constant)
    if sparse_y and m:
        best = -res.fun
        c2 = np.zeros(model.n_vars)
        c2[:m] = 1.0
        res2 = _highs(c2, model, -model.c, -(best - FEAS_TOL * max(1.0, abs(best))))
        if res2.status == 0:
            z = res2.x
        else:
            log.warning("edge-mass tie-break solve failed (%s); keeping the first optimum", res2.message)
    z = np.clip(z, 0.0, 1.0)
    return LpSolution(
        LpStatus.OPTIMAL,
        y_star=z[:m],
        x_star=z[m : m + nx_],
        objective=objective,
    )


def _lp_terms(row, names) -> str:
    parts = []
    for col, v in zip(row.indices, row.data):
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {abs(v):.12g} {names[col]}")
    text = " ".join(parts) if parts else "0 " + names[0]
    return text[2:] if text.startswith("+ ") else text


def write_lp_text(model: LpModel) -> str:
    """CPLEX LP text of the model, for cross-checking with external solvers."""
    names = [model.var_name(k) for k in range(model.n_vars)]
    obj = sp.csr_matrix(model.c.reshape(1, -1))
    lines = ["\\ fair content spread LP relaxation", f"\\ constant {model.constant:.12g}", "Maximize"]
    lines.append(f" obj: {_lp_terms(obj.getrow(0), names) if obj.nnz else '0 ' + names[0]}")
    lines.append("Subject To")
    for r in range(model.A_ub.shape[0]):
        lines.append(f" {model.row_names[r]}: {_lp_terms(model.A_ub.getrow(r), names)} <= {model.b_ub[r]:.12g}")
    for r in range(model.A_eq.shape[0]):
        lines.append(f" {model.eq_names[r]}: {_lp_terms(model.A_eq.getrow(r), names)} = {model.b_eq[r]:.12g}")
    lines.append("Bounds")
    for k in range(model.n_vars):
        if model.lb[k] == model.ub[k]:
            lines.append(f" {names[k]} = {model.lb[k]:.12g}")
        else:
            lines.append(f" {model.lb[k]:.12g} <= {names[k]} <= {model.ub[k]:.12g}")
    lines.append("End")
    return "\n".join(lines) + "\n"
