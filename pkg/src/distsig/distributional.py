"""Distributional signals on graphs: transport distance and total variation.

A distributional signal assigns each node a probability distribution over a
shared finite label alphabet.  This module provides the squared Wasserstein
distance under the discrete metric (closed form + LP oracle), four smoothness
measures built on it, and the inequality chains relating them.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import (
    Graph,
    GraphError,
    SpanningTree,
    TreeCover,
    _min_weight_cover,
    build_graph,
    clique_number_complement,
    enumerate_spanning_trees,
    is_connected,
    laplacian,
)
from .simplex import InfeasibleError, solve_lp

ORACLE_MAX_M = 6
JOINT_TABLE_CAP = 729  # 3^6 table entries


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over the label alphabet."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite weights")
        if np.min(w) < -1e-12:
            raise ValueError(f"negative weight {np.min(w):.3e}")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w = np.maximum(w, 0.0)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Marginals:
    """One distribution per node, stacked as a row-stochastic n x m matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.matrix, dtype=float)
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValueError(f"need an n x m matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite entries")
        if np.min(x) < -1e-12:
            raise ValueError(f"negative entry {np.min(x):.3e}")
        rs = x.sum(axis=1)
        bad = np.argmax(np.abs(rs - 1.0))
        if abs(rs[bad] - 1.0) > 1e-9:
            raise ValueError(f"row {bad} sums to {rs[bad]!r}, not 1")
        x = np.maximum(x, 0.0)
        x.flags.writeable = False
        object.__setattr__(self, "matrix", x)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def row(self, i: int) -> DiscreteDistribution:
        return DiscreteDistribution(self.matrix[i])


@dataclass(frozen=True)
class Coupling:
    """Joint table transporting source to target; marginals must match."""

    matrix: np.ndarray
    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.matrix, dtype=float)
        s = np.asarray(self.source, dtype=float)
        t = np.asarray(self.target, dtype=float)
        if z.shape != (s.size, t.size):
            raise ValueError("coupling shape mismatch")
        if np.min(z) < -1e-12:
            raise ValueError(f"negative mass {np.min(z):.3e}")
        z = np.maximum(z, 0.0)
        if np.max(np.abs(z.sum(axis=1) - s)) > 1e-9:
            raise ValueError("row sums do not match source")
        if np.max(np.abs(z.sum(axis=0) - t)) > 1e-9:
            raise ValueError("column sums do not match target")
        z.flags.writeable = False
        object.__setattr__(self, "matrix", z)

    def transport_cost(self) -> float:
        """Off-diagonal mass: cost under the discrete (0/1) ground metric."""
        return float(self.matrix.sum() - np.trace(self.matrix))


@dataclass(frozen=True)
class JointDistribution:
    """Full joint over label tuples, one axis per node."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if np.min(t) < -1e-9:
            raise ValueError(f"negative joint mass {np.min(t):.3e}")
        t = np.maximum(t, 0.0)
        if abs(float(t.sum()) - 1.0) > 1e-7:
            raise ValueError(f"joint mass sums to {t.sum()!r}")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def n(self) -> int:
        return self.table.ndim

    def marginal(self, i: int) -> DiscreteDistribution:
        axes = tuple(a for a in range(self.table.ndim) if a != i)
        w = self.table.sum(axis=axes)
        return DiscreteDistribution(w / w.sum())


def _weights(d) -> np.ndarray:
    if isinstance(d, DiscreteDistribution):
        return d.weights
    return np.asarray(d, dtype=float)


def as_marginals(x) -> Marginals:
    return x if isinstance(x, Marginals) else Marginals(np.asarray(x, dtype=float))


# --- pairwise transport ---------------------------------------------------

def wasserstein_sq(mu, nu) -> float:
    """Squared Wasserstein distance under the discrete metric: half the l1 gap."""
    x, y = _weights(mu), _weights(nu)
    if x.shape != y.shape:
        raise ValueError(f"alphabet size mismatch: {x.shape} vs {y.shape}")
    return 0.5 * float(np.abs(x - y).sum())


def optimal_coupling(mu, nu) -> Coupling:
    """A minimum-cost coupling whose diagonal is exactly the elementwise min.

    Mass min(x_i, y_i) stays in place; row and column surpluses (which have
    disjoint supports) are matched greedily in index order.
    """
    x, y = _weights(mu), _weights(nu)
    if x.shape != y.shape:
        raise ValueError(f"alphabet size mismatch: {x.shape} vs {y.shape}")
    m = x.shape[0]
    z = np.zeros((m, m))
    d = np.minimum(x, y)
    np.fill_diagonal(z, d)
    r = x - d
    c = y - d
    ri = [k for k in range(m) if r[k] > 0.0]
    cj = [k for k in range(m) if c[k] > 0.0]
    i = j = 0
    while i < len(ri) and j < len(cj):
        a, b = ri[i], cj[j]
        t = min(r[a], c[b])
        z[a, b] += t
        r[a] -= t
        c[b] -= t
        if r[a] <= 1e-15:
            i += 1
        if c[b] <= 1e-15:
            j += 1
    return Coupling(z, x, y)


def coupling_lp_oracle(mu, nu) -> float:
    """Exact transport LP over all couplings; the independent check route."""
    x, y = _weights(mu), _weights(nu)
    if x.shape != y.shape:
        raise ValueError(f"alphabet size mismatch: {x.shape} vs {y.shape}")
    m = x.shape[0]
    if m > ORACLE_MAX_M:
        raise ValueError(f"alphabet size {m} too large for the LP oracle (max {ORACLE_MAX_M})")
    cost = (1.0 - np.eye(m)).ravel()
    a = np.zeros((2 * m, m * m))
    for i in range(m):
        a[i, i * m:(i + 1) * m] = 1.0  # row sums
        a[m + i, i::m] = 1.0           # column sums
    b = np.concatenate([x, y])
    try:
        _, val = solve_lp(cost, a, b)
    except InfeasibleError as e:  # pragma: no cover - valid inputs are feasible
        raise RuntimeError(f"coupling LP infeasible: {e}") from e
    return max(val, 0.0)


# --- total variation notions ---------------------------------------------

def tv_l1_l2(g: Graph, marginals) -> tuple[float, float]:
    """Edgewise l1 and squared-l2 variation of the marginal columns.

    The squared form is cross-checked against the Laplacian trace identity.
    """
    nn = as_marginals(marginals)
    x = nn.matrix
    if nn.n != g.n:
        raise ValueError(f"marginal count {nn.n} does not match n={g.n}")
    l1 = 0.0
    l2 = 0.0
    for u, v in g.edges:
        diff = x[u] - x[v]
        l1 += float(np.abs(diff).sum())
        l2 += float((diff * diff).sum())
    trace = float(np.sum(x * (laplacian(g) @ x)))
    if abs(l2 - trace) > 1e-9 * max(1.0, abs(l2)):
        raise RuntimeError(f"l2 variation forms disagree: {l2!r} vs {trace!r}")
    return l1, l2


def tv_exact(g: Graph, marginals, max_table: int = JOINT_TABLE_CAP, return_joint: bool = False):
    """Smallest expected edgewise disagreement over all joint couplings.

    Solves the exact linear program on the full joint table; only feasible for
    m^n within the table cap.
    """
    nn = as_marginals(marginals)
    if nn.n != g.n:
        raise ValueError(f"marginal count {nn.n} does not match n={g.n}")
    n, m = nn.n, nn.m
    if m ** n > max_table:
        raise ValueError(f"state space too large: m^n = {m ** n} exceeds cap {max_table}")
    states = np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64)
    cost = np.zeros(states.shape[0])
    for u, v in g.edges:
        cost += (states[:, u] != states[:, v]).astype(float)
    a = np.zeros((n * m, states.shape[0]))
    for i in range(n):
        for s in range(m):
            a[i * m + s] = (states[:, i] == s).astype(float)
    b = nn.matrix.ravel()
    try:
        x, val = solve_lp(cost, a, b)
    except InfeasibleError as e:
        raise RuntimeError(f"joint coupling LP infeasible for valid marginals: {e}") from e
    val = max(val, 0.0)
    if return_joint:
        return val, JointDistribution(x.reshape((m,) * n))
    return val


def _rho(mu_a: np.ndarray, mu_b: np.ndarray) -> np.ndarray:
    """Per-label retention ratio along a directed step a -> b.

    min(mu_b/mu_a, 1), with the 0/0 branch defined as 1.
    """
    out = np.ones_like(mu_a)
    mask = mu_b <= mu_a
    pos = mask & (mu_a > 0.0)
    out[pos] = mu_b[pos] / mu_a[pos]
    return out


def tv_tree_rooted(g: Graph, tree: SpanningTree, v0: int, marginals) -> float:
    """Upper-bound variation induced by a rooted spanning tree.

    Each graph edge contributes the mass that provably must move between its
    endpoints once transport is routed through the tree from the root: the
    endpoint masses minus twice the mass retained from their deepest common
    ancestor.  On tree edges this collapses to the plain l1 difference.
    """
    nn = as_marginals(marginals)
    x = nn.matrix
    if nn.n != g.n or tree.host_n != g.n:
        raise ValueError("size mismatch between graph, tree and marginals")
    tree_edges = set(tree.edges)
    if not tree_edges.issubset(set(g.edges)):
        raise GraphError("tree uses edges absent from the host graph")
    rt = tree.rooted(v0)
    parent = rt.parent
    paths: list[list[int]] = [[] for _ in range(g.n)]
    for node in range(g.n):
        chain = []
        cur = node
        while cur != -1:
            chain.append(cur)
            cur = parent[cur]
        paths[node] = chain[::-1]
    rho_step = {}
    for node in range(g.n):
        p = parent[node]
        if p != -1:
            rho_step[node] = _rho(x[p], x[node])

    total = 0.0
    for u, v in g.edges:
        if (u, v) in tree_edges:
            total += float(np.abs(x[u] - x[v]).sum())
            continue
        pu, pv = paths[u], paths[v]
        k = pu[0]
        for a, b in zip(pu, pv):
            if a != b:
                break
            k = a
        ku = pu.index(k)
        kv = pv.index(k)
        rq_u = np.ones(nn.m)
        for node in pu[ku + 1:]:
            rq_u = rq_u * rho_step[node]
        rq_v = np.ones(nn.m)
        for node in pv[kv + 1:]:
            rq_v = rq_v * rho_step[node]
        t_vec = x[u] + x[v] - 2.0 * x[k] * rq_u * rq_v
        total += float(t_vec.sum())
    return total


def tv_cover(g: Graph, marginals, size_cap: int | None = None,
             tree_cap: int = 10000, trees: list[SpanningTree] | None = None
             ) -> tuple[float, TreeCover]:
    """Cheapest spanning-tree cover variation within a cover-size cap.

    Per-tree variation is half its l1 variation (exact on trees); the search
    over covers is exact within the cap.
    """
    nn = as_marginals(marginals)
    x = nn.matrix
    if nn.n != g.n:
        raise ValueError(f"marginal count {nn.n} does not match n={g.n}")
    if g.n == 1:
        return 0.0, TreeCover((SpanningTree(1, ()),))
    if trees is None:
        trees = enumerate_spanning_trees(g, cap=tree_cap)
    if size_cap is None:
        _, c1 = clique_number_complement(g)
        size_cap = max(c1, 3)
    edge_l1 = {}
    eidx = {}
    for i, (u, v) in enumerate(g.edges):
        edge_l1[(u, v)] = float(np.abs(x[u] - x[v]).sum())
        eidx[(u, v)] = i
    masks = []
    weights = []
    for t in trees:
        mask = 0
        w = 0.0
        for e in t.edges:
            mask |= 1 << eidx[e]
            w += edge_l1[e]
        masks.append(mask)
        weights.append(0.5 * w)
    res = _min_weight_cover(masks, weights, g.m, size_cap)
    if res is None:
        raise GraphError(f"no cover within cap {size_cap}")
    val, idx = res
    return val, TreeCover(tuple(trees[i] for i in idx))


# --- inequality chains ----------------------------------------------------

def check_tv_bounds(g: Graph, marginals, *, tol: float = 1e-9,
                    tree_cap: int = 10000, cover_cap: int | None = None,
                    max_table: int = JOINT_TABLE_CAP) -> dict:
    """Evaluate every variation notion and verify the inequality chains.

    Returns a JSON-ready report with all values, per-inequality margins, any
    violations, and whether the weaker sqrt(|S|*n) tail constant also holds.
    """
    nn = as_marginals(marginals)
    tg1, tg2 = tv_l1_l2(g, nn)
    tg = tv_exact(g, nn, max_table=max_table)
    trees = enumerate_spanning_trees(g, cap=tree_cap)
    tghv = [tv_tree_rooted(g, t, r, nn) for t in trees for r in range(g.n)]
    tghv_min = min(tghv)
    _, c1 = clique_number_complement(g)
    tcov, cover = tv_cover(g, nn, size_cap=cover_cap, trees=trees)
    c3 = math.sqrt(nn.m * g.m)
    checks = [
        ("tg2_le_tg1", tg2, tg1),
        ("tg1_le_2tg", tg1, 2.0 * tg),
        ("2tg_le_tghv_min", 2.0 * tg, tghv_min),
        ("tg1_le_2tcov", tg1, 2.0 * tcov),
        ("2min_le_c1_tg1", 2.0 * min(tcov, tg), c1 * tg1),
        ("tg1_le_c3_sqrt_tg2", tg1, c3 * math.sqrt(tg2)),
    ]
    margins = {name: float(rhs - lhs) for name, lhs, rhs in checks}
    violations = [name for name, lhs, rhs in checks if lhs > rhs + tol]
    c3_paper = math.sqrt(nn.m * g.n)
    return {
        "graph": {"n": g.n, "edges": [list(e) for e in g.edges]},
        "marginals": nn.matrix.tolist(),
        "tg1": tg1,
        "tg2": tg2,
        "tg_exact": tg,
        "tcov": tcov,
        "tghv_min": tghv_min,
        "c1": c1,
        "c3": c3,
        "violations": violations,
        "margins": margins,
        "cover_size": len(cover.trees),
        "tree_count": len(trees),
        "c3_paper_holds": bool(tg1 <= c3_paper * math.sqrt(tg2) + tol),
    }


def random_bound_instance(key, max_n: int = 6, max_m: int = 3) -> tuple[Graph, Marginals]:
    """Seeded random connected graph plus Dirichlet(1,...,1) marginals."""
    rng = np.random.default_rng(key)
    n = int(rng.integers(2, max_n + 1))
    m = int(rng.integers(2, max_m + 1))
    p = float(rng.uniform(0.3, 0.9))
    while True:
        iu, ju = np.triu_indices(n, 1)
        keep = rng.random(iu.size) < p
        g = build_graph(n, list(zip(iu[keep].tolist(), ju[keep].tolist())))
        if is_connected(g):
            break
    x = rng.dirichlet(np.ones(m), size=n)
    return g, Marginals(x)


def _corpus_one(args) -> dict:
    seed, idx, max_n, max_m = args
    g, nn = random_bound_instance((seed, idx), max_n, max_m)
    return check_tv_bounds(g, nn)


def run_bound_corpus(trials: int, seed: int, *, max_n: int = 6, max_m: int = 3,
                     jobs: int = 1, keep_instances: bool = True) -> dict:
    """Fuzz the inequality chains over a seeded corpus; order-stable merge."""
    args = [(seed, i, max_n, max_m) for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_corpus_one, args, chunksize=max(1, trials // (4 * jobs))))
    else:
        reports = [_corpus_one(a) for a in args]
    violations = [
        {"instance": i, "violations": r["violations"]}
        for i, r in enumerate(reports) if r["violations"]
    ]
    worst = {}
    for r in reports:
        for name, m in r["margins"].items():
            worst[name] = min(worst.get(name, np.inf), m)
    out = {
        "trials": trials,
        "seed": seed,
        "max_n": max_n,
        "max_m": max_m,
        "violation_count": len(violations),
        "violations": violations,
        "worst_margins": {k: float(v) for k, v in sorted(worst.items())},
        "c3_paper_pass_rate": sum(r["c3_paper_holds"] for r in reports) / max(trials, 1),
    }
    if keep_instances:
        out["instances"] = reports
    return out
