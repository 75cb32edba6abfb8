"""Smoothness + non-uniformity losses on row-stochastic prediction matrices.

The combined loss couples the Laplacian quadratic form (smoothness across
edges) with a nonpositive diagonal reweighting that rewards confident rows,
justified by a transport lower bound against the uniform distribution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, laplacian

log = logging.getLogger(__name__)

EPS_SWEEP_DEFAULT = (0.005, 0.01, 0.02, 0.05)


def check_prob_matrix(x, tol: float = 1e-7) -> np.ndarray:
    """Validate a row-stochastic matrix (rows sum to 1, entries in [0, 1])."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"need an n x m matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite entries")
    if np.min(x) < -tol or np.max(x) > 1.0 + tol:
        raise ValueError("entries outside [0, 1]")
    rs = x.sum(axis=1)
    bad = int(np.argmax(np.abs(rs - 1.0)))
    if abs(rs[bad] - 1.0) > tol:
        raise ValueError(f"row {bad} sums to {rs[bad]!r}, not 1")
    return x


@dataclass(frozen=True)
class WeightDiag:
    """Nonpositive per-node weights for the confidence term."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite weights")
        if np.max(a, initial=-np.inf) > 1e-12:
            raise ValueError(f"positive weight {np.max(a):.3e}; all entries must be <= 0")
        a = np.minimum(a, 0.0)
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @classmethod
    def default_for(cls, g: Graph) -> "WeightDiag":
        """min(0, 1 - deg); isolated nodes would get +1, so they clamp to 0."""
        a = 1.0 - g.degrees
        isolated = int(np.sum(g.degrees == 0))
        if isolated:
            log.info("clamping %d isolated node weight(s) to 0", isolated)
        return cls(np.minimum(a, 0.0))

    @classmethod
    def zeros(cls, n: int) -> "WeightDiag":
        return cls(np.zeros(n))


def softmax_rows(o: np.ndarray) -> np.ndarray:
    """Rowwise softmax with max subtraction; rejects non-finite input."""
    o = np.asarray(o, dtype=float)
    if not np.all(np.isfinite(o)):
        raise ValueError("non-finite logits")
    z = o - o.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_components(x, g: Graph, d: WeightDiag) -> tuple[float, float, float]:
    """(smoothness, confidence, combined) traces of X.

    smoothness = Tr(X^T L X), confidence = Tr(X^T D X); the combined value is
    computed independently from L + D and must equal their sum.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != g.n or d.n != g.n:
        raise ValueError("shape mismatch between X, graph and weights")
    lap = laplacian(g)
    l1 = float(np.sum(x * (lap @ x)))
    l2 = float(np.sum((x * x) * d.a[:, None]))
    m = lap + np.diag(d.a)
    l0 = float(np.sum(x * (m @ x)))
    if abs(l0 - (l1 + l2)) > 1e-9 * max(1.0, abs(l0)):
        raise RuntimeError(f"loss decomposition broken: {l0!r} vs {l1 + l2!r}")
    return l1, l2, l0


def grad_loss0(x, g: Graph, d: WeightDiag) -> np.ndarray:
    """Gradient of the combined trace in X: 2 (L + D) X."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != g.n or d.n != g.n:
        raise ValueError("shape mismatch between X, graph and weights")
    m = laplacian(g) + np.diag(d.a)
    return 2.0 * (m @ x)


def softmax_vjp(x: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Pull a gradient in softmax outputs back to logits, row by row."""
    inner = np.sum(x * grad, axis=-1, keepdims=True)
    return x * (grad - inner)


def grad_loss0_logits(o, g: Graph, d: WeightDiag) -> np.ndarray:
    """Gradient of combined-trace-of-softmax with respect to the logits."""
    x = softmax_rows(o)
    return softmax_vjp(x, grad_loss0(x, g, d))


def nonuniformity_bound_check(x, d: WeightDiag, tol: float = 1e-9) -> dict:
    """Transport lower bound on the confidence trace, plus its sandwich.

    Tr(X^T D X) - Tr(D)/m must dominate twice the weighted squared transport
    distances of the rows to uniform; one-hot and uniform rows bound the trace
    itself from below and above.
    """
    x = check_prob_matrix(x)
    n, m = x.shape
    if d.n != n:
        raise ValueError("weight length does not match X")
    trace = float(np.sum((x * x) * d.a[:, None]))
    c = -float(d.a.sum()) / m
    lhs = trace + c
    w_sq = 0.5 * np.abs(x - 1.0 / m).sum(axis=1)
    rhs = 2.0 * float(np.sum(d.a * w_sq))
    trace_onehot = float(d.a.sum())
    trace_uniform = float(d.a.sum()) / m
    return {
        "lhs": lhs,
        "rhs": rhs,
        "trace": trace,
        "trace_onehot": trace_onehot,
        "trace_uniform": trace_uniform,
        "bound_margin": lhs - rhs,
        "holds": bool(lhs >= rhs - tol),
        "sandwich_holds": bool(
            trace_onehot - tol <= trace <= trace_uniform + tol
        ),
    }


def nonuniformity_counts(x, eps_uniform: float, eps_one: float) -> tuple[int, int]:
    """Count entries within eps of 1/m (indecision) and within eps of 1 (confidence)."""
    x = check_prob_matrix(x)
    for e in (eps_uniform, eps_one):
        if not (0.0 < e < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {e}")
    m = x.shape[1]
    near_uniform = int(np.sum(np.abs(x - 1.0 / m) <= eps_uniform))
    near_one = int(np.sum(x >= 1.0 - eps_one))
    return near_uniform, near_one


def nonuniformity_sweep(x, eps_values=EPS_SWEEP_DEFAULT) -> list[dict]:
    out = []
    for e in eps_values:
        nu, no = nonuniformity_counts(x, e, e)
        out.append({"epsilon": float(e), "near_uniform": nu, "near_one": no})
    return out


def write_nonuniformity_csv(path, records: list[dict], model_tag: str) -> None:
    """CSV rows "epsilon,kind,count,model_tag", one pair of kinds per epsilon."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epsilon,kind,count,model_tag\n")
        for r in records:
            fh.write(f"{r['epsilon']!r},near_uniform,{r['near_uniform']},{model_tag}\n")
            fh.write(f"{r['epsilon']!r},near_one,{r['near_one']},{model_tag}\n")
