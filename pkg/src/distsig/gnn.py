"""Two-layer graph convolutional network with hand-written backprop.

Forward pass O = A_hat relu(A_hat F W1) W2 with row-softmax readout, trained
by Adam on masked cross-entropy plus an optional distributional regularizer
evaluated over every node.  Variants:

  gcn  no regularizer
  r    smoothness + confidence traces of the softmax outputs
  r1   smoothness trace only
  r2   confidence trace only
  r3   smoothness trace of the raw logits
  lap  combined trace of the one-hot argmax labels (logged, no gradient)
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphError, build_graph, main_component, sbm_generate
from .regularizer import (
    EPS_SWEEP_DEFAULT,
    WeightDiag,
    nonuniformity_sweep,
    softmax_rows,
    softmax_vjp,
)
from .spectral import gft, high_freq_fraction, laplacian_spectrum, normalize_signal

log = logging.getLogger(__name__)

VARIANTS = ("gcn", "r", "r1", "r2", "r3", "lap")


@dataclass(frozen=True)
class TrainConfig:
    variant: str = "gcn"
    eta: float = 0.5
    hidden: int = 16
    epochs: int = 200
    lr: float = 0.01
    weight_decay: float = 5e-4
    dropout: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; pick one of {VARIANTS}")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.epochs < 1 or self.hidden < 1:
            raise ValueError("epochs and hidden width must be positive")


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int


@dataclass
class GcnParams:
    w1: np.ndarray
    w2: np.ndarray

    def copy(self) -> "GcnParams":
        return GcnParams(self.w1.copy(), self.w2.copy())


@dataclass
class Metrics:
    config: TrainConfig
    train_loss: list[float]
    train_acc: list[float]
    val_loss: list[float]
    val_acc: list[float]
    reg_values: list[float]
    best_epoch: int
    test_acc: float
    final_probs: np.ndarray
    hf_fraction_per_class: list[float] | None = None
    nonuniformity: list[dict] | None = None

    def to_json_dict(self) -> dict:
        from dataclasses import asdict

        return {
            "config": asdict(self.config),
            "per_epoch": [
                {"loss": l, "acc_val": a}
                for l, a in zip(self.train_loss, self.val_acc)
            ],
            "test_acc": self.test_acc,
            "hf_fraction_per_class": self.hf_fraction_per_class,
            "nonuniformity_sweep": self.nonuniformity,
        }


# --- datasets -------------------------------------------------------------

def cora_data_dir(data_dir: str | None = None) -> str | None:
    return data_dir if data_dir is not None else os.environ.get("DISTSIG_DATA_DIR")


def cora_available(data_dir: str | None = None) -> bool:
    d = cora_data_dir(data_dir)
    if not d:
        return False
    return all(
        os.path.isfile(os.path.join(d, f)) for f in ("cora.content", "cora.cites")
    )


def load_cora(content_path, cites_path):
    """Parse the raw citation-network format.

    Content lines: id, whitespace-separated binary features, class label.
    Cites lines: "cited citing" id pairs, mapped to undirected simple edges.
    Returns (graph, row-normalized features, integer labels, class names).
    """
    ids: dict[str, int] = {}
    feats: list[list[float]] = []
    labels_raw: list[str] = []
    fdim = None
    with open(content_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 3:
                raise GraphError(f"{content_path}:{lineno}: malformed content line")
            pid, label = parts[0], parts[-1]
            fv = parts[1:-1]
            if fdim is None:
                fdim = len(fv)
            elif len(fv) != fdim:
                raise GraphError(
                    f"{content_path}:{lineno}: expected {fdim} features, got {len(fv)}"
                )
            if pid in ids:
                raise GraphError(f"{content_path}:{lineno}: duplicate id {pid!r}")
            try:
                feats.append([float(c) for c in fv])
            except ValueError:
                raise GraphError(
                    f"{content_path}:{lineno}: non-numeric feature value"
                ) from None
            ids[pid] = len(ids)
            labels_raw.append(label)
    if not ids:
        raise GraphError(f"{content_path}: no content lines")

    classes = sorted(set(labels_raw))
    cindex = {c: k for k, c in enumerate(classes)}
    y = np.array([cindex[c] for c in labels_raw], dtype=np.int64)

    edges: set[tuple[int, int]] = set()
    n_lines = 0
    with open(cites_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            n_lines += 1
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"{cites_path}:{lineno}: malformed citation line")
            a, b = parts
            for pid in (a, b):
                if pid not in ids:
                    raise GraphError(
                        f"{cites_path}:{lineno}: dangling citation id {pid!r}"
                    )
            if a == b:
                log.warning("%s:%d: self-citation %r skipped", cites_path, lineno, a)
                continue
            u, v = ids[a], ids[b]
            edges.add((min(u, v), max(u, v)))
    if n_lines == 0:
        log.warning("%s: empty cites file, graph has no edges", cites_path)

    f = np.array(feats, dtype=float)
    rs = f.sum(axis=1)
    nz = rs > 0
    f[nz] = f[nz] / rs[nz][:, None]
    g = build_graph(len(ids), sorted(edges))
    return g, f, y, classes


def load_cora_dir(data_dir: str | None = None):
    d = cora_data_dir(data_dir)
    if not d or not cora_available(d):
        raise FileNotFoundError(
            "raw Cora files not found; set DISTSIG_DATA_DIR to a directory "
            "containing cora.content and cora.cites"
        )
    return load_cora(os.path.join(d, "cora.content"), os.path.join(d, "cora.cites"))


def sbm_features(n: int, feat_dim: int = 64) -> np.ndarray:
    """One-hot of node id modulo the feature width."""
    f = np.zeros((n, feat_dim))
    f[np.arange(n), np.arange(n) % feat_dim] = 1.0
    return f


def sbm_dataset(blocks=(50, 50, 50, 50), p_in: float = 0.1, p_out: float = 0.01,
                seed: int = 0, feat_dim: int = 64):
    g, y = sbm_generate(blocks, p_in, p_out, seed)
    return g, sbm_features(g.n, feat_dim), y


def make_split(labels, per_class: int, val_size: int, test_size: int, seed: int) -> Split:
    """Per-class training nodes, then a shuffled val/test pool; deterministic."""
    labels = np.asarray(labels)
    rng = np.random.default_rng((seed, 17))
    train: list[int] = []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < per_class:
            raise ValueError(
                f"class {cls} has {idx.size} nodes, fewer than per_class={per_class}"
            )
        train.extend(rng.permutation(idx)[:per_class].tolist())
    train_arr = np.array(sorted(train), dtype=np.int64)
    pool = np.setdiff1d(np.arange(labels.shape[0]), train_arr)
    if pool.size < val_size + test_size:
        raise ValueError(
            f"pool of {pool.size} nodes cannot supply val={val_size} + test={test_size}"
        )
    perm = rng.permutation(pool)
    val = np.sort(perm[:val_size])
    test = np.sort(perm[val_size:val_size + test_size])
    return Split(train_arr, val, test, seed)


# --- model ----------------------------------------------------------------

def propagation_matrix(g: Graph):
    """Sparse D~^{-1/2} (A + I) D~^{-1/2}; equals the dense view exactly."""
    n = g.n
    iu = [u for u, v in g.edges]
    ju = [v for u, v in g.edges]
    rows = np.array(iu + ju + list(range(n)))
    cols = np.array(ju + iu + list(range(n)))
    data = np.ones(rows.shape[0])
    at = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    deg = np.asarray(at.sum(axis=1)).ravel()
    dinv = 1.0 / np.sqrt(deg)
    return sp.csr_matrix(at.multiply(dinv[:, None]).multiply(dinv[None, :]))


def laplacian_sparse(g: Graph):
    n = g.n
    iu = [u for u, v in g.edges]
    ju = [v for u, v in g.edges]
    rows = np.array(iu + ju + list(range(n)))
    cols = np.array(ju + iu + list(range(n)))
    data = np.concatenate([-np.ones(2 * g.m), g.degrees])
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def init_params(feat_dim: int, hidden: int, classes: int, seed: int) -> GcnParams:
    rng = np.random.default_rng((seed, 0))

    def glorot(fan_in, fan_out):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_in, fan_out))

    return GcnParams(glorot(feat_dim, hidden), glorot(hidden, classes))


def gcn_forward(params: GcnParams, ahat, features, *, dropout: float = 0.0, rng=None):
    """Returns (logits, probabilities, cache).  Dropout only when rng given."""
    f = np.asarray(features, dtype=float)
    cache: dict = {}
    if rng is not None and dropout > 0.0:
        mask0 = (rng.random(f.shape) >= dropout) / (1.0 - dropout)
        f = f * mask0
    z1 = f @ params.w1
    a1 = ahat @ z1
    h = np.maximum(a1, 0.0)
    hd = h
    if rng is not None and dropout > 0.0:
        mask1 = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
        hd = h * mask1
        cache["mask1"] = mask1
    o = ahat @ (hd @ params.w2)
    if not np.all(np.isfinite(o)):
        raise RuntimeError("non-finite activations in forward pass")
    x = softmax_rows(o)
    cache.update(f=f, a1=a1, hd=hd)
    return o, x, cache


def gcn_backward(params: GcnParams, ahat, cache: dict, d_o: np.ndarray):
    dz2 = ahat @ d_o
    dw2 = cache["hd"].T @ dz2
    dhd = dz2 @ params.w2.T
    if "mask1" in cache:
        dhd = dhd * cache["mask1"]
    da1 = dhd * (cache["a1"] > 0.0)
    dz1 = ahat @ da1
    dw1 = cache["f"].T @ dz1
    return dw1, dw2


def _reg_value_and_grad(variant: str, o, x, lap, a_vec):
    """Regularizer value and its gradient in the logits (None for no gradient)."""
    if variant == "gcn":
        return 0.0, None
    if variant == "r3":
        lo = lap @ o
        return float(np.sum(o * lo)), 2.0 * lo
    if variant == "lap":
        onehot = np.zeros_like(x)
        onehot[np.arange(x.shape[0]), np.argmax(x, axis=1)] = 1.0
        ll = lap @ onehot
        val = float(np.sum(onehot * ll)) + float(np.sum((onehot * onehot) * a_vec[:, None]))
        return val, None
    xl = lap @ x
    l1 = float(np.sum(x * xl))
    l2 = float(np.sum((x * x) * a_vec[:, None]))
    if variant == "r":
        gx = 2.0 * (xl + a_vec[:, None] * x)
        return l1 + l2, softmax_vjp(x, gx)
    if variant == "r1":
        return l1, softmax_vjp(x, 2.0 * xl)
    if variant == "r2":
        return l2, softmax_vjp(x, 2.0 * a_vec[:, None] * x)
    raise ValueError(f"unknown variant {variant!r}")


def loss_and_grad(params: GcnParams, ahat, features, labels, train_idx, lap, a_vec,
                  cfg: TrainConfig, rng=None):
    """Full training objective and its parameter gradients.

    Cross-entropy is averaged over the training nodes and the regularizer trace
    over all nodes, so eta trades off comparable per-node quantities; the raw
    (unaveraged) trace is still returned for logging.  Weight decay acts on W1
    only.
    """
    o, x, cache = gcn_forward(params, ahat, features, dropout=cfg.dropout, rng=rng)
    k = train_idx.shape[0]
    n = features.shape[0]
    p = x[train_idx, labels[train_idx]]
    ce = -float(np.mean(np.log(np.maximum(p, 1e-12))))
    d_o = np.zeros_like(o)
    d_o[train_idx] = x[train_idx]
    d_o[train_idx, labels[train_idx]] -= 1.0
    d_o /= k

    reg, reg_grad = _reg_value_and_grad(cfg.variant, o, x, lap, a_vec)
    if reg_grad is not None:
        d_o = d_o + (cfg.eta / n) * reg_grad

    loss = ce + cfg.eta * (reg / n) + 0.5 * cfg.weight_decay * float(np.sum(params.w1 ** 2))
    dw1, dw2 = gcn_backward(params, ahat, cache, d_o)
    dw1 = dw1 + cfg.weight_decay * params.w1
    return loss, ce, reg, (dw1, dw2), x


def accuracy(probs, labels, idx) -> float:
    """Argmax accuracy; argmax resolves ties toward the lowest class index."""
    pred = np.argmax(probs[idx], axis=1)
    return float(np.mean(pred == labels[idx]))


class _Adam:
    def __init__(self, shapes, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.t = 0

    def step(self, weights, grads):
        self.t += 1
        for w, g, m, v in zip(weights, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * (g * g)
            mh = m / (1 - self.b1 ** self.t)
            vh = v / (1 - self.b2 ** self.t)
            w -= self.lr * mh / (np.sqrt(vh) + self.eps)


def train(g: Graph, features, labels, split: Split, cfg: TrainConfig, *,
          analysis: bool = True, component_spectrum=None) -> Metrics:
    """Train one model; deterministic for a fixed config.

    Model selection is best validation accuracy (earliest epoch on ties) and
    decides the reported test accuracy; the spectral / non-uniformity analysis
    summarizes the final-epoch outputs.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    ahat = propagation_matrix(g)
    lap = laplacian_sparse(g)
    a_vec = WeightDiag.default_for(g).a
    classes = int(labels.max()) + 1
    params = init_params(features.shape[1], cfg.hidden, classes, cfg.seed)
    drop_rng = np.random.default_rng((cfg.seed, 1))
    opt = _Adam([params.w1.shape, params.w2.shape], cfg.lr)

    tl, ta, vl, va, rv = [], [], [], [], []
    best_acc, best_epoch, best_params = -1.0, 0, params.copy()
    for epoch in range(1, cfg.epochs + 1):
        loss, _, _, grads, _ = loss_and_grad(
            params, ahat, features, labels, split.train, lap, a_vec, cfg, rng=drop_rng
        )
        if not np.isfinite(loss):
            raise RuntimeError(f"divergence (non-finite loss) at epoch {epoch}")
        opt.step([params.w1, params.w2], grads)

        o_eval, x_eval, _ = gcn_forward(params, ahat, features)
        p_val = x_eval[split.val, labels[split.val]]
        val_loss = -float(np.mean(np.log(np.maximum(p_val, 1e-12))))
        val_acc = accuracy(x_eval, labels, split.val)
        tl.append(loss)
        ta.append(accuracy(x_eval, labels, split.train))
        vl.append(val_loss)
        va.append(val_acc)
        # recorded regularizer is the raw trace on the clean post-update output
        rv.append(_reg_value_and_grad(cfg.variant, o_eval, x_eval, lap, a_vec)[0])
        if val_acc > best_acc:
            best_acc, best_epoch, best_params = val_acc, epoch, params.copy()

    _, x_final, _ = gcn_forward(params, ahat, features)
    _, x_best, _ = gcn_forward(best_params, ahat, features)
    test_acc = accuracy(x_best, labels, split.test)

    metrics = Metrics(cfg, tl, ta, vl, va, rv, best_epoch, test_acc, x_final)
    if analysis:
        an = output_analysis(g, x_final, component_spectrum=component_spectrum)
        metrics.hf_fraction_per_class = an["hf_fraction_per_class"]
        metrics.nonuniformity = an["nonuniformity_sweep"]
    return metrics


def output_analysis(g: Graph, probs, *, component_spectrum=None, normalize: bool = True,
                    cut: float = 0.5, eps_values=EPS_SWEEP_DEFAULT) -> dict:
    """Spectral profile per class column (on the main component) + count sweep."""
    probs = np.asarray(probs, dtype=float)
    if component_spectrum is None:
        sub, nodes = main_component(g)
        spectrum = laplacian_spectrum(sub)
    else:
        nodes, spectrum = component_spectrum
    hf = []
    for s in range(probs.shape[1]):
        col = probs[nodes, s]
        if normalize:
            try:
                col = normalize_signal(col)
            except ValueError:
                pass  # constant column: keep raw, energy sits at frequency zero
        hf.append(high_freq_fraction(gft(spectrum, col), cut))
    return {
        "hf_fraction_per_class": hf,
        "nonuniformity_sweep": nonuniformity_sweep(probs, eps_values),
        "entries_total": int(probs.size),
    }


def evaluate(params: GcnParams, g: Graph, features, labels, node_set, *,
             component_spectrum=None, normalize: bool = True, cut: float = 0.5,
             eps_values=EPS_SWEEP_DEFAULT) -> dict:
    """Accuracy on a node set plus the analysis bundle of the outputs."""
    ahat = propagation_matrix(g)
    _, x, _ = gcn_forward(params, ahat, np.asarray(features, dtype=float))
    out = output_analysis(
        g, x, component_spectrum=component_spectrum, normalize=normalize,
        cut=cut, eps_values=eps_values,
    )
    out["accuracy"] = accuracy(x, np.asarray(labels), np.asarray(node_set))
    return out


ETA_GRID = (0.1, 0.2, 0.5, 1.0)


def tune_eta(g, features, labels, split, cfg: TrainConfig, grid=ETA_GRID, **kw):
    """Grid-search eta by best validation accuracy; first grid entry wins ties."""
    best = None
    results = []
    for eta in grid:
        m = train(g, features, labels, split, replace(cfg, eta=eta), **kw)
        results.append(m)
        if best is None or max(m.val_acc) > max(best.val_acc):
            best = m
    return best, results
