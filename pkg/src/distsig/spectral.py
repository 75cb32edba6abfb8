"""Graph Fourier analysis: eigendecomposition, transforms, total variation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, laplacian

# hand-rolled Jacobi below this size, LAPACK above (same contract either way)
JACOBI_MAX_N = 64


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _jacobi_eig(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm dies."""
    a = a.astype(float).copy()
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    off = np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2))
    for _ in range(max_sweeps):
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # two-sided rotation on rows/cols p, q
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = ap * c - aq * s
                a[:, q] = aq * c + ap * s
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = ap * c - aq * s
                a[q, :] = aq * c + ap * s
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * c - vq * s
                v[:, q] = vq * c + vp * s
        off = np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2))
    if off > tol:
        raise RuntimeError(f"no convergence after {max_sweeps} sweeps (off-norm {off:.3e})")
    return a.diagonal().copy(), v


def _canonical_signs(u: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (first on ties) is positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        k = int(np.argmax(np.abs(u[:, j])))
        if u[k, j] < 0:
            u[:, j] = -u[:, j]
    return u


def eig_sym(mat: np.ndarray, validate: bool = True) -> Spectrum:
    """Full symmetric eigendecomposition with a deterministic sign convention.

    Ascending eigenvalues; for a Laplacian input the smallest must be ~0 and
    none may be meaningfully negative.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"need a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("non-finite entries")
    asym = np.max(np.abs(mat - mat.T)) if mat.size else 0.0
    if asym > 1e-10:
        raise ValueError(f"matrix not symmetric (max asymmetry {asym:.3e})")
    n = mat.shape[0]
    if n <= JACOBI_MAX_N:
        vals, vecs = _jacobi_eig(mat)
    else:
        vals, vecs = np.linalg.eigh(mat)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = _canonical_signs(vecs[:, order])
    if validate:
        scale = max(1.0, float(np.max(np.abs(mat))))
        ortho = np.max(np.abs(vecs.T @ vecs - np.eye(n)))
        if ortho > 1e-8:
            raise RuntimeError(f"eigenvectors not orthonormal (err {ortho:.3e})")
        resid = np.max(np.abs(mat @ vecs - vecs * vals[None, :]))
        if resid > 1e-8 * scale:
            raise RuntimeError(f"eigenpair residual {resid:.3e} too large")
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return Spectrum(vals, vecs)


def laplacian_spectrum(g: Graph) -> Spectrum:
    spec = eig_sym(laplacian(g))
    if spec.eigenvalues[0] < -1e-10:
        raise RuntimeError(f"negative Laplacian eigenvalue {spec.eigenvalues[0]:.3e}")
    return spec


def gft(spec: Spectrum, x) -> np.ndarray:
    """Forward transform: coefficients of x in the eigenvector basis."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n,):
        raise ValueError(f"signal length {x.shape} does not match n={spec.n}")
    return spec.eigenvectors.T @ x


def igft(spec: Spectrum, xhat) -> np.ndarray:
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape != (spec.n,):
        raise ValueError(f"coefficient length {xhat.shape} does not match n={spec.n}")
    return spec.eigenvectors @ xhat


def total_variation(g: Graph, x) -> float:
    """Sum of squared differences across edges; cross-checked against x^T L x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"signal length {x.shape} does not match n={g.n}")
    edge_sum = 0.0
    for u, v in g.edges:
        d = x[u] - x[v]
        edge_sum += d * d
    quad = float(x @ laplacian(g) @ x)
    if abs(edge_sum - quad) > 1e-10 * max(1.0, abs(edge_sum)):
        raise RuntimeError(f"TV forms disagree: edge {edge_sum!r} vs quad {quad!r}")
    return edge_sum


def high_freq_fraction(xhat, cut: float = 0.5) -> float:
    """Share of spectral energy strictly above position cut*n (1-based index)."""
    if not (0.0 < cut < 1.0):
        raise ValueError(f"cut must be in (0, 1), got {cut}")
    xhat = np.asarray(xhat, dtype=float)
    total = float(xhat @ xhat)
    if total == 0.0:
        raise ValueError("zero vector has no spectral profile")
    n = xhat.shape[0]
    idx = np.arange(1, n + 1)
    return float(xhat[idx > cut * n] @ xhat[idx > cut * n]) / total


def normalize_signal(x, center: bool = True) -> np.ndarray:
    """Mean-center (optional) and scale to unit l2 norm."""
    x = np.asarray(x, dtype=float)
    if center:
        x = x - x.mean()
    nrm = float(np.linalg.norm(x))
    if nrm == 0.0:
        raise ValueError("cannot normalize a constant/zero signal")
    return x / nrm


def matched_random_signal(labels, seed: int) -> np.ndarray:
    """i.i.d. draw per node from the empirical distribution of the label signal."""
    labels = np.asarray(labels)
    values, counts = np.unique(labels, return_counts=True)
    rng = np.random.default_rng(seed)
    return rng.choice(values, size=labels.shape[0], p=counts / counts.sum()).astype(float)


def export_spectrum_csv(path, eigenvalues, coefficients) -> None:
    """Write "index,eigenvalue,coefficient" rows, index 1-based."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    coefficients = np.asarray(coefficients, dtype=float)
    if eigenvalues.shape != coefficients.shape:
        raise ValueError("eigenvalue/coefficient length mismatch")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,eigenvalue,coefficient\n")
        for i, (lam, c) in enumerate(zip(eigenvalues, coefficients), 1):
            # python float repr: shortest round-trip form, no numpy scalar noise
            fh.write(f"{i},{float(lam)!r},{float(c)!r}\n")
