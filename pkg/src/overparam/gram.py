"""Gram matrices of the first-layer NTK and the data-dependent constants.

All indicator matrices use ``w . x >= 0`` (boundary counted as active), the
same convention as :mod:`overparam.network`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .data import Dataset, theta as data_theta
from .errors import InputError
from .rng import make_rng

# rows of W processed per block when accumulating activation counts
_BLOCK_ELEMS = 1 << 22


class GramKind(enum.Enum):
    CTS = "cts"
    SINGLE_W = "single_w"
    DIS = "dis"
    AT_STEP = "at_step"
    PERP = "perp"


@dataclass(frozen=True, eq=False)
class GramMatrix:
    kind: GramKind
    mat: np.ndarray
    raw: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @property
    def raw_frobenius(self) -> float:
        """Frobenius norm of the unsymmetrized matrix (equals ``frobenius`` unless PERP)."""
        src = self.mat if self.raw is None else self.raw
        return spectral.frobenius_norm(src)

    @property
    def frobenius(self) -> float:
        return spectral.frobenius_norm(self.mat)

    def min_eigenvalue(self) -> float:
        return spectral.min_eigenvalue(self.mat)


def _inputs(X) -> np.ndarray:
    if isinstance(X, Dataset):
        return X.X
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InputError(f"inputs must be a 2-d array, got shape {X.shape}")
    return X


def _weights(W, d) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W[None, :]
    if W.ndim != 2 or W.shape[1] != d:
        raise InputError(f"weights must have shape (m, {d}), got {W.shape}")
    return W


def hcts_matrix(X) -> np.ndarray:
    """``E_w[H(w)]`` in closed form: ``x_i.x_j (pi - arccos(cos_ij)) / (2 pi)``.

    The cosine is clamped to ``[-1, 1]`` and pinned to exactly 1 on the
    diagonal; ``arccos`` has infinite slope at 1, so a unit vector whose
    self inner product rounds to ``1 - 1e-16`` would otherwise lose ~1e-9.
    """
    X = _inputs(X)
    G = X @ X.T
    G = 0.5 * (G + G.T)
    norms = np.sqrt(np.diag(G))
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = G / np.outer(norms, norms)
    cos = np.nan_to_num(cos, nan=0.0)
    np.clip(cos, -1.0, 1.0, out=cos)
    np.fill_diagonal(cos, 1.0)
    return G * (math.pi - np.arccos(cos)) / (2.0 * math.pi)


def hcts(X) -> GramMatrix:
    return GramMatrix(GramKind.CTS, hcts_matrix(X))


def activations(X, W) -> np.ndarray:
    """Boolean ``(m, n)`` pattern ``w_r . x_i >= 0``."""
    X = _inputs(X)
    W = _weights(W, X.shape[1])
    return (W @ X.T) >= 0.0


def h_of_w(X, w) -> GramMatrix:
    X = _inputs(X)
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.shape[0] != X.shape[1]:
        raise InputError(f"w has length {w.shape[0]}, expected {X.shape[1]}")
    ind = (X @ w) >= 0.0
    G = X @ X.T
    G = 0.5 * (G + G.T)
    return GramMatrix(GramKind.SINGLE_W, G * np.outer(ind, ind))


def activation_counts(X, W) -> np.ndarray:
    """``C[i, j] = #{r : w_r.x_i >= 0 and w_r.x_j >= 0}`` as exact float64 integers."""
    X = _inputs(X)
    W = _weights(W, X.shape[1])
    n = X.shape[0]
    counts = np.zeros((n, n))
    block = max(1, _BLOCK_ELEMS // max(n, 1))
    for start in range(0, W.shape[0], block):
        A = ((W[start:start + block] @ X.T) >= 0.0).astype(np.float64)
        counts += A.T @ A
    return counts


def _mean_gram(X, W, kind) -> GramMatrix:
    X = _inputs(X)
    W = _weights(W, X.shape[1])
    m = W.shape[0]
    if m == 0:
        raise InputError("need at least one weight vector")
    G = X @ X.T
    G = 0.5 * (G + G.T)
    return GramMatrix(kind, G * (activation_counts(X, W) / m))


def hdis(X, W) -> GramMatrix:
    """``(1/m) sum_r H(w_r)`` over the rows of ``W``.

    Activation counts are integers, so the result does not depend on
    summation order or blocking.
    """
    return _mean_gram(X, W, GramKind.DIS)


def h_at_step(X, W) -> GramMatrix:
    """``H(k)`` for the current weights ``W = W(k)``."""
    return _mean_gram(X, W, GramKind.AT_STEP)


def h_perp(X, W_k, W0, R: float) -> GramMatrix:
    """Part of ``H(k)`` carried by neurons that may flip on ``x_i``.

    Row ``i`` only sums over ``r`` with ``|w_r(0).x_i| < R``, so the raw matrix
    is not symmetric.  ``raw`` keeps it; ``mat`` is its symmetric part.
    """
    X = _inputs(X)
    W_k = _weights(W_k, X.shape[1])
    W0 = _weights(W0, X.shape[1])
    if W_k.shape != W0.shape:
        raise InputError(f"W_k {W_k.shape} and W0 {W0.shape} differ in shape")
    if R < 0:
        raise InputError("R must be non-negative")
    m = W_k.shape[0]
    A = ((W_k @ X.T) >= 0.0).astype(np.float64)
    risk = (np.abs(W0 @ X.T) < R).astype(np.float64)
    counts = (risk * A).T @ A
    G = X @ X.T
    G = 0.5 * (G + G.T)
    raw = G * (counts / m)
    return GramMatrix(GramKind.PERP, 0.5 * (raw + raw.T), raw)


@dataclass
class AssumptionConstants:
    """Estimates of the data-dependent constants.

    ``alpha`` is the sample maximum of ``|H(w) - H^cts|_2`` (so ``gamma`` is
    reported as 0); ``alpha_quantiles`` holds empirical quantiles for
    diagnostics only.
    """

    lam: float
    alpha: float
    beta_var: float
    gamma: float
    theta: float
    sample_count: int
    alpha_quantiles: dict = field(default_factory=dict)
    deviation_norms: np.ndarray | None = field(default=None, repr=False)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "alpha": self.alpha,
            "beta_var": self.beta_var,
            "gamma": self.gamma,
            "theta": self.theta,
            "sample_count": self.sample_count,
        }


def deviation_stats(X, W, H_cts=None, block: int = 256):
    """Per-sample ``|H(w_r) - H^cts|_2`` and the matrix ``mean_r (H(w_r)-H^cts)^2``."""
    X = _inputs(X)
    W = _weights(W, X.shape[1])
    Hc = hcts_matrix(X) if H_cts is None else np.asarray(H_cts, dtype=np.float64)
    G = X @ X.T
    G = 0.5 * (G + G.T)
    n = X.shape[0]
    M = W.shape[0]
    norms = np.empty(M)
    second = np.zeros((n, n))
    for start in range(0, M, block):
        ind = ((W[start:start + block] @ X.T) >= 0.0).astype(np.float64)
        Hw = G[None, :, :] * (ind[:, :, None] * ind[:, None, :])
        dev = Hw - Hc[None, :, :]
        vals = np.linalg.eigvalsh(dev)
        norms[start:start + block] = np.maximum(np.abs(vals[:, 0]), np.abs(vals[:, -1]))
        second += np.einsum("bij,bkj->ik", dev, dev)
    return norms, second / M


def estimate_constants(X, M: int, seed=0, stream: int = 0) -> AssumptionConstants:
    """Estimate ``lambda, alpha, beta_var, gamma, theta`` from ``M`` Gaussian draws of ``w``."""
    X = _inputs(X)
    if M < 1:
        raise InputError("sample count M must be at least 1")
    rng = make_rng(seed, stream)
    Hc = hcts_matrix(X)
    lam = spectral.min_eigenvalue(Hc)
    W = rng.standard_normal((M, X.shape[1]))
    norms, second = deviation_stats(X, W, Hc)
    notes = []
    if lam <= 0:
        msg = f"degenerate data: lambda_min(H^cts) = {lam:.3e} <= 0"
        notes.append(msg)
        warnings.warn(msg)
    n = X.shape[0]
    return AssumptionConstants(
        lam=lam,
        alpha=float(norms.max()),
        beta_var=spectral.spectral_norm(second),
        gamma=0.0,
        theta=data_theta(X) if n >= 2 else 0.0,
        sample_count=M,
        alpha_quantiles={g: float(np.quantile(norms, 1.0 - g)) for g in (0.01, 0.05)},
        deviation_norms=norms,
        notes=notes,
    )


def write_matrix_csv(path, mat) -> None:
    """Write an ``n x n`` grid of floats, no header."""
    mat = np.asarray(mat, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        for row in mat:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
