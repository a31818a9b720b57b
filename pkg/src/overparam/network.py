"""Two-layer ReLU network ``f(W, x, a) = m^{-1/2} sum_r a_r relu(w_r . x)``.

Only the first layer ``W`` is trained; the signs ``a`` are fixed at
initialization.  The ReLU derivative at 0 is taken as 1 (``w . x >= 0``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DivergenceError, InputError
from .gram import h_at_step
from .rng import make_rng

DIVERGENCE_LIMIT = 1e12
TRACE_COLUMNS = ("k", "loss_sq", "max_move", "frob_move", "z_move", "flips", "step_residual")


@dataclass(eq=False)
class NetworkState:
    W: np.ndarray
    a: np.ndarray
    W0: np.ndarray
    kappa: float = 1.0

    def __post_init__(self):
        self.W = np.array(self.W, dtype=np.float64)
        self.a = np.array(self.a, dtype=np.float64).reshape(-1)
        W0 = np.array(self.W0, dtype=np.float64)
        if self.W.ndim != 2 or self.W.shape != W0.shape:
            raise InputError(f"W {self.W.shape} and W0 {W0.shape} must be equal 2-d shapes")
        if self.a.shape[0] != self.W.shape[0]:
            raise InputError(f"{self.a.shape[0]} output signs for {self.W.shape[0]} neurons")
        if not np.all(np.abs(self.a) == 1.0):
            raise InputError("output weights must be exactly +/-1")
        self.a.setflags(write=False)
        W0.setflags(write=False)
        self.W0 = W0

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    @classmethod
    def from_weights(cls, W, a, kappa=1.0) -> "NetworkState":
        W = np.asarray(W, dtype=np.float64)
        return cls(W.copy(), a, W.copy(), kappa)

    def copy(self) -> "NetworkState":
        return NetworkState(self.W.copy(), self.a.copy(), self.W0.copy(), self.kappa)


def init(m: int, d: int, kappa: float = 1.0, seed=0, stream: int = 0) -> NetworkState:
    """``w_r(0) ~ N(0, kappa^2 I_d)`` and ``a_r`` uniform on ``{-1, +1}``."""
    if m < 1 or d < 1:
        raise InputError("m and d must be at least 1")
    if not kappa > 0:
        raise InputError("kappa must be positive")
    rng = make_rng(seed, stream)
    W = kappa * rng.standard_normal((m, d))
    a = rng.choice(np.array([-1.0, 1.0]), size=m)
    return NetworkState(W, a, W.copy(), float(kappa))


def _X(X, d=None) -> np.ndarray:
    X = X.X if isinstance(X, Dataset) else np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if d is not None and X.shape[1] != d:
        raise InputError(f"inputs have dimension {X.shape[1]}, network expects {d}")
    return X


def _y(y, X) -> np.ndarray:
    if y is None:
        if isinstance(X, Dataset):
            return X.y
        raise InputError("labels required")
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    return y


def forward(net: NetworkState, X) -> np.ndarray:
    X = _X(X, net.d)
    pre = X @ net.W.T
    return np.maximum(pre, 0.0) @ net.a / math.sqrt(net.m)


def gradient(net: NetworkState, X, y=None, reg_beta: float = 0.0) -> np.ndarray:
    """``dL/dW``, one row per neuron; adds ``(beta/m)(w_r - w_r(0))`` when ``reg_beta > 0``."""
    y = _y(y, X)
    X = _X(X, net.d)
    pre = X @ net.W.T
    u = np.maximum(pre, 0.0) @ net.a / math.sqrt(net.m)
    act = (pre >= 0.0).astype(np.float64)
    g = (act * (u - y)[:, None]).T @ X
    g *= net.a[:, None] / math.sqrt(net.m)
    if reg_beta > 0:
        g += (reg_beta / net.m) * (net.W - net.W0)
    return g


def loss(net: NetworkState, X, y=None, reg_beta: float = 0.0) -> float:
    y = _y(y, X)
    r = y - forward(net, X)
    val = 0.5 * float(r @ r)
    if reg_beta > 0:
        val += reg_beta / (2.0 * net.m) * float(np.sum((net.W - net.W0) ** 2))
    return val


def count_at_risk(net: NetworkState, X, R: float) -> np.ndarray:
    """Per sample ``i``, the number of neurons with ``|w_r(0) . x_i| < R``."""
    if R < 0:
        raise InputError("R must be non-negative")
    X = _X(X, net.d)
    return np.count_nonzero(np.abs(X @ net.W0.T) < R, axis=1)


@dataclass(frozen=True)
class TrainConfig:
    eta: float
    steps: int
    reg_beta: float = 0.0
    record_every: int = 1
    record_residual: bool = False

    def __post_init__(self):
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise InputError("eta must be a finite non-negative number")
        if self.steps < 0:
            raise InputError("steps must be non-negative")
        if self.reg_beta < 0:
            raise InputError("reg_beta must be non-negative")
        if self.record_every < 1:
            raise InputError("record_every must be at least 1")


@dataclass
class TrainingTrace:
    """Per-step diagnostics, one entry per recorded step."""

    k: list = field(default_factory=list)
    loss_sq: list = field(default_factory=list)
    max_move: list = field(default_factory=list)
    frob_move: list = field(default_factory=list)
    z_move: list = field(default_factory=list)
    flips: list = field(default_factory=list)
    step_residual: list = field(default_factory=list)
    predictions: list = field(default_factory=list, repr=False)
    m: int = 0

    def __len__(self):
        return len(self.k)

    def rows(self):
        for j in range(len(self.k)):
            yield tuple(getattr(self, c)[j] for c in TRACE_COLUMNS)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for row in self.rows():
                w.writerow(_fmt(v) for v in row)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _record(trace, k, net, X, y, u, act0, xnorm2, residual, keep_predictions):
    r = y - u
    diff = net.W - net.W0
    row_norms = np.sqrt(np.sum(diff * diff, axis=1))
    changed = ((X @ net.W.T) >= 0.0) != act0  # (n, m)
    flips = int(np.count_nonzero(changed))
    # |Z(k) - Z(0)|_F^2 = (1/m) sum_{i,r} |x_i|^2 [pattern changed]
    z_sq = float(changed.sum(axis=1) @ xnorm2) / net.m
    trace.k.append(k)
    trace.loss_sq.append(float(r @ r))
    trace.max_move.append(float(row_norms.max()))
    trace.frob_move.append(float(np.sqrt(np.sum(diff * diff))))
    trace.z_move.append(math.sqrt(z_sq))
    trace.flips.append(flips)
    trace.step_residual.append(residual)
    if keep_predictions:
        trace.predictions.append(u.copy())


def train(
    net: NetworkState,
    X,
    y=None,
    cfg: TrainConfig | None = None,
    keep_predictions: bool = False,
    **kwargs,
) -> TrainingTrace:
    """Run full-batch gradient descent on ``net`` in place.

    Step ``k`` is recorded when ``k % record_every == 0`` and the last step is
    always recorded.  ``step_residual`` at step ``k`` is
    ``|u(k+1) - u(k) + eta H(k)(u(k) - y)|_2`` (``None`` unless
    ``record_residual``; ``None`` on the final step).

    Raises :class:`DivergenceError` when the squared residual becomes
    non-finite or exceeds ``1e12``.
    """
    if cfg is None:
        cfg = TrainConfig(**kwargs)
    elif kwargs:
        raise TypeError("pass either cfg or keyword settings, not both")
    y = _y(y, X)
    X = _X(X, net.d)
    if y.shape[0] != X.shape[0]:
        raise InputError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
    act0 = (X @ net.W0.T) >= 0.0
    xnorm2 = np.sum(X * X, axis=1)
    trace = TrainingTrace(m=net.m)
    u = forward(net, X)
    for k in range(cfg.steps + 1):
        r = y - u
        loss_sq = float(r @ r)
        if not math.isfinite(loss_sq) or loss_sq > DIVERGENCE_LIMIT:
            raise DivergenceError(k, loss_sq)
        last = k == cfg.steps
        recording = last or k % cfg.record_every == 0
        if recording:
            _record(trace, k, net, X, y, u, act0, xnorm2, None, keep_predictions)
        if last:
            break
        H = h_at_step(X, net.W).mat if (recording and cfg.record_residual) else None
        net.W -= cfg.eta * gradient(net, X, y, cfg.reg_beta)
        u_next = forward(net, X)
        if H is not None:
            trace.step_residual[-1] = float(np.linalg.norm(u_next - u + cfg.eta * H @ (u - y)))
        u = u_next
    return trace
