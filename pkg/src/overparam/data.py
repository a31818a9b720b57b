"""Datasets of unit-norm inputs with real labels.

Generators draw from :func:`overparam.rng.make_rng`, so a ``(seed, stream)``
pair reproduces a dataset bit for bit.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError, ValidationError
from .rng import make_rng

UNIT_TOL = 1e-10
NORMALIZE_TOL = 1e-6
LABEL_WARN = 10.0


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` inputs of dimension ``d`` (one row each) plus labels ``y``."""

    X: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise InputError(f"X must be a non-empty 2-d array, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise InputError(f"{X.shape[0]} inputs but {y.shape[0]} labels")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValidationError("dataset contains non-finite values")
        norms = np.linalg.norm(X, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
        if bad.size:
            i = int(bad[0])
            raise ValidationError(f"row {i} has norm {norms[i]!r}; inputs must be unit vectors")
        if np.any(np.abs(y) > LABEL_WARN):
            warnings.warn(f"labels exceed |y| <= {LABEL_WARN:g}; the analysis assumes O(1) labels")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def with_labels(self, y) -> "Dataset":
        return Dataset(self.X, np.asarray(y, dtype=np.float64), dict(self.meta))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)


def normalize_rows(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ValidationError("cannot normalize a zero row")
    return X / norms[:, None]


def make_labels(X, mode, rng) -> np.ndarray:
    """Build labels for ``X``.

    ``mode`` is ``"random"`` (fair +/-1 coins), ``"ones"``, ``"eigvec:j"``
    (the eigenvector of the continuous Gram matrix with the ``j``-th largest
    eigenvalue, unit norm), or an explicit array.
    """
    n = X.shape[0]
    if not isinstance(mode, str):
        y = np.asarray(mode, dtype=np.float64).reshape(-1)
        if y.shape[0] != n:
            raise InputError(f"expected {n} labels, got {y.shape[0]}")
        return y
    if mode == "random":
        return rng.choice(np.array([-1.0, 1.0]), size=n)
    if mode == "ones":
        return np.ones(n)
    if mode.startswith("eigvec:"):
        from .gram import hcts_matrix
        from .spectral import sym_eig

        try:
            j = int(mode.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad label mode {mode!r}") from exc
        if not 0 <= j < n:
            raise InputError(f"eigenvector index {j} out of range for n={n}")
        _, vecs = sym_eig(hcts_matrix(X))
        v = vecs[:, n - 1 - j].copy()
        # fix the sign so the largest-magnitude entry is positive
        k = int(np.argmax(np.abs(v)))
        if v[k] < 0:
            v = -v
        return v
    raise InputError(f"unknown label mode {mode!r}")


def gen_orthogonal(n: int, seed=0, stream: int = 0, labels="random") -> Dataset:
    """``n`` orthonormal inputs in ``R^n``: the standard basis under a Haar-random rotation."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = make_rng(seed, stream)
    if n == 1:
        Q = np.array([[rng.choice([-1.0, 1.0])]])
    else:
        from scipy.stats import ortho_group

        Q = ortho_group.rvs(n, random_state=rng)
    X = np.ascontiguousarray(Q.T)
    y = make_labels(X, labels, rng)
    return Dataset(X, y, {"kind": "orthogonal", "n": n})


def gen_gaussian_sphere(n: int, d: int, seed=0, stream: int = 0, labels="random") -> Dataset:
    """``x_i = g_i / |g_i|`` with ``g_i ~ N(0, I_d)``."""
    if n < 1 or d < 1:
        raise InputError("n and d must be at least 1")
    rng = make_rng(seed, stream)
    G = rng.standard_normal((n, d))
    while True:
        zero = np.linalg.norm(G, axis=1) == 0
        if not zero.any():
            break
        G[zero] = rng.standard_normal((int(zero.sum()), d))
    X = normalize_rows(G)
    y = make_labels(X, labels, rng)
    return Dataset(X, y, {"kind": "gaussian", "n": n, "d": d})


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, Dataset):
        return X.X
    return np.asarray(X, dtype=np.float64)


def theta(X) -> float:
    """Smallest ``theta`` with ``|x_i . x_j| <= theta / sqrt(n)`` for all ``i != j``."""
    X = _as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise InputError("theta needs at least two samples")
    G = np.abs(X @ X.T)
    np.fill_diagonal(G, 0.0)
    return math.sqrt(n) * float(G.max())


def save_csv(ds: Dataset, path) -> None:
    header = [f"x{j}" for j in range(ds.d)] + ["y"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row, label in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(label))])


def load_csv(path, normalize: bool = False) -> Dataset:
    """Read a dataset CSV with header ``x0,...,x{d-1},y``.

    Rows whose norm is off by more than ``1e-6`` are rescaled when
    ``normalize`` is set and rejected otherwise.  Zero rows are always
    rejected.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        d = len(header) - 1
        expected = [f"x{j}" for j in range(d)] + ["y"]
        if d < 1 or header != expected:
            raise ParseError(f"header must be {','.join(expected) if d >= 1 else 'x0,...,y'}", line=1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != d + 1:
                raise ParseError(f"expected {d + 1} fields, got {len(rec)}", line=lineno)
            try:
                vals = [float(c) for c in rec]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite value", line=lineno)
            rows.append(vals)
    if not rows:
        raise ParseError("no data rows", line=2)
    arr = np.array(rows, dtype=np.float64)
    X, y = arr[:, :d], arr[:, d]
    norms = np.linalg.norm(X, axis=1)
    for i, nrm in enumerate(norms):
        if nrm == 0:
            raise ValidationError(f"row {i} (line {i + 2}) is zero and cannot be a unit vector")
        if abs(nrm - 1.0) > NORMALIZE_TOL and not normalize:
            raise ValidationError(
                f"row {i} (line {i + 2}) has norm {nrm:.6g}; pass normalize=True to rescale"
            )
    if normalize:
        X = X / norms[:, None]
    elif np.any(np.abs(norms - 1.0) > UNIT_TOL):
        # within the load tolerance but outside the dataset invariant
        X = X / norms[:, None]
    return Dataset(X, y, {"source": str(path)})
