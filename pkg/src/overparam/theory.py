"""Closed-form predictions and bounds.

Hidden ``O``/``Omega`` constants are set to 1 and logarithms are natural;
width calculators give orders of magnitude, not guarantees.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import spectral
from .errors import InputError


class TheoremVariant(enum.Enum):
    QUARTIC = "quartic"
    CUBIC = "cubic"
    QUADRATIC = "quadratic"
    REGULARIZED = "regularized"
    # width requirement of the Gram concentration result; no step-size rule
    CONCENTRATION = "concentration"

    @classmethod
    def parse(cls, value) -> "TheoremVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"reg": "regularized", "conc": "concentration"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InputError(f"unknown theorem variant {value!r}") from None


# which assumption parts each variant consumes
REQUIRED_PARTS = {
    TheoremVariant.QUARTIC: (1,),
    TheoremVariant.CUBIC: (1, 2),
    TheoremVariant.QUADRATIC: (1, 2, 4),
    TheoremVariant.REGULARIZED: (1,),
    TheoremVariant.CONCENTRATION: (1, 2, 3),
}


def _get(constants, name):
    if isinstance(constants, dict):
        key = "lambda" if name == "lam" else name
        return constants.get(key, constants.get(name))
    return getattr(constants, name, None)


def _require(constants, variant):
    parts = REQUIRED_PARTS[variant]
    lam = _get(constants, "lam")
    if lam is None or not lam > 0:
        raise InputError(f"{variant.value}: assumption part 1 requires lambda > 0 (got {lam})")
    out = {"lam": float(lam)}
    if 2 in parts:
        alpha = _get(constants, "alpha")
        if alpha is None or not alpha > 0:
            raise InputError(f"{variant.value}: assumption part 2 requires alpha > 0 (got {alpha})")
        out["alpha"] = float(alpha)
    if 3 in parts:
        beta = _get(constants, "beta_var")
        if beta is None or beta < 0:
            raise InputError(f"{variant.value}: assumption part 3 requires beta_var >= 0 (got {beta})")
        out["beta_var"] = float(beta)
    if 4 in parts:
        th = _get(constants, "theta")
        if th is None or th < 0:
            raise InputError(f"{variant.value}: assumption part 4 requires theta >= 0 (got {th})")
        out["theta"] = float(th)
    return out


def step_size(variant, constants, n: int) -> float:
    """Step size used in the convergence proofs.

    quartic ``lambda/(4n^2)``, cubic and quadratic ``lambda/(4 alpha n)``,
    regularized ``lambda/(16n^2)``.
    """
    variant = TheoremVariant.parse(variant)
    if variant is TheoremVariant.CONCENTRATION:
        raise InputError("the concentration result has no step-size rule")
    c = _require(constants, variant)
    if variant is TheoremVariant.QUARTIC:
        return c["lam"] / (4.0 * n * n)
    if variant is TheoremVariant.REGULARIZED:
        return c["lam"] / (16.0 * n * n)
    return c["lam"] / (4.0 * c["alpha"] * n)


def radius_R(variant, constants, n: int) -> float:
    """Largest weight movement the analysis tolerates."""
    variant = TheoremVariant.parse(variant)
    if variant is TheoremVariant.CONCENTRATION:
        raise InputError("the concentration result has no radius")
    c = _require(constants, variant)
    if variant is TheoremVariant.QUADRATIC:
        factor = min(1.0 / math.sqrt(1.0 + c["theta"] ** 2), 1.0 / math.sqrt(c["alpha"]))
        return c["lam"] / (64.0 * math.sqrt(n)) * factor
    return c["lam"] / (64.0 * n)


def movement_bound_D(n: int, loss0_norm: float, m: int, lam: float, variant="quartic", alpha=None) -> float:
    """Bound on ``max_r |w_r(k) - w_r(0)|_2``.

    ``4 sqrt(n)|y-u(0)| / (sqrt(m) lambda)``; cubic/quadratic replace
    ``sqrt(n)`` by ``sqrt(alpha)``; regularized uses ``8 sqrt(n)``.
    """
    variant = TheoremVariant.parse(variant)
    if m < 1:
        raise InputError("m must be at least 1")
    if not lam > 0:
        raise InputError("lambda must be positive")
    if variant in (TheoremVariant.CUBIC, TheoremVariant.QUADRATIC):
        if alpha is None or alpha < 0:
            raise InputError(f"{variant.value}: movement bound needs alpha (assumption part 2)")
        lead = 4.0 * math.sqrt(alpha)
    elif variant is TheoremVariant.REGULARIZED:
        lead = 8.0 * math.sqrt(n)
    else:
        lead = 4.0 * math.sqrt(n)
    return lead * loss0_norm / (math.sqrt(m) * lam)


def movement_bound_D_cts(n: int, loss0_norm: float, m: int, lam: float) -> float:
    """Continuous-time movement ``sqrt(n)|y-u(0)| / (sqrt(m) lambda)``."""
    if m < 1 or not lam > 0:
        raise InputError("need m >= 1 and lambda > 0")
    return math.sqrt(n) * loss0_norm / (math.sqrt(m) * lam)


def regularization_offset(reg_beta: float, D: float, m: int, eta: float, lam: float) -> float:
    """Additive term ``8 beta D^2 / (m eta lambda)`` of the regularized bound."""
    if reg_beta == 0:
        return 0.0
    if not (eta > 0 and lam > 0):
        raise InputError("eta and lambda must be positive")
    return 8.0 * reg_beta * D * D / (m * eta * lam)


def rate_bound(loss0_sq: float, eta: float, lam: float, k, offset: float = 0.0):
    """``(1 - eta lambda/2)^k |u(0) - y|^2 + offset``; ``k`` may be an array."""
    q = eta * lam / 2.0
    if not (0.0 <= q < 1.0):
        raise InputError(f"eta*lambda = {eta * lam:g} must lie in [0, 2)")
    k = np.asarray(k, dtype=np.float64)
    out = loss0_sq * np.power(1.0 - q, k) + offset
    return float(out) if out.ndim == 0 else out


def max_reg_beta(m: int, lam: float, n: int, eta: float, K: int) -> float:
    """Largest admissible ``beta = min(m^2 lambda/(128 K^2 n eta), m/(4 K eta))``."""
    if K < 1:
        raise InputError("K must be at least 1")
    return min(m * m * lam / (128.0 * K * K * n * eta), m / (4.0 * K * eta))


def check_reg_beta(reg_beta: float, m: int, lam: float, n: int, eta: float, K: int) -> None:
    """Raise :class:`InputError` naming the violated admissibility inequality."""
    if K < 1:
        raise InputError("K must be at least 1")
    b1 = m * m * lam / (128.0 * K * K * n * eta)
    b2 = m / (4.0 * K * eta)
    if reg_beta > b1:
        raise InputError(
            f"reg_beta={reg_beta:g} violates beta <= m^2 lambda/(128 K^2 n eta) = {b1:g}"
        )
    if reg_beta > b2:
        raise InputError(f"reg_beta={reg_beta:g} violates beta <= m/(4 K eta) = {b2:g}")


@dataclass
class PredictionCurve:
    steps: np.ndarray
    values: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("k", "predicted"))
            for k, v in zip(self.steps, self.values):
                w.writerow((int(k), repr(float(v))))


def eigen_prediction(H_cts, y, eta: float, ks) -> PredictionCurve:
    """``|u(k) - y|_2 ~ (sum_i (1 - eta lambda_i)^{2k} (v_i . y)^2)^{1/2}``."""
    vals, vecs = spectral.sym_eig(H_cts)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != vals.shape[0]:
        raise InputError(f"labels have length {y.shape[0]}, matrix order {vals.shape[0]}")
    if eta * vals[-1] > 1.0:
        warnings.warn(f"eta * lambda_max = {eta * vals[-1]:.3g} > 1: some factors exceed 1 in magnitude")
    proj2 = (vecs.T @ y) ** 2
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    factors = np.abs(1.0 - eta * vals)
    out = np.array([math.sqrt(float(np.sum(factors ** (2 * int(k)) * proj2))) for k in ks])
    return PredictionCurve(ks, out)


def kappa_guidance(eps: float, n: int, m: int, delta: float) -> float:
    """``eps / (sqrt(2n log(2mn/delta)) log(4n/delta))`` with unit constant; guidance only."""
    return eps / (math.sqrt(2.0 * n * math.log(2.0 * m * n / delta)) * math.log(4.0 * n / delta))


def required_width(variant, constants, n: int, delta: float) -> float:
    """Width requirement with unit leading constant.

    quartic ``lambda^-4 n^4 log^3(n/delta)``; cubic ``... n^3 ... alpha``;
    quadratic ``... n^2 ... alpha(alpha + theta^2)``; regularized
    ``lambda^-4 n^4 log(n/delta)``; concentration
    ``(lambda^-2 beta + lambda^-1 alpha) log(n/delta)``.
    """
    variant = TheoremVariant.parse(variant)
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    c = _require(constants, variant)
    lam = c["lam"]
    L = math.log(n / delta)
    if variant is TheoremVariant.QUARTIC:
        return lam ** -4 * n ** 4 * L ** 3
    if variant is TheoremVariant.CUBIC:
        return lam ** -4 * n ** 3 * L ** 3 * c["alpha"]
    if variant is TheoremVariant.QUADRATIC:
        return lam ** -4 * n ** 2 * L ** 3 * c["alpha"] * (c["alpha"] + c["theta"] ** 2)
    if variant is TheoremVariant.REGULARIZED:
        return lam ** -4 * n ** 4 * L
    return (c["beta_var"] / lam ** 2 + c["alpha"] / lam) * L


class GeneralizationBound(NamedTuple):
    leading: float  # sqrt(2 y^T H^-1 y / n)
    log_term: float  # sqrt(log(n/(lambda delta)) / (2n)), unit constant

    @property
    def total(self) -> float:
        return self.leading + self.log_term


def generalization_bound(H_cts, y, n: int | None = None, delta: float = 0.1) -> GeneralizationBound:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = y.shape[0] if n is None else n
    x = spectral.solve_spd(H_cts, y)
    q = max(float(y @ x), 0.0)
    lam = spectral.min_eigenvalue(H_cts)
    log_term = math.sqrt(max(math.log(n / (lam * delta)), 0.0) / (2.0 * n))
    return GeneralizationBound(math.sqrt(2.0 * q / n), log_term)
