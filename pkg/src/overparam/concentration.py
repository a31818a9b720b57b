"""Monte-Carlo checks of the probability lemmas.

Trial ``i`` draws from ``make_rng(seed, i)``; trials may run on worker
threads but reports are assembled in trial order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from . import spectral
from ._parallel import ordered_map
from .data import Dataset
from .errors import InputError
from .gram import activation_counts, hcts_matrix, hdis
from .rng import make_rng

MAX_T_OVER_SIGMA = 0.2
MIN_ANTI_SAMPLES = 100_000


@dataclass
class TrialReport:
    statistic: str
    values: np.ndarray
    threshold: float
    violation_count: int
    predicted_failure_prob: float
    lower_threshold: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return len(self.values)

    def violated(self) -> np.ndarray:
        v = self.values > self.threshold
        if self.lower_threshold is not None:
            v |= self.values < self.lower_threshold
        return v

    def summary(self) -> dict:
        return {
            "statistic": self.statistic,
            "trials": self.trials,
            "threshold": self.threshold,
            "lower_threshold": self.lower_threshold,
            "violations": self.violation_count,
            "predicted_failure_prob": self.predicted_failure_prob,
            "mean": float(np.mean(self.values)),
            "max": float(np.max(self.values)),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("trial", "statistic", "violated"))
            for i, (v, bad) in enumerate(zip(self.values, self.violated())):
                w.writerow((i, repr(float(v)), int(bad)))


def _report(statistic, values, threshold, predicted, lower=None, extra=None) -> TrialReport:
    values = np.asarray(values, dtype=np.float64)
    rep = TrialReport(statistic, values, float(threshold), 0, float(predicted), lower, extra or {})
    rep.violation_count = int(np.count_nonzero(rep.violated()))
    return rep


def _inputs(X) -> np.ndarray:
    return X.X if isinstance(X, Dataset) else np.asarray(X, dtype=np.float64)


def matrix_bernstein_tail(n1: int, n2: int, var: float, M: float, t: float) -> float:
    """``min(1, (n1 + n2) exp(-(t^2/2) / (var + M t / 3)))``."""
    if var < 0 or not M > 0 or t < 0:
        raise InputError("need var >= 0, M > 0 and t >= 0")
    if t == 0:
        return 1.0
    return min(1.0, (n1 + n2) * math.exp(-(t * t / 2.0) / (var + M * t / 3.0)))


def _field(constants, name) -> float:
    if isinstance(constants, dict):
        return float(constants[name])
    return float(getattr(constants, name))


def gram_concentration_trial(X, m: int, trials: int, seed=0, constants=None) -> TrialReport:
    """Per trial: ``|H^dis - H^cts|_F`` with fresh Gaussian weights, threshold ``lambda/4``.

    ``extra`` carries the spectral-norm deviations and ``lambda_min(H^dis)``.
    When ``constants`` (with ``alpha``, ``beta_var``) is given, the predicted
    failure probability is the matrix Bernstein tail for the spectral
    deviation at ``t = lambda/4``; otherwise it is NaN.
    """
    X = _inputs(X)
    if trials < 1 or m < 1:
        raise InputError("trials and m must be at least 1")
    Hc = hcts_matrix(X)
    lam = spectral.min_eigenvalue(Hc)
    n, d = X.shape

    def one(i):
        W = make_rng(seed, i).standard_normal((m, d))
        dev = hdis(X, W).mat - Hc
        return (
            spectral.frobenius_norm(dev),
            spectral.spectral_norm(dev),
            spectral.min_eigenvalue(Hc + dev),
            float(np.abs(dev).max()),
        )

    rows = np.array(ordered_map(one, range(trials)))
    predicted = float("nan")
    if constants is not None:
        alpha, beta = (_field(constants, k) for k in ("alpha", "beta_var"))
        predicted = matrix_bernstein_tail(n, n, beta / m, max(alpha, 1e-300) / m, lam / 4.0)
    return _report(
        "frobenius_deviation",
        rows[:, 0],
        lam / 4.0,
        predicted,
        extra={"spectral": rows[:, 1], "min_eig_dis": rows[:, 2], "max_entry": rows[:, 3], "lambda": lam},
    )


def perturbation_trial(X, m: int, R: float, trials: int, seed=0) -> TrialReport:
    """Per trial: ``|H(w) - H(w~)|_F`` with each ``w_r`` at distance exactly ``R`` from ``w~_r``.

    Threshold ``2 n R``; predicted failure ``n^2 exp(-m R / 10)``.
    """
    X = _inputs(X)
    if not 0 <= R < 1:
        raise InputError("R must lie in [0, 1)")
    if trials < 1 or m < 1:
        raise InputError("trials and m must be at least 1")
    n, d = X.shape
    G = X @ X.T
    G = 0.5 * (G + G.T)

    def one(i):
        rng = make_rng(seed, i)
        W_tilde = rng.standard_normal((m, d))
        U = rng.standard_normal((m, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        W = W_tilde + R * U
        diff = activation_counts(X, W) - activation_counts(X, W_tilde)
        return spectral.frobenius_norm(G * (diff / m))

    values = ordered_map(one, range(trials))
    return _report("perturbation_frobenius", values, 2.0 * n * R, min(1.0, n * n * math.exp(-m * R / 10.0)))


class AntiConcentrationResult(NamedTuple):
    empirical: float
    stderr: float
    lower: float
    upper: float
    method: str

    def inside(self, margin_se: float = 0.0) -> bool:
        pad = margin_se * self.stderr
        return self.lower + pad < self.empirical < self.upper - pad


def anti_concentration_trial(
    sigma: float, t: float, samples: int = 1_000_000, seed=0, stream: int = 0, method: str = "iid"
) -> AntiConcentrationResult:
    """Estimate ``Pr[|X| <= t]`` for ``X ~ N(0, sigma^2)`` against ``(2t/(3 sigma), 4t/(5 sigma))``.

    ``method="iid"`` uses independent draws with the binomial standard error.
    ``method="stratified"`` draws one jittered uniform per stratum of
    ``[0, 1)`` and maps it through the normal quantile; its standard error is
    the larger of the collapsed-strata estimate from adjacent pairs and a
    bound charging variance 1/4 to every stratum the event boundary cuts.
    """
    if not sigma > 0:
        raise InputError("sigma must be positive")
    if t < 0:
        raise InputError("t must be non-negative")
    if t / sigma > MAX_T_OVER_SIGMA:
        raise InputError(f"t/sigma = {t / sigma:g} is outside the small-t regime (<= {MAX_T_OVER_SIGMA})")
    if samples < MIN_ANTI_SAMPLES:
        raise InputError(f"need at least {MIN_ANTI_SAMPLES} samples")
    rng = make_rng(seed, stream)
    lower, upper = 2.0 * t / (3.0 * sigma), 4.0 * t / (5.0 * sigma)
    if method == "iid":
        z = sigma * rng.standard_normal(samples)
        hits = np.abs(z) <= t
        p = float(hits.mean())
        se = math.sqrt(p * (1.0 - p) / samples)
    elif method == "stratified":
        u = (np.arange(samples) + rng.random(samples)) / samples
        z = sigma * ndtri(u)
        hits = (np.abs(z) <= t).astype(np.float64)
        p = float(hits.mean())
        pairs = samples // 2
        dif = hits[0:2 * pairs:2] - hits[1:2 * pairs:2]
        # each hit/miss transition marks a stratum the indicator cuts through;
        # charge it the largest Bernoulli variance so the estimate is never 0
        cuts = int(np.count_nonzero(np.diff(hits)))
        se = math.sqrt(max(float(dif @ dif), 0.25 * cuts)) / samples
    else:
        raise InputError(f"unknown sampling method {method!r}")
    return AntiConcentrationResult(p, se, lower, upper, method)


def anti_concentration_report(
    sigma: float, t: float, samples: int, trials: int, seed=0, method: str = "iid"
) -> TrialReport:
    """Repeat :func:`anti_concentration_trial` over trial streams."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    results = ordered_map(
        lambda i: anti_concentration_trial(sigma, t, samples, seed, i, method), range(trials)
    )
    values = [r.empirical for r in results]
    return _report(
        "anti_concentration_probability",
        values,
        results[0].upper,
        float("nan"),
        lower=results[0].lower,
        extra={"stderr": np.array([r.stderr for r in results]), "method": method},
    )
