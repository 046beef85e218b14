"""Tail index, angular measure, tail dependence and hidden regular variation estimates."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import (
    DEFAULT_NORM,
    DiscreteAngularMeasure,
    NormKind,
    TailSpec,
    cluster_directions,
    polar_arrays,
)
from .errors import BadGenerator, BadK, BadWeights, DegenerateSample, TooFewExceedances

MIN_ANGULAR_EXCEEDANCES = 50
MIN_LAMBDA_EXCEEDANCES = 20
ANGULAR_CLUSTER_TOL = 0.05


@dataclass(frozen=True)
class TailIndexEstimate:
    alpha_hat: float
    k: int
    n: int


def default_k(n: int) -> int:
    return min(math.ceil(n ** (2.0 / 3.0)), n - 1)


def _as_2d(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def hill(sample, k: int | None = None) -> TailIndexEstimate:
    """Hill estimator from the k largest observations.

    alpha_hat = 1 / mean(log(X_(i) / X_(k+1)), i = 1..k), descending order statistics.
    """
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    if k is None:
        k = default_k(n)
    if not (isinstance(k, (int, np.integer)) and 1 <= k < n):
        raise BadK(f"k must be an integer with 1 <= k < n={n}, got {k}")
    top = np.partition(x, n - k - 1)[n - k - 1 :]
    threshold = top[0]
    if not threshold > 0:
        raise DegenerateSample("the top k+1 order statistics must be strictly positive")
    spacing = np.log(top[1:] / threshold).mean()
    if not spacing > 0:
        raise DegenerateSample("zero log-spacings: the top k+1 order statistics are all equal")
    return TailIndexEstimate(float(1.0 / spacing), int(k), int(n))


def hill_path(sample, ks) -> list[tuple[int, float]]:
    """(k, alpha_hat) over a grid of k, sorting the sample once."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())[::-1]
    n = x.size
    logs = np.log(x)
    csum = np.cumsum(logs)
    out = []
    for k in ks:
        if not 1 <= k < n:
            raise BadK(f"k must satisfy 1 <= k < n={n}, got {k}")
        if not x[k] > 0:
            raise DegenerateSample("the top k+1 order statistics must be strictly positive")
        spacing = csum[k - 1] / k - logs[k]
        if not spacing > 0:
            raise DegenerateSample(f"zero log-spacings at k={k}")
        out.append((int(k), float(1.0 / spacing)))
    return out


def max_tail_index(sample, k: int | None = None) -> TailIndexEstimate:
    return hill(_as_2d(sample).max(axis=1), k)


def min_tail_index(sample, k: int | None = None) -> TailIndexEstimate:
    return hill(_as_2d(sample).min(axis=1), k)


class LinearMode(enum.Enum):
    MAX_LINEAR = "max"
    MIN_LINEAR = "min"


def linear_combination_tail(sample, weights, mode: LinearMode, k: int | None = None):
    """Hill estimate for max_i s_i Z_i or min_i a_i Z_i.

    Min-linear weights may be +inf (that coordinate is ignored) but at least two
    must be finite, otherwise the combination lives on an axis.
    """
    x = _as_2d(sample)
    w = np.asarray(weights, dtype=float)
    if w.shape != (x.shape[1],):
        raise BadWeights(f"need {x.shape[1]} weights, got shape {w.shape}")
    mode = LinearMode(mode)
    if mode is LinearMode.MAX_LINEAR:
        if np.any(w < 0) or not np.all(np.isfinite(w)) or not np.any(w > 0):
            raise BadWeights("max-linear weights must be finite, nonnegative and not all zero")
        return hill((x * w).max(axis=1), k)
    if np.any(~(w > 0)):
        raise BadWeights("min-linear weights must be strictly positive")
    finite = np.isfinite(w)
    if finite.sum() < 2:
        raise BadWeights("min-linear weights need at least two finite entries")
    return hill((x[:, finite] * w[finite]).min(axis=1), k)


@dataclass(frozen=True)
class AngularEstimate:
    alpha_hat: float
    angular: DiscreteAngularMeasure
    threshold: float
    k: int


def angular_estimate(sample, top_fraction: float, norm: NormKind = DEFAULT_NORM) -> AngularEstimate:
    """Empirical angular measure of the k = ceil(top_fraction n) largest-radius points.

    Directions carry equal weights 1/k (identical directions are merged), and
    the radius tail index is the Hill estimate at the same k.
    """
    r, a = polar_arrays(_as_2d(sample), norm)
    n = r.size
    if not 0 < top_fraction < 1:
        raise TooFewExceedances(f"top fraction must lie in (0, 1), got {top_fraction}")
    k = math.ceil(top_fraction * n)
    if k < MIN_ANGULAR_EXCEEDANCES:
        raise TooFewExceedances(f"{k} exceedances, need at least {MIN_ANGULAR_EXCEEDANCES}")
    k = min(k, n - 1)
    order = np.argpartition(r, n - k - 1)
    top = order[n - k :]
    est = hill(r, k)
    angular = DiscreteAngularMeasure(a[top], np.full(k, 1.0 / k), norm)
    return AngularEstimate(est.alpha_hat, angular, float(r[order[n - k - 1]]), k)


def angular_total_variation(estimate: DiscreteAngularMeasure, truth: DiscreteAngularMeasure,
                            tol: float = ANGULAR_CLUSTER_TOL) -> float:
    """Total variation between a clustered empirical angular measure and a discrete truth.

    Estimated clusters are assigned to the nearest true atom within ``tol``
    (sup distance); unmatched mass counts fully against the estimate.
    """
    dirs, w = estimate.clustered(tol)
    w = w / w.sum()
    truth_w = truth.weights / truth.total
    matched = np.zeros_like(truth_w)
    unmatched = 0.0
    for d, mass in zip(dirs, w):
        dist = np.abs(truth.directions - d).max(axis=1)
        j = int(np.argmin(dist))
        if dist[j] <= tol:
            matched[j] += mass
        else:
            unmatched += mass
    return 0.5 * (float(np.abs(matched - truth_w).sum()) + unmatched)


def lambda_hat(sample, u: float) -> float:
    """Empirical upper tail dependence: P[F2(Z2) > u | F1(Z1) > u] with rank-based margins."""
    x = _as_2d(sample)
    if x.shape[1] != 2:
        raise ValueError("lambda_hat needs a bivariate sample")
    if not 0 < u < 1:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    n = x.shape[0]
    level = u * n
    r1 = rankdata(x[:, 0], method="max")
    r2 = rankdata(x[:, 1], method="max")
    above = r1 > level
    m = int(above.sum())
    if m < MIN_LAMBDA_EXCEEDANCES:
        raise TooFewExceedances(f"{m} points above the u-rank threshold, need {MIN_LAMBDA_EXCEEDANCES}")
    return float(np.count_nonzero(r2[above] > level) / m)


class HrvVerdict(enum.Enum):
    HRV_CONSISTENT = "HRV-consistent"
    NO_HRV = "no-HRV"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class HrvTolerances:
    # alpha0_hat must exceed alpha_hat by this fraction of alpha_hat
    separation: float = 0.2
    lambda_max: float = 0.05


@dataclass(frozen=True)
class HrvReport:
    alpha_hat: float
    alpha0_hat: float
    eta_hat: float
    lambda_hat: float
    u: float
    k: int
    verdict: HrvVerdict


def hrv_report(sample, k: int | None = None, u: float = 0.99,
               tolerances: HrvTolerances = HrvTolerances()) -> HrvReport:
    """Hidden-regular-variation diagnostic from the max- and min-component tails.

    Consistent with HRV when the min tail is clearly lighter than the max tail
    and the tail dependence estimate is small; no HRV when neither signal is
    present; inconclusive when they disagree.  For d > 2 the largest pairwise
    lambda_hat is used.
    """
    x = _as_2d(sample)
    if x.shape[1] < 2:
        raise ValueError("hidden regular variation needs at least two components")
    a = max_tail_index(x, k)
    a0 = min_tail_index(x, k)
    lam = max(lambda_hat(x[:, [i, j]], u) for i, j in itertools.combinations(range(x.shape[1]), 2))
    separated = a0.alpha_hat - a.alpha_hat > tolerances.separation * a.alpha_hat
    independent = lam < tolerances.lambda_max
    if separated and independent:
        verdict = HrvVerdict.HRV_CONSISTENT
    elif not separated and not independent:
        verdict = HrvVerdict.NO_HRV
    else:
        verdict = HrvVerdict.INCONCLUSIVE
    return HrvReport(a.alpha_hat, a0.alpha_hat, a.alpha_hat / a0.alpha_hat, lam, u, a.k, verdict)


class Finiteness(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"


def angular_finiteness_predicate(G: TailSpec) -> Finiteness:
    """Whether the hidden angular measure of the line construction with generator G is finite.

    That happens exactly when the integral of the survival function of G is
    finite, i.e. when G has a finite mean.
    """
    if float(G.survival(1.0)) != 1.0:
        raise BadGenerator("generator must concentrate on (1, inf)")
    return Finiteness.FINITE if G.has_finite_mean() else Finiteness.INFINITE


__all__ = [
    "AngularEstimate",
    "Finiteness",
    "HrvReport",
    "HrvTolerances",
    "HrvVerdict",
    "LinearMode",
    "TailIndexEstimate",
    "angular_estimate",
    "angular_finiteness_predicate",
    "angular_total_variation",
    "cluster_directions",
    "default_k",
    "hill",
    "hill_path",
    "hrv_report",
    "lambda_hat",
    "linear_combination_tail",
    "max_tail_index",
    "min_tail_index",
]
