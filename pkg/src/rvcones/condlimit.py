"""Conditioned limit laws given an extreme second component.

Samples are ``(n, 2)`` arrays whose second column has been standardized by
:func:`standardize_y` so that ``P[Y* > t] ~ 1/t``.  Threshold levels ``p`` are
mapped to standardized thresholds ``t = 1 / (1 - p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm, rankdata

from .errors import (
    DegenerateConditional,
    DomainViolation,
    GridMismatch,
    NonMonotone,
    TooFewExceedances,
)

DEFAULT_LEVELS = (0.90, 0.925, 0.95, 0.975, 0.99)
DEFAULT_C_GRID = (0.5, 2.0, 4.0)
DEFAULT_PRODUCT_TOL = 0.1
MIN_CONDITIONAL_EXCEEDANCES = 100
_RATIO_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class GaussianCondOracle:
    rho: float

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise DomainViolation(f"correlation must lie in (-1, 1), got {self.rho}")

    def H(self, x) -> float:
        """Limit conditional distribution of X - rho b(t): Phi(x / sqrt(1 - rho^2))."""
        return float(norm.cdf(x / math.sqrt(1.0 - self.rho ** 2)))

    def mu(self, x, y) -> float:
        if not y > 0:
            raise DomainViolation(f"y must be positive, got {y}")
        return self.H(x) * (1.0 / y)


def gaussian_oracle_mu(o: GaussianCondOracle, x: float, y: float) -> float:
    """mu([-inf, x] x (y, inf]) = Phi(x / sqrt(1 - rho^2)) / y."""
    return o.mu(x, y)


def gaussian_b(t: float) -> float:
    """Exact normal quantile function (1 / (1 - Phi))^<-(t), solved by bracketed root finding."""
    if not t > 1:
        raise DomainViolation(f"t must exceed 1, got {t}")
    log_t = math.log(t)
    return brentq(lambda x: log_t + norm.logsf(x), -40.0, 40.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def gaussian_b_asymptotic(t: float) -> float:
    """Two-term expansion of the normal quantile function; a cross-check only."""
    s = math.sqrt(2.0 * math.log(t))
    return s - 0.5 * (math.log(math.log(t)) + math.log(4.0 * math.pi)) / s


def gaussian_norming(t: float) -> tuple[float, float]:
    """(a(t), b(t)) = (1 / sqrt(2 log t), exact normal quantile function)."""
    b = gaussian_b(t)
    return 1.0 / math.sqrt(2.0 * math.log(t)), b


def gaussian_b_inverse(y):
    """b^<-(y) = 1 / (1 - Phi(y)), computed through the survival function."""
    return 1.0 / norm.sf(y)


def exponential_b_inverse(y):
    return np.exp(y)


def standardize_y(y_sample, b_inverse: Callable) -> np.ndarray:
    """Y* = b^<-(Y), checking that the map preserves the order of the observations."""
    y = np.asarray(y_sample, dtype=float).ravel()
    ys = np.asarray(b_inverse(y), dtype=float)
    order = np.argsort(y, kind="stable")
    if np.any(np.diff(ys[order]) < 0):
        raise NonMonotone("standardizing map is not nondecreasing on the observed points")
    return ys


def empirical_standardize(y_sample) -> np.ndarray:
    """Rank standardization n / (n + 1 - rank) for when no closed-form b is known."""
    y = np.asarray(y_sample, dtype=float).ravel()
    return y.size / (y.size + 1.0 - rankdata(y, method="max"))


def levels_to_thresholds(levels: Sequence[float]) -> np.ndarray:
    lv = np.asarray(levels, dtype=float)
    if np.any((lv <= 0) | (lv >= 1)):
        raise DomainViolation("threshold levels must lie in (0, 1)")
    return 1.0 / (1.0 - lv)


@dataclass(frozen=True, eq=False)
class CondLimitFit:
    thresholds: np.ndarray
    beta_hat: np.ndarray
    alpha_scale_hat: np.ndarray
    exceedances: np.ndarray
    c_grid: np.ndarray | None = None
    psi1_table: np.ndarray | None = None
    psi2_table: np.ndarray | None = None
    product_verdict: bool | None = None

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("threshold grid must be strictly increasing")
        if np.any(~(np.asarray(self.alpha_scale_hat) > 0)):
            raise ValueError("fitted scales must be positive")


def _split(xy_sample):
    xy = np.asarray(xy_sample, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise ValueError("expected an (n, 2) sample of (X, Y*) pairs")
    return xy[:, 0], xy[:, 1]


def fit_location_scale(xy_sample, levels: Sequence[float] = DEFAULT_LEVELS) -> CondLimitFit:
    """Conditional median and interquartile range of X given Y* > t, per threshold."""
    x, ys = _split(xy_sample)
    thresholds = np.sort(levels_to_thresholds(levels))
    beta, scale, counts = [], [], []
    for t in thresholds:
        sel = x[ys > t]
        if sel.size < MIN_CONDITIONAL_EXCEEDANCES:
            raise TooFewExceedances(
                f"{sel.size} exceedances above t={t:g}, need {MIN_CONDITIONAL_EXCEEDANCES}"
            )
        q1, med, q3 = np.quantile(sel, [0.25, 0.5, 0.75])
        if not q3 - q1 > 0:
            raise DegenerateConditional(f"zero interquartile range above t={t:g}")
        beta.append(med)
        scale.append(q3 - q1)
        counts.append(sel.size)
    return CondLimitFit(thresholds, np.array(beta), np.array(scale), np.array(counts))


def psi_estimates(fit: CondLimitFit, c_grid: Sequence[float] = DEFAULT_C_GRID):
    """Average alpha(tc)/alpha(t) and (beta(tc) - beta(t))/alpha(t) over grid pairs (t, tc).

    A pair is resolvable when tc coincides with another grid threshold.
    """
    t = np.asarray(fit.thresholds, dtype=float)
    psi1, psi2 = [], []
    for c in c_grid:
        if not c > 0:
            raise DomainViolation(f"ratios must be positive, got {c}")
        r1, r2 = [], []
        for i, ti in enumerate(t):
            hit = np.flatnonzero(np.isclose(t, ti * c, rtol=_RATIO_MATCH_RTOL, atol=0.0))
            if hit.size:
                j = hit[0]
                r1.append(fit.alpha_scale_hat[j] / fit.alpha_scale_hat[i])
                r2.append((fit.beta_hat[j] - fit.beta_hat[i]) / fit.alpha_scale_hat[i])
        if not r1:
            raise GridMismatch(f"no threshold pair (t, t*{c:g}) on the grid {t.tolist()}")
        psi1.append(float(np.mean(r1)))
        psi2.append(float(np.mean(r2)))
    return np.array(psi1), np.array(psi2)


def product_form_test(psi1_table, psi2_table, tol: float = DEFAULT_PRODUCT_TOL) -> bool:
    """True iff every psi1 is within tol of 1 and every psi2 within tol of 0."""
    p1 = np.asarray(psi1_table, dtype=float)
    p2 = np.asarray(psi2_table, dtype=float)
    if p1.size == 0 or p2.size == 0:
        raise ValueError("psi tables must be nonempty")
    return bool(np.max(np.abs(p1 - 1.0)) < tol and np.max(np.abs(p2)) < tol)


def fit_conditioned_limit(xy_sample, levels=DEFAULT_LEVELS, c_grid=DEFAULT_C_GRID,
                          tol=DEFAULT_PRODUCT_TOL) -> CondLimitFit:
    fit = fit_location_scale(xy_sample, levels)
    p1, p2 = psi_estimates(fit, c_grid)
    return replace(fit, c_grid=np.asarray(c_grid, dtype=float), psi1_table=p1, psi2_table=p2,
                   product_verdict=product_form_test(p1, p2, tol))


def conditional_cdf_empirical(xy_sample, t: float, x_grid, center: float = 0.0,
                              scale: float = 1.0) -> np.ndarray:
    """Empirical CDF of (X - center) / scale given Y* > t, evaluated on ``x_grid``."""
    x, ys = _split(xy_sample)
    sel = np.sort((x[ys > t] - center) / scale)
    if sel.size < MIN_CONDITIONAL_EXCEEDANCES:
        raise TooFewExceedances(
            f"{sel.size} exceedances above t={t:g}, need {MIN_CONDITIONAL_EXCEEDANCES}"
        )
    return np.searchsorted(sel, np.asarray(x_grid, dtype=float), side="right") / sel.size


def conditional_sup_distance(xy_sample, t: float, cdf: Callable, center: float = 0.0,
                             scale: float = 1.0) -> tuple[float, int]:
    """Kolmogorov distance between the conditional empirical law and ``cdf``; also the count."""
    x, ys = _split(xy_sample)
    sel = np.sort((x[ys > t] - center) / scale)
    m = sel.size
    if m < MIN_CONDITIONAL_EXCEEDANCES:
        raise TooFewExceedances(f"{m} exceedances above t={t:g}, need {MIN_CONDITIONAL_EXCEEDANCES}")
    f = np.asarray(cdf(sel), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m))), m
