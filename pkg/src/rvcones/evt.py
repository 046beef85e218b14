"""Extended regular variation, norming constants and max-stable distribution functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import LimitMeasureSpec, TailSpec, nu_complement_box, quantile_b
from .errors import BadBlockSize, DomainViolation, NonMonotoneTransform, NonPositiveArgument


@dataclass(frozen=True)
class PsiParams:
    rho: float
    k: float = 1.0

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("psi constant k must be nonzero")


def psi(x, p: PsiParams):
    """k (x^rho - 1) / rho, or k log x when rho = 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise NonPositiveArgument(f"psi needs x > 0, got {x}")
    lx = np.log(x)
    out = p.k * (lx if p.rho == 0 else np.expm1(p.rho * lx) / p.rho)
    return float(out) if out.ndim == 0 else out


def psi_inverse(y, rho: float):
    """(1 + rho y) ** (1 / rho), with the exponential limit at rho = 0 (k fixed to 1)."""
    y = np.asarray(y, dtype=float)
    if rho == 0:
        out = np.exp(y)
    else:
        base = rho * y
        if np.any(~(1.0 + base > 0)):
            raise DomainViolation(f"psi inverse needs 1 + rho*y > 0 (rho={rho}, y={y})")
        out = np.exp(np.log1p(base) / rho)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NormingPair:
    """Scale a(t) > 0 and location b(t) as functions of t."""

    a: Callable[[float], float]
    b: Callable[[float], float]

    @classmethod
    def from_tail(cls, tail: TailSpec) -> "NormingPair":
        return cls(a=lambda t: norming_from_tail(tail, t)[0], b=lambda t: quantile_b(tail, t))


def norming_from_tail(tail: TailSpec, t: float) -> tuple[float, float]:
    """(a(t), b(t)) with b the quantile function and a(t) = b(t e) - b(t)."""
    b = quantile_b(tail, t)
    a = quantile_b(tail, t * math.e) - b
    return a, b


def marginal_standardize(sample, transforms: Sequence[Callable]) -> np.ndarray:
    """Apply one nondecreasing map per coordinate; raise if any map reverses observed order."""
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(transforms) != x.shape[1]:
        raise ValueError(f"need {x.shape[1]} transforms, got {len(transforms)}")
    out = np.empty_like(x)
    for i, f in enumerate(transforms):
        col = x[:, i]
        y = np.asarray(f(col), dtype=float)
        order = np.argsort(col, kind="stable")
        if np.any(np.diff(y[order]) < 0):
            raise NonMonotoneTransform(f"transform {i} decreases on the observed points")
        out[:, i] = y
    return out


def max_stable_cdf(m: LimitMeasureSpec, psi_list: Sequence[PsiParams | None] | None, x) -> float:
    """exp(-nu({y : y_i <= psi_i^<-(x_i) for all i}^c)).

    ``None`` entries (or ``psi_list=None``) mean the identity, i.e. the
    standard Fréchet-margin case.  A corner with a nonpositive coordinate
    gives 0 under the identity map.
    """
    x = np.asarray(x, dtype=float)
    d = m.angular.dim
    if x.shape != (d,):
        raise ValueError(f"x must have shape ({d},)")
    if psi_list is None:
        psi_list = [None] * d
    corner = np.empty(d)
    for i, (xi, p) in enumerate(zip(x, psi_list)):
        if p is None:
            corner[i] = xi
        else:
            corner[i] = psi_inverse(xi / p.k, p.rho)
    if np.any(corner <= 0):
        return 0.0
    return math.exp(-nu_complement_box(m, corner))


def block_maxima(sample, block: int) -> np.ndarray:
    """Componentwise maxima over consecutive blocks; a trailing partial block is dropped."""
    if not (isinstance(block, (int, np.integer)) and block >= 1):
        raise BadBlockSize(f"block size must be a positive integer, got {block}")
    x = np.asarray(sample, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    nb = x.shape[0] // block
    out = x[: nb * block].reshape(nb, block, x.shape[1]).max(axis=1)
    return out[:, 0] if squeeze else out


def empirical_cdf_nd(sample, x) -> float:
    """Fraction of rows of ``sample`` that are componentwise <= ``x``."""
    s = np.asarray(sample, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    return float(np.mean(np.all(s <= np.asarray(x, dtype=float), axis=1)))
