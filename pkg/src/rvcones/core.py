"""Norms, polar coordinates, quantile functions and closed-form limit measures.

The limit measures here are all represented through a finite (discrete)
angular measure ``S``.  For a tail index ``alpha`` and scale ``c`` the
measure of the complement of the box ``[0, x]`` is

    c * sum_j w_j * max_i (a_j[i] / x[i]) ** alpha

and the measure of the open upper box ``(x, inf]`` replaces the max by a min.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    BadGenerator,
    NonFinite,
    NonPositiveBox,
    OutOfRange,
    Unsupported,
    ZeroVector,
)

ATOM_MERGE_TOL = 1e-9
UNIT_NORM_TOL = 1e-12


class NormKind(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, value: Union[str, "NormKind"]) -> "NormKind":
        if isinstance(value, NormKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown norm {value!r}; expected one of l1, l2, linf") from None

    def __call__(self, x) -> np.ndarray:
        """Norm of ``x`` along its last axis."""
        x = np.asarray(x, dtype=float)
        if self is NormKind.L1:
            return np.abs(x).sum(axis=-1)
        if self is NormKind.L2:
            return np.sqrt((x * x).sum(axis=-1))
        return np.abs(x).max(axis=-1)


DEFAULT_NORM = NormKind.L1


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PolarPair:
    r: float
    a: np.ndarray
    norm: NormKind = DEFAULT_NORM

    def __post_init__(self):
        a = _frozen(self.a)
        object.__setattr__(self, "a", a)
        if not self.r > 0:
            raise ValueError(f"radius must be positive, got {self.r}")
        if abs(float(self.norm(a)) - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"direction {a} is not unit-norm under {self.norm.value}")


def polar_transform(x, norm: NormKind = DEFAULT_NORM) -> PolarPair:
    """Map a nonzero finite vector to ``(||x||, x / ||x||)``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"polar transform undefined for non-finite vector {x}")
    r = float(norm(x))
    if r == 0.0:
        raise ZeroVector("polar transform undefined at the origin")
    return PolarPair(r, x / r, norm)


def polar_inverse(p: PolarPair) -> np.ndarray:
    return p.r * p.a


def polar_arrays(sample, norm: NormKind = DEFAULT_NORM):
    """Vectorised polar transform of an ``(n, d)`` sample: returns radii and directions."""
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if not np.all(np.isfinite(x)):
        raise NonFinite("sample contains non-finite values")
    r = norm(x)
    if np.any(r == 0.0):
        raise ZeroVector("sample contains the zero vector")
    return r, x / r[:, None]


# --------------------------------------------------------------------------
# one-dimensional tails


class TailSpec:
    """Base class of the univariate distributions used as tails and generators."""

    def survival(self, x):
        raise NotImplementedError

    def quantile_b(self, t: float) -> float:
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    def has_finite_mean(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class ParetoTail(TailSpec):
    """P[X > x] = x ** -alpha on x >= 1."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise BadGenerator(f"Pareto index must be positive, got {self.alpha}")

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 1.0, 1.0, np.maximum(x, 1.0) ** -self.alpha)

    def quantile_b(self, t):
        return t ** (1.0 / self.alpha)

    def sample(self, rng, size=None):
        return rng.uniform(size) ** (-1.0 / self.alpha)

    def has_finite_mean(self):
        return self.alpha > 1.0


@dataclass(frozen=True)
class ExponentialTail(TailSpec):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise BadGenerator(f"exponential rate must be positive, got {self.rate}")

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.0, 1.0, np.exp(-self.rate * np.maximum(x, 0.0)))

    def quantile_b(self, t):
        return math.log(t) / self.rate

    def sample(self, rng, size=None):
        return -np.log(rng.uniform(size)) / self.rate

    def has_finite_mean(self):
        return True


@dataclass(frozen=True)
class UniformTail(TailSpec):
    """Uniform distribution on [0, 1]."""

    def survival(self, x):
        return np.clip(1.0 - np.asarray(x, dtype=float), 0.0, 1.0)

    def quantile_b(self, t):
        return 1.0 - 1.0 / t

    def sample(self, rng, size=None):
        return 1.0 - rng.uniform(size)

    def has_finite_mean(self):
        return True


@dataclass(frozen=True, eq=False)
class EmpiricalTail(TailSpec):
    """Empirical distribution of a finite sample (stored sorted ascending)."""

    sample_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.sort(np.asarray(self.sample_values, dtype=float).ravel())
        if v.size == 0:
            raise ValueError("empirical tail needs a nonempty sample")
        if not np.all(np.isfinite(v)):
            raise NonFinite("empirical tail sample contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "sample_values", v)

    @property
    def n(self) -> int:
        return self.sample_values.size

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - np.searchsorted(self.sample_values, x, side="right") / self.n

    def quantile_b(self, t):
        # descending order statistic X_(ceil(n/t)); the small slack absorbs n/t rounding
        n = self.n
        if t > n * (1 + 1e-12):
            raise OutOfRange(f"t={t} exceeds the empirical resolution n={n}")
        rank = max(1, math.ceil(n / t - 1e-9))
        return float(self.sample_values[n - rank])

    def sample(self, rng, size=None):
        idx = rng.integers(0, self.n, size)
        return self.sample_values[idx]

    def has_finite_mean(self):
        raise Unsupported("finiteness of the generator mean is not determinable from a sample")


def quantile_b(tail: TailSpec, t: float) -> float:
    """Quantile function b(t) = (1 / (1 - F))^<-(t)."""
    if not t > 1:
        raise OutOfRange(f"quantile function needs t > 1, got {t}")
    return float(tail.quantile_b(t))


# --------------------------------------------------------------------------
# angular measures and limit measures


def cluster_directions(directions, weights, tol: float):
    """Greedy merge of directions lying within ``tol`` in sup distance.

    Points are visited in lexicographic order; each joins the first existing
    cluster whose leader is within ``tol``, otherwise it starts a new one.
    Returns ``(leaders, summed_weights)``.
    """
    dirs = np.asarray(directions, dtype=float)
    w = np.asarray(weights, dtype=float)
    if dirs.shape[0] == 0:
        return dirs.reshape(0, dirs.shape[-1] if dirs.ndim == 2 else 0), w
    uniq, inverse = np.unique(dirs, axis=0, return_inverse=True)
    uw = np.bincount(inverse.ravel(), weights=w, minlength=uniq.shape[0])
    if tol <= 0 or uniq.shape[0] == 1:
        return uniq, uw

    leaders = np.empty_like(uniq)
    lead_w = np.empty(uniq.shape[0])
    m = 0
    for point, weight in zip(uniq, uw):
        # leaders are created in increasing first coordinate, so a window suffices
        lo = np.searchsorted(leaders[:m, 0], point[0] - tol, side="left")
        hit = np.flatnonzero(np.abs(leaders[lo:m] - point).max(axis=1) <= tol)
        if hit.size:
            lead_w[lo + hit[0]] += weight
        else:
            leaders[m] = point
            lead_w[m] = weight
            m += 1
    return leaders[:m].copy(), lead_w[:m].copy()


@dataclass(frozen=True, eq=False)
class DiscreteAngularMeasure:
    """Finite angular measure: unit-norm atoms in the nonnegative orthant with positive weights."""

    directions: np.ndarray
    weights: np.ndarray
    norm: NormKind = DEFAULT_NORM

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if dirs.shape[0] != w.shape[0]:
            raise ValueError("one weight per atom required")
        if dirs.shape[0] == 0:
            raise ValueError("angular measure needs at least one atom")
        if not np.all(w > 0):
            raise ValueError("atom weights must be positive")
        if np.any(dirs < 0) or not np.all(np.isfinite(dirs)):
            raise ValueError("atoms must be finite and nonnegative")
        if np.any(np.abs(self.norm(dirs) - 1.0) > UNIT_NORM_TOL):
            raise ValueError(f"atoms must be unit-norm under {self.norm.value}")
        dirs, w = cluster_directions(dirs, w, ATOM_MERGE_TOL)
        object.__setattr__(self, "directions", _frozen(dirs))
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def from_points(cls, points, weights, norm: NormKind = DEFAULT_NORM):
        """Build from arbitrary nonzero points, normalising each onto the unit sphere."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(pts / norm(pts)[:, None], weights, norm)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "DiscreteAngularMeasure":
        return DiscreteAngularMeasure(self.directions, self.weights / self.total, self.norm)

    def clustered(self, tol: float):
        """Atoms merged at a coarser tolerance (for comparison with a discrete truth)."""
        return cluster_directions(self.directions, self.weights, tol)

    def mass(self, region) -> float:
        """Total weight of atoms for which ``region(direction)`` is true."""
        return float(sum(w for a, w in zip(self.directions, self.weights) if region(a)))


def axis_measure(d: int, weights: Sequence[float] | None = None, norm: NormKind = DEFAULT_NORM):
    """Angular measure with one atom on each coordinate axis (asymptotic independence)."""
    w = np.ones(d) if weights is None else np.asarray(weights, dtype=float)
    return DiscreteAngularMeasure(np.eye(d), w, norm)


@dataclass(frozen=True)
class LimitMeasureSpec:
    alpha: float
    angular: DiscreteAngularMeasure
    scale: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"tail index must be positive, got {self.alpha}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


def _ratios(m: LimitMeasureSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.angular.dim:
        raise ValueError(f"box corner has dimension {x.shape[-1]}, measure has {m.angular.dim}")
    if np.any(~(x > 0)):
        raise NonPositiveBox(f"box corner must be strictly positive, got {x}")
    # shape (..., atoms, d)
    return m.angular.directions / x[..., None, :]


def nu_open_box(m: LimitMeasureSpec, x):
    """nu((x, inf]) for a strictly positive corner ``x`` (vectorised over leading axes)."""
    lo = _ratios(m, x).min(axis=-1)
    out = m.scale * (m.angular.weights * lo ** m.alpha).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def nu_complement_box(m: LimitMeasureSpec, x):
    """nu([0, x]^c) for a strictly positive corner ``x``."""
    hi = _ratios(m, x).max(axis=-1)
    out = m.scale * (m.angular.weights * hi ** m.alpha).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# two-tailed one-dimensional limit measure


class TailRegion(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class TwoTailSpec:
    c_plus: float
    c_minus: float
    alpha: float

    def __post_init__(self):
        if self.c_plus < 0 or self.c_minus < 0:
            raise ValueError("tail constants must be nonnegative")
        if self.c_plus == 0 and self.c_minus == 0:
            raise ValueError("at least one tail constant must be positive")
        if not self.alpha > 0:
            raise ValueError("tail index must be positive")


def two_tail_eval(s: TwoTailSpec, region: TailRegion, x: float) -> float:
    """nu(x, inf] for the upper region, nu[-inf, -x] for the lower one."""
    if not x > 0:
        raise NonPositiveBox(f"x must be positive, got {x}")
    c = s.c_plus if TailRegion(region) is TailRegion.UPPER else s.c_minus
    return c * x ** -s.alpha


def two_tail_pq(s: TwoTailSpec) -> tuple[float, float]:
    """Limiting fractions of |X|-exceedances that are positive (p) and negative (q)."""
    p = s.c_plus / (s.c_plus + s.c_minus)
    # complementing keeps p + q == 1.0 in floating point
    return p, 1.0 - p
