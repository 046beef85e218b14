"""Lévy's découpage of an iid sequence and peaks-over-threshold extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DEFAULT_NORM, NormKind, PolarPair, polar_arrays
from .errors import OutOfRange


@dataclass(frozen=True, eq=False)
class DecoupageResult:
    exceedances: np.ndarray
    exceedance_indices: np.ndarray
    complement: np.ndarray
    complement_indices: np.ndarray
    counts: np.ndarray  # K_1, ..., K_n

    @property
    def n(self) -> int:
        return self.counts.size

    def reconstruct(self) -> np.ndarray:
        """Interleave both subsequences at their recorded indices."""
        shape = (self.n,) + self.exceedances.shape[1:]
        out = np.empty(shape, dtype=np.result_type(self.exceedances, self.complement))
        out[self.exceedance_indices] = self.exceedances
        out[self.complement_indices] = self.complement
        return out


def decoupage_split(sample, in_B: Callable | np.ndarray) -> DecoupageResult:
    """Split an ordered sample into visits to B, visits to B^c and the counting path K_n.

    ``in_B`` is either a predicate evaluated on each element or a precomputed
    boolean mask.
    """
    x = np.asarray(sample, dtype=float)
    if x.shape[0] == 0:
        raise ValueError("découpage needs a nonempty sample")
    if callable(in_B):
        mask = np.fromiter((bool(in_B(e)) for e in x), dtype=bool, count=x.shape[0])
    else:
        mask = np.asarray(in_B, dtype=bool)
        if mask.shape != (x.shape[0],):
            raise ValueError("mask must have one entry per observation")
    hit = np.flatnonzero(mask)
    miss = np.flatnonzero(~mask)
    return DecoupageResult(x[hit], hit, x[miss], miss, np.cumsum(mask))


@dataclass(frozen=True, eq=False)
class PolarExceedanceSet:
    threshold: float
    r: np.ndarray
    a: np.ndarray
    indices: np.ndarray
    norm: NormKind = DEFAULT_NORM

    def __len__(self):
        return self.r.size

    def pairs(self) -> list[PolarPair]:
        return [PolarPair(float(r), a, self.norm) for r, a in zip(self.r, self.a)]

    def ratios(self) -> np.ndarray:
        """R / t for each exceedance."""
        return self.r / self.threshold


def radius_threshold(sample, top_fraction: float, norm: NormKind = DEFAULT_NORM) -> float:
    """Radius at the empirical ``1 - top_fraction`` level: the (k+1)-th largest, k = ceil(top_fraction n).

    Exceedances are strict, so exactly k points lie above it when radii are distinct.
    """
    if not 0 < top_fraction < 1:
        raise OutOfRange(f"top fraction must lie in (0, 1), got {top_fraction}")
    r, _ = polar_arrays(sample, norm)
    k = math.ceil(top_fraction * r.size)
    if k >= r.size:
        raise OutOfRange("top fraction leaves no point below the threshold")
    return float(np.partition(r, r.size - k - 1)[r.size - k - 1])


def pot_exceedances(sample, t: float, norm: NormKind = DEFAULT_NORM) -> PolarExceedanceSet:
    """Polar coordinates of all points with ``||x|| > t`` (ties at t excluded)."""
    if not t > 0:
        raise OutOfRange(f"threshold must be positive, got {t}")
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    r = norm(x)
    idx = np.flatnonzero(r > t)
    rr, aa = polar_arrays(x[idx], norm) if idx.size else (np.empty(0), np.empty((0, x.shape[1])))
    return PolarExceedanceSet(float(t), rr, aa, idx, norm)
