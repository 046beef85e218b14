"""Seeded exact samplers for the worked examples of regular variation on cones.

Every sampler takes an :class:`RngStream` and an optional ``size``.  With
``size=None`` a single draw is returned (a float or a length-d vector);
otherwise an array with ``size`` leading rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .core import DEFAULT_NORM, DiscreteAngularMeasure, NormKind, ParetoTail, TailSpec
from .errors import BadGenerator, DegenerateCorrelation

_MANTISSA = 2**53


class RngStream:
    """A reproducible random stream identified by ``(seed, stream)``.

    Backed by PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream,))``;
    distinct stream ids give independent streams under numpy's SeedSequence
    contract.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def child(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)

    def uniform(self, size=None):
        """Uniform on (0, 1]: never zero, so inverse transforms stay finite."""
        return self._gen.integers(1, _MANTISSA + 1, size=size) / _MANTISSA

    def open_uniform(self, size=None):
        """Uniform on the open interval (0, 1)."""
        return self._gen.integers(1, _MANTISSA, size=size) / _MANTISSA

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def bernoulli(self, p: float = 0.5, size=None):
        return self._gen.random(size) < p

    def choice(self, n: int, p, size=None):
        return self._gen.choice(n, size=size, p=p)

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)


def pareto_quantile(u, alpha: float):
    """Inverse transform U ** (-1/alpha) mapping (0, 1] onto the Pareto law on [1, inf)."""
    return np.asarray(u, dtype=float) ** (-1.0 / alpha)


def pareto_sample(alpha: float, rng: RngStream, size=None):
    if not alpha > 0:
        raise BadGenerator(f"Pareto index must be positive, got {alpha}")
    out = pareto_quantile(rng.uniform(size), alpha)
    return float(out) if size is None else out


@dataclass(frozen=True)
class PolarConstructionSpec:
    """Independent Pareto(alpha) radius and a discrete angular law (a probability)."""

    alpha: float
    angular: DiscreteAngularMeasure

    def __post_init__(self):
        if not self.alpha > 0:
            raise BadGenerator(f"radius index must be positive, got {self.alpha}")
        if abs(self.angular.total - 1.0) > 1e-12:
            raise BadGenerator(f"angular law must have total mass 1, got {self.angular.total}")


def polar_construction_sample(spec: PolarConstructionSpec, rng: RngStream, size=None):
    n = 1 if size is None else size
    r = pareto_quantile(rng.uniform(n), spec.alpha)
    idx = rng.choice(len(spec.angular.weights), p=spec.angular.weights, size=n)
    z = r[:, None] * spec.angular.directions[idx]
    return z[0] if size is None else z


def iid_pareto_pair(rng: RngStream, size=None):
    n = 1 if size is None else size
    z = pareto_quantile(rng.uniform((n, 2)), 1.0)
    return z[0] if size is None else z


@dataclass(frozen=True)
class MixtureHrvSpec:
    """Fair mixture of an iid Pareto(1) pair and an interior-ray Pareto(alpha0) vector."""

    alpha0: float
    direction: tuple = (1.0, 1.0)
    norm: NormKind = NormKind.LINF

    def __post_init__(self):
        if not 1.0 < self.alpha0 < 2.0:
            raise BadGenerator(f"hidden index must lie in (1, 2), got {self.alpha0}")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (2,) or not np.all(d > 0):
            raise BadGenerator("interior direction must be a strictly positive 2-vector")
        if abs(float(self.norm(d)) - 1.0) > 1e-12:
            raise BadGenerator(f"interior direction must be unit-norm under {self.norm.value}")

    @property
    def interior(self) -> PolarConstructionSpec:
        return PolarConstructionSpec(
            self.alpha0, DiscreteAngularMeasure(np.asarray([self.direction]), [1.0], self.norm)
        )


def mixture_hrv_sample(spec: MixtureHrvSpec, rng: RngStream, size=None):
    n = 1 if size is None else size
    b = rng.bernoulli(0.5, n)
    y = iid_pareto_pair(rng, n)
    u = polar_construction_sample(spec.interior, rng, n)
    z = np.where(b[:, None], y, u)
    return z[0] if size is None else z


@dataclass(frozen=True)
class LineConstructionSpec:
    """Generator G of the random point on the half-lines leaving (1, 1)."""

    generator: TailSpec = field(default_factory=lambda: ParetoTail(0.5))

    def __post_init__(self):
        if float(self.generator.survival(1.0)) != 1.0:
            raise BadGenerator("generator must concentrate on (1, inf)")


def line_construction_sample(spec: LineConstructionSpec, rng: RngStream, size=None):
    n = 1 if size is None else size
    b = rng.bernoulli(0.5, n)
    theta = np.asarray(spec.generator.sample(rng, n), dtype=float)
    r = pareto_quantile(rng.uniform(n), 1.0)
    ones = np.ones(n)
    direction = np.where(b[:, None], np.column_stack([theta, ones]), np.column_stack([ones, theta]))
    z = r[:, None] * direction
    return z[0] if size is None else z


def inv_uniform_transform(u):
    u = np.asarray(u, dtype=float)
    return np.stack([1.0 / u, 1.0 / (1.0 - u)], axis=-1)


def inv_uniform_pair(rng: RngStream, size=None):
    return inv_uniform_transform(rng.open_uniform(size))


def _check_rho(rho: float):
    if not -1.0 < rho < 1.0:
        raise DegenerateCorrelation(f"correlation must lie strictly inside (-1, 1), got {rho}")


def bivariate_normal_pair(rho: float, rng: RngStream, size=None):
    """(sqrt(1 - rho^2) N1 + rho N2, N2) with N1, N2 iid standard normal."""
    _check_rho(rho)
    n = 1 if size is None else size
    g = rng.normal((n, 2))
    z = np.column_stack([np.sqrt(1.0 - rho * rho) * g[:, 0] + rho * g[:, 1], g[:, 1]])
    return z[0] if size is None else z


def gaussian_copula_pair(rho: float, rng: RngStream, size=None):
    """(1/Phi(N1), 1/Phi(N2)) for correlated normals; each margin is exactly Pareto(1)."""
    return 1.0 / ndtr(bivariate_normal_pair(rho, rng, size))
