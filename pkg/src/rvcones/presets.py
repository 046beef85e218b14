"""Named generator presets, parsed from strings such as ``mixture-hrv:alpha0=1.5``.

Each preset knows how to draw a sample and, where one is available in closed
form, the full-cone limit measure and quantile scaling of its block maxima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DiscreteAngularMeasure, LimitMeasureSpec, NormKind, ParetoTail, axis_measure
from .errors import BadGenerator, ConfigError
from .samplers import (
    LineConstructionSpec,
    MixtureHrvSpec,
    PolarConstructionSpec,
    RngStream,
    bivariate_normal_pair,
    gaussian_copula_pair,
    iid_pareto_pair,
    inv_uniform_pair,
    line_construction_sample,
    mixture_hrv_sample,
    pareto_sample,
    polar_construction_sample,
)

PRESET_NAMES = (
    "pareto",
    "iid-pareto-pair",
    "polar",
    "mixture-hrv",
    "line",
    "inv-uniform-pair",
    "gaussian-copula",
    "gaussian",
)

# key -> required?
_KEYS = {
    "pareto": {"alpha": True},
    "iid-pareto-pair": {},
    "polar": {"alpha": True, "atoms": True, "weights": False, "norm": False},
    "mixture-hrv": {"alpha0": True},
    "line": {"g_alpha": False},
    "inv-uniform-pair": {},
    "gaussian-copula": {"rho": True},
    "gaussian": {"rho": True},
}


@dataclass(frozen=True, eq=False)
class Preset:
    name: str
    params: dict
    dim: int
    draw: Callable[[RngStream, int], np.ndarray]
    # limit measure of Z / b(t) on the full cone, when known in closed form
    limit: LimitMeasureSpec | None = None
    b: Callable[[float], float] | None = None
    rho: float | None = None
    extras: dict = field(default_factory=dict)

    def sample(self, rng: RngStream, n: int) -> np.ndarray:
        z = np.asarray(self.draw(rng, n), dtype=float)
        return z[:, None] if z.ndim == 1 else z

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v}" for k, v in self.params.items())


def _float(name, key, value) -> float:
    try:
        return float(value)
    except ValueError:
        raise BadGenerator(f"{name}: {key}={value!r} is not a number") from None


def _vector_list(name, key, value) -> list[list[float]]:
    out = []
    for part in value.split("|"):
        out.append([_float(name, key, c) for c in part.split("/")])
    return out


def parse_generator(spec: str) -> Preset:
    """Parse ``name`` or ``name:key=value,key=value``.

    Polar atoms are ``|``-separated vectors with ``/``-separated coordinates,
    e.g. ``polar:alpha=1,atoms=0.3/0.7|0.7/0.3,weights=0.5|0.5``.  Atoms are
    normalised onto the unit sphere of ``norm`` (default l1) and weights
    default to equal mass.
    """
    name, _, rest = spec.strip().partition(":")
    if name not in _KEYS:
        raise BadGenerator(f"unknown generator {name!r}; expected one of {', '.join(PRESET_NAMES)}")
    params: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or not key:
                raise BadGenerator(f"{name}: malformed parameter {item!r}, expected key=value")
            if key not in _KEYS[name]:
                raise BadGenerator(f"{name}: unknown parameter {key!r}")
            params[key] = value.strip()
    missing = [k for k, req in _KEYS[name].items() if req and k not in params]
    if missing:
        raise BadGenerator(f"{name}: missing parameter(s) {', '.join(missing)}")
    try:
        return _BUILDERS[name](params)
    except BadGenerator:
        raise
    except ConfigError as exc:
        raise BadGenerator(f"{name}: {exc}") from None
    except ValueError as exc:
        raise BadGenerator(f"{name}: {exc}") from None


def _pareto(p):
    alpha = _float("pareto", "alpha", p["alpha"])
    tail = ParetoTail(alpha)
    return Preset("pareto", p, 1, lambda rng, n: pareto_sample(alpha, rng, n),
                  LimitMeasureSpec(alpha, axis_measure(1)), tail.quantile_b)


def _iid_pareto_pair(p):
    return Preset("iid-pareto-pair", p, 2, iid_pareto_pair,
                  LimitMeasureSpec(1.0, axis_measure(2)), lambda t: t)


def _polar(p):
    alpha = _float("polar", "alpha", p["alpha"])
    norm = NormKind.parse(p.get("norm", "l1"))
    atoms = np.asarray(_vector_list("polar", "atoms", p["atoms"]), dtype=float)
    if atoms.ndim != 2 or len({len(a) for a in atoms}) != 1:
        raise BadGenerator("polar: atoms must all have the same dimension")
    if "weights" in p:
        w = np.asarray([_float("polar", "weights", v) for v in p["weights"].split("|")])
    else:
        w = np.full(atoms.shape[0], 1.0 / atoms.shape[0])
    if w.shape[0] != atoms.shape[0]:
        raise BadGenerator("polar: need one weight per atom")
    if np.any(atoms < 0) or np.any(norm(atoms) == 0):
        raise BadGenerator("polar: atoms must be nonzero and nonnegative")
    if np.any(~(w > 0)) or abs(w.sum() - 1.0) > 1e-9:
        raise BadGenerator("polar: weights must be positive and sum to 1")
    w = w / w.sum()
    # summing after normalising may still be off by an ulp
    w[-1] = 1.0 - w[:-1].sum()
    angular = DiscreteAngularMeasure.from_points(atoms, w, norm)
    spec = PolarConstructionSpec(alpha, angular)
    return Preset("polar", p, atoms.shape[1], lambda rng, n: polar_construction_sample(spec, rng, n),
                  LimitMeasureSpec(alpha, angular), ParetoTail(alpha).quantile_b)


def _mixture(p):
    spec = MixtureHrvSpec(_float("mixture-hrv", "alpha0", p["alpha0"]))
    # only the iid half survives at scale t on the full cone
    return Preset("mixture-hrv", p, 2, lambda rng, n: mixture_hrv_sample(spec, rng, n),
                  LimitMeasureSpec(1.0, axis_measure(2, [0.5, 0.5])), lambda t: t,
                  extras={"alpha0": spec.alpha0})


def _line(p):
    g_alpha = _float("line", "g_alpha", p.get("g_alpha", "0.5"))
    spec = LineConstructionSpec(ParetoTail(g_alpha))
    return Preset("line", p, 2, lambda rng, n: line_construction_sample(spec, rng, n),
                  extras={"g_alpha": g_alpha})


def _inv_uniform(p):
    return Preset("inv-uniform-pair", p, 2, inv_uniform_pair,
                  LimitMeasureSpec(1.0, axis_measure(2)), lambda t: t)


def _gaussian_copula(p):
    rho = _float("gaussian-copula", "rho", p["rho"])
    if not -1 < rho < 1:
        raise BadGenerator(f"gaussian-copula: rho must lie in (-1, 1), got {rho}")
    return Preset("gaussian-copula", p, 2, lambda rng, n: gaussian_copula_pair(rho, rng, n),
                  LimitMeasureSpec(1.0, axis_measure(2)), lambda t: t, rho=rho)


def _gaussian(p):
    rho = _float("gaussian", "rho", p["rho"])
    if not -1 < rho < 1:
        raise BadGenerator(f"gaussian: rho must lie in (-1, 1), got {rho}")
    return Preset("gaussian", p, 2, lambda rng, n: bivariate_normal_pair(rho, rng, n), rho=rho)


_BUILDERS = {
    "pareto": _pareto,
    "iid-pareto-pair": _iid_pareto_pair,
    "polar": _polar,
    "mixture-hrv": _mixture,
    "line": _line,
    "inv-uniform-pair": _inv_uniform,
    "gaussian-copula": _gaussian_copula,
    "gaussian": _gaussian,
}
