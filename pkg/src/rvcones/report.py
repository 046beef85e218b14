"""Versioned JSON report, CSV input/output and plot-data tables."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInput, MissingBlock, ParseError, RaggedRows

SCHEMA_ID = "rvcones.report/1"
PLOT_KINDS = ("hill-plot", "angular-histogram", "cond-cdf")
HISTOGRAM_BIN_WIDTH = 0.05

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "rvcones report",
    "type": "object",
    "required": ["schema", "tool_version", "config", "results", "warnings"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "tool_version": {"type": "string"},
        "config": {"type": "object"},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "results": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "simulate": {
                    "type": "object",
                    "required": ["generator", "n", "d", "sample_file"],
                },
                "estimate": {
                    "type": "object",
                    "required": ["n", "d", "k", "marginal_alpha", "max_tail", "min_tail",
                                 "radius_alpha", "hill_plot"],
                    "properties": {
                        "hill_plot": {
                            "type": "array",
                            "items": {"type": "array", "prefixItems": [{"type": "integer"},
                                                                       {"type": "number"}]},
                        },
                        "angular": {"$ref": "#/$defs/angular"},
                    },
                },
                "hrv": {
                    "type": "object",
                    "required": ["alpha_hat", "alpha0_hat", "eta_hat", "lambda_hat", "u", "k",
                                 "verdict"],
                    "properties": {
                        "verdict": {"enum": ["HRV-consistent", "no-HRV", "inconclusive"]},
                    },
                },
                "pot": {
                    "type": "object",
                    "required": ["threshold", "n", "exceedances", "exceedance_file"],
                },
                "evt": {
                    "type": "object",
                    "required": ["block", "n_blocks", "model", "sup_distance", "table_file"],
                },
                "condlimit": {
                    "type": "object",
                    "required": ["thresholds", "beta_hat", "alpha_scale_hat", "exceedances",
                                 "c_grid", "psi1", "psi2", "product_verdict", "cond_cdf"],
                    "properties": {
                        "cond_cdf": {
                            "type": "object",
                            "required": ["t", "center", "scale", "rows"],
                        },
                    },
                },
            },
        },
    },
    "$defs": {
        "angular": {
            "type": "object",
            "required": ["alpha_hat", "threshold", "k", "norm", "atoms"],
            "properties": {
                "atoms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["direction", "weight"],
                        "properties": {
                            "direction": {"type": "array", "items": {"type": "number"}},
                            "weight": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                },
            },
        }
    },
}


@dataclass
class Report:
    tool_version: str
    config: dict
    results: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    schema: str = SCHEMA_ID

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "tool_version": self.tool_version,
            "config": self.config,
            "results": self.results,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["tool_version"], d["config"], d["results"], d["warnings"], d["schema"])

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def validate_report(report: Report | dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report does not match the schema."""
    import jsonschema

    d = report.to_dict() if isinstance(report, Report) else report
    jsonschema.validate(d, REPORT_SCHEMA)


def clean_float(v):
    """JSON-safe float: non-finite values become None."""
    v = float(v)
    return v if math.isfinite(v) else None


# --------------------------------------------------------------------------
# CSV


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_table(path) -> tuple[list[str] | None, np.ndarray]:
    """Numeric CSV with an optional single header row (detected when any first-row cell is non-numeric)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyInput(f"{path}: no rows")
    header = None
    start = 0
    if not all(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        start = 1
    data = rows[start:]
    if not data:
        raise EmptyInput(f"{path}: header only, no data rows")
    width = len(header) if header is not None else len(data[0])
    out = np.empty((len(data), width))
    for i, row in enumerate(data):
        line = i + start + 1
        if len(row) != width:
            raise RaggedRows(f"{path}: row {line} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell.strip())
            except ValueError:
                raise ParseError(
                    f"{path}: row {line}, column {j + 1}: cannot parse {cell!r} as a number",
                    row=line, column=j + 1,
                ) from None
    return header, out


def ingest_csv(path) -> np.ndarray:
    """Observations of a numeric CSV file as an ``(n, d)`` array, in file order."""
    return read_csv_table(path)[1]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


# --------------------------------------------------------------------------
# plot data


def angular_histogram(atoms: list[dict], width: float = HISTOGRAM_BIN_WIDTH):
    """Mass per grid cell of side ``width`` on the unit-sphere directions; nonempty cells only."""
    nbins = int(round(1.0 / width))
    cells: dict[tuple, float] = {}
    for atom in atoms:
        d = np.asarray(atom["direction"], dtype=float)
        idx = tuple(int(i) for i in np.clip(np.floor(d / width), 0, nbins - 1))
        cells[idx] = cells.get(idx, 0.0) + float(atom["weight"])
    return [(tuple((i + 0.5) * width for i in idx), mass) for idx, mass in sorted(cells.items())]


def plot_rows(report: Report, kind: str):
    """Header and rows of the plot-data table ``kind`` taken from the report's result blocks."""
    res = report.results
    if kind == "hill-plot":
        if "estimate" not in res:
            raise MissingBlock("hill-plot needs an estimate block")
        return ["k", "alpha_hat"], [tuple(r) for r in res["estimate"]["hill_plot"]]
    if kind == "angular-histogram":
        block = res.get("estimate", {}).get("angular")
        if block is None:
            raise MissingBlock("angular-histogram needs an angular estimate block")
        hist = angular_histogram(block["atoms"])
        d = len(hist[0][0]) if hist else 0
        return [f"bin_{i + 1}" for i in range(d)] + ["mass"], [c + (m,) for c, m in hist]
    if kind == "cond-cdf":
        if "condlimit" not in res:
            raise MissingBlock("cond-cdf needs a condlimit block")
        rows = res["condlimit"]["cond_cdf"]["rows"]
        return ["x", "empirical", "oracle"], [
            (r[0], r[1], float("nan") if r[2] is None else r[2]) for r in rows
        ]
    raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")


def emit_plot_data(report: Report, kind: str, path) -> Path:
    header, rows = plot_rows(report, kind)
    return write_csv(path, header, rows)
