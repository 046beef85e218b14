import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rvcones.errors import EmptyInput, MissingBlock, ParseError, RaggedRows
from rvcones.report import (
    SCHEMA_ID,
    Report,
    angular_histogram,
    emit_plot_data,
    ingest_csv,
    read_csv_table,
    validate_report,
    write_csv,
)


def test_ingest_plain(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1,2\n3,4\n5,6\n")
    np.testing.assert_array_equal(ingest_csv(p), [[1, 2], [3, 4], [5, 6]])


def test_ingest_header(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1,2\n3.5,-4e2\n")
    header, data = read_csv_table(p)
    assert header == ["x", "y"]
    np.testing.assert_array_equal(data, [[1, 2], [3.5, -400]])


def test_ingest_errors(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1,2\n3,abc\n")
    with pytest.raises(ParseError) as e:
        ingest_csv(p)
    assert (e.value.row, e.value.column) == (3, 2)
    assert "row 3" in str(e.value) and "column 2" in str(e.value)
    p.write_text("1,2\n3\n")
    with pytest.raises(RaggedRows):
        ingest_csv(p)
    p.write_text("")
    with pytest.raises(EmptyInput):
        ingest_csv(p)
    p.write_text("x,y\n")
    with pytest.raises(EmptyInput):
        ingest_csv(p)


@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
                min_size=1, max_size=20))
def test_csv_round_trip(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("csv") / "r.csv"
    write_csv(p, ["a", "b", "c"], rows)
    np.testing.assert_array_equal(ingest_csv(p), np.array(rows))


def minimal_report(**results):
    return Report("0.1.0", {"subcommand": "estimate", "seed": 1}, results, [])


def test_report_round_trip_and_schema():
    r = minimal_report(hrv={"alpha_hat": 1.0, "alpha0_hat": 2.0, "eta_hat": 0.5, "lambda_hat": 0.01,
                            "u": 0.99, "k": 10, "verdict": "HRV-consistent"})
    text = r.to_json()
    back = Report.from_json(text)
    assert back == r and back.to_json() == text
    assert json.loads(text)["schema"] == SCHEMA_ID
    validate_report(r)
    bad = r.to_dict()
    bad["results"]["hrv"]["verdict"] = "maybe"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(bad)


def test_report_rejects_nan():
    with pytest.raises(ValueError):
        minimal_report(extra=float("nan")).to_json()


def test_hill_plot_rows(tmp_path):
    rows = [[k, 1.0 + k / 1e4] for k in range(100, 1001, 100)]
    r = minimal_report(estimate={"n": 1, "d": 1, "k": 1, "marginal_alpha": [1.0], "max_tail": 1.0,
                                 "min_tail": None, "radius_alpha": 1.0, "hill_plot": rows})
    path = emit_plot_data(r, "hill-plot", tmp_path / "h.csv")
    data = ingest_csv(path)
    assert data.shape == (10, 2)
    np.testing.assert_array_equal(data, rows)


def test_angular_histogram_single_ray():
    hist = angular_histogram([{"direction": [0.2, 0.8], "weight": 0.5}] * 2)
    assert len(hist) == 1 and hist[0][1] == 1.0


def test_missing_blocks(tmp_path):
    r = minimal_report()
    for kind in ("hill-plot", "angular-histogram", "cond-cdf"):
        with pytest.raises(MissingBlock):
            emit_plot_data(r, kind, tmp_path / "x.csv")
    assert not (tmp_path / "x.csv").exists()
