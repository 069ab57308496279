import math

import numpy as np
import pytest

from tempocause.dataset import (
    CONTINUOUS,
    DISCRETE,
    IngestOptions,
    export_csv,
    load_csv,
    parse_csv,
    summary,
)
from tempocause.errors import IngestError
from support import csv_from_columns, dataset_from_columns


def test_basic_ingestion_counts():
    text = "a,b,c\n1.5,x,7\n2.5,y,8\n,x,9\n3.5,y,10\n4.5,x,11\n5.5,y,12\n6.5,x,13\n7.5,y,14\n"
    ds = parse_csv(text, IngestOptions(), name="t")
    assert ds.length == 8
    assert len(ds.variables) == 3
    a = ds.variable("a")
    assert a.kind == CONTINUOUS
    assert int(a.missing_mask.sum()) == 1
    assert math.isnan(a.values[2])


def test_low_cardinality_strings_become_discrete():
    col = ["low", "normal", "high", "low", "normal", "high", "low", "normal"]
    ds = dataset_from_columns({"dose": col, "v": [float(i) for i in range(8)]})
    dose = ds.variable("dose")
    assert dose.kind == DISCRETE
    assert dose.levels == ("high", "low", "normal")


def test_many_distinct_floats_stay_continuous():
    ds = dataset_from_columns({"v": [float(i) + 0.5 for i in range(1000)]})
    assert ds.variable("v").kind == CONTINUOUS


def test_integer_column_within_threshold_is_discrete():
    ds = dataset_from_columns({"k": [i % 3 for i in range(9)]})
    k = ds.variable("k")
    assert k.kind == DISCRETE
    assert k.levels == ("0", "1", "2")


def test_decimal_text_stays_continuous():
    # "5.0" is a measurement, "5" a code: only the latter auto-discretizes.
    ds = dataset_from_columns({"v": [5.0] * 10})
    assert ds.variable("v").kind == CONTINUOUS


def test_forced_discrete_override():
    text = csv_from_columns({"v": [0.5, 1.5, 0.5, 1.5, 0.5, 1.5]})
    ds = parse_csv(text, IngestOptions(discrete_cols=frozenset({"v"})), name="t")
    assert ds.variable("v").kind == DISCRETE


def test_high_cardinality_strings_rejected():
    col = [f"id{i}" for i in range(30)]
    with pytest.raises(IngestError, match="discrete_threshold"):
        dataset_from_columns({"tag": col})


def test_ragged_rows_rejected():
    with pytest.raises(IngestError, match="ragged"):
        parse_csv("a,b\n1,2\n3\n", IngestOptions())


def test_too_few_rows_rejected():
    with pytest.raises(IngestError, match="at least 2"):
        parse_csv("a\n1\n", IngestOptions())


def test_non_monotonic_time_column_rejected():
    text = "t,v\n0,1\n2,2\n1,3\n"
    with pytest.raises(IngestError, match="strictly increasing"):
        parse_csv(text, IngestOptions(time_col="t"))


def test_time_column_dropped_and_uniform():
    text = "t,v\n0,1.5\n1,2.5\n2,3.5\n"
    ds = parse_csv(text, IngestOptions(time_col="t"))
    assert ds.variable_names == ["v"]
    assert ds.ingest_warnings == ()


def test_irregular_time_column_warns():
    text = "t,v\n0,1.5\n1,2.5\n5,3.5\n"
    ds = parse_csv(text, IngestOptions(time_col="t"))
    assert any("uniform" in w for w in ds.ingest_warnings)


def test_deterministic_ingestion():
    text = csv_from_columns({"v": [1.5, None, 2.5, 3.5], "d": ["a", "b", "a", None]})
    assert parse_csv(text, IngestOptions(), name="x") == parse_csv(text, IngestOptions(), name="x")


def test_round_trip_export(tmp_path):
    ds = dataset_from_columns(
        {"v": [1.5, None, 2.25, -3.125, 0.1], "d": ["a", "b", None, "a", "b"]},
        name="roundtrip",
    )
    path = tmp_path / "roundtrip.csv"
    export_csv(ds, path)
    again = load_csv(path)
    assert again == ds


def test_missingness_preserved():
    ds = dataset_from_columns({"v": [1.0, None, 2.0, None, 3.0, 4.0]})
    assert int(ds.variable("v").missing_mask.sum()) == 2


def test_summary_constant_series():
    ds = dataset_from_columns({"v": [5.0] * 10})
    stats = summary(ds)["variables"][0]
    assert stats["min"] == stats["max"] == 5.0
    assert stats["histogram"]["counts"] == [10]


def test_summary_level_frequencies():
    ds = dataset_from_columns({"d": ["a", "a", "b", None, "a", "b"]})
    stats = summary(ds)["variables"][0]
    assert stats["levels"] == {"a": 3, "b": 2}
    assert stats["missing"] == 1
    assert stats["count"] == 5


def test_summary_histogram_covers_range():
    values = [float(v) for v in np.linspace(0, 10, 50)]
    ds = dataset_from_columns({"v": values})
    hist = summary(ds)["variables"][0]["histogram"]
    assert hist["edges"][0] == 0.0
    assert hist["edges"][-1] == 10.0
    assert sum(hist["counts"]) == 50


def test_bundled_samples_reproduce_from_generators():
    from importlib import resources
    from tempocause.scenarios import fig1_micro_csv, glucose_sample

    data = resources.files("tempocause.data")
    assert data.joinpath("glucose_sample.csv").read_bytes() == glucose_sample().csv_text.encode()
    assert data.joinpath("fig1_micro.csv").read_bytes() == fig1_micro_csv().encode()


def test_bundled_sample_mean_matches_independent_recompute():
    # Golden check: recompute the mean straight from the CSV text.
    from importlib import resources
    from tempocause.scenarios import bundled_sample

    text = resources.files("tempocause.data").joinpath("glucose_sample.csv").read_text()
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    raw = [float(r[0]) for r in rows if r[0] != ""]
    independent_mean = sum(raw) / len(raw)

    ds = bundled_sample("glucose")
    stats = next(v for v in summary(ds)["variables"] if v["name"] == "Glucose")
    assert math.isclose(stats["mean"], independent_mean, rel_tol=1e-9)
