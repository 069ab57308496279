"""Tabular time-series ingestion and immutable dataset snapshots.

A dataset is a fixed-length multivariate series over a uniform integer time
index. Continuous variables are stored as float arrays with NaN marking
missing entries; discrete variables as level-index arrays with -1 marking
missing. Nothing here imputes: missing cells stay missing and are excluded
from every count downstream.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IngestError, ValidationError

CONTINUOUS = "continuous"
DISCRETE = "discrete"

DEFAULT_DISCRETE_THRESHOLD = 12
DEFAULT_HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class IngestOptions:
    """Per-load knobs: time column, forced-discrete columns, kind threshold."""

    time_col: str | None = None
    discrete_cols: frozenset[str] = frozenset()
    discrete_threshold: int = DEFAULT_DISCRETE_THRESHOLD
    name: str | None = None
    time_unit_label: str = "step"


@dataclass(frozen=True, eq=False)
class Variable:
    """One column of the dataset.

    ``values`` is read-only: float64 with NaN for missing (continuous) or
    int32 level indices with -1 for missing (discrete, indexing ``levels``).
    """

    name: str
    kind: str
    values: np.ndarray
    levels: tuple[str, ...] = ()
    observed_min: float | None = None
    observed_max: float | None = None

    def __post_init__(self):
        self.values.setflags(write=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Variable):
            return NotImplemented
        return (
            self.name == other.name
            and self.kind == other.kind
            and self.levels == other.levels
            and self.observed_min == other.observed_min
            and self.observed_max == other.observed_max
            and np.array_equal(self.values, other.values, equal_nan=self.kind == CONTINUOUS)
        )

    @property
    def missing_mask(self) -> np.ndarray:
        if self.kind == CONTINUOUS:
            return np.isnan(self.values)
        return self.values < 0

    @property
    def non_missing_count(self) -> int:
        return int((~self.missing_mask).sum())

    def value_range(self) -> float:
        """Observed max minus min; 0.0 for constant or discrete variables."""
        if self.kind != CONTINUOUS or self.observed_min is None:
            return 0.0
        return float(self.observed_max - self.observed_min)


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    length: int
    variables: tuple[Variable, ...]
    time_unit_label: str = "step"
    ingest_warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.length < 2:
            raise ValidationError(f"dataset needs at least 2 time points, got {self.length}")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate variable names")
        for v in self.variables:
            if len(v.values) != self.length:
                raise ValidationError(
                    f"variable {v.name!r} has {len(v.values)} slots, expected {self.length}"
                )
        object.__setattr__(self, "_by_name", {v.name: v for v in self.variables})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.length == other.length
            and self.time_unit_label == other.time_unit_label
            and self.variables == other.variables
        )

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValidationError(f"unknown variable {name!r}") from None

    def has_variable(self, name: str) -> bool:
        return name in self._by_name

    @property
    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def fingerprint(self) -> dict:
        """Identity triple used to sanity-check restored flow graphs."""
        joined = "\x1f".join(self.variable_names)
        digest = hashlib.sha1(joined.encode("utf-8")).hexdigest()[:12]
        return {"dataset_name": self.name, "length": self.length, "variables_hash": digest}


def _parse_float(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    if math.isnan(value) or math.isinf(value):
        return None
    return value


def _parse_int(text: str) -> int | None:
    try:
        return int(text)
    except ValueError:
        return None


def _build_variable(name: str, cells: list[str], options: IngestOptions) -> Variable:
    present = [c for c in cells if c != ""]
    if not present:
        raise IngestError(f"column {name!r} has no non-missing values")

    numeric = all(_parse_float(c) is not None for c in present)
    distinct = set(present)

    # "Integer" is lexical: "5" counts, "5.0" reads as a measurement and
    # keeps the column continuous.
    forced_discrete = name in options.discrete_cols
    auto_discrete = len(distinct) <= options.discrete_threshold and (
        not numeric or all(_parse_int(c) is not None for c in present)
    )

    if forced_discrete or auto_discrete:
        if numeric:
            # Canonicalize numeric labels so export/re-ingest round-trips.
            def canon(c: str) -> str:
                i = _parse_int(c)
                return repr(i) if i is not None else repr(_parse_float(c))

            pairs = sorted({(float(c), canon(c)) for c in present})
            levels = tuple(label for _, label in pairs)
            label_of = {c: canon(c) for c in distinct}
        else:
            levels = tuple(sorted(distinct))
            label_of = {c: c for c in distinct}
        index_of = {label: i for i, label in enumerate(levels)}
        values = np.array(
            [index_of[label_of[c]] if c != "" else -1 for c in cells], dtype=np.int32
        )
        return Variable(name=name, kind=DISCRETE, values=values, levels=levels)

    if not numeric:
        bad = sorted(c for c in distinct if _parse_float(c) is None)[:3]
        raise IngestError(
            f"column {name!r} has {len(distinct)} distinct non-numeric values "
            f"(e.g. {bad}), above discrete_threshold={options.discrete_threshold}; "
            "declare it with discrete_cols or raise the threshold"
        )

    values = np.array([_parse_float(c) if c != "" else math.nan for c in cells], dtype=np.float64)
    finite = values[~np.isnan(values)]
    return Variable(
        name=name,
        kind=CONTINUOUS,
        values=values,
        observed_min=float(finite.min()),
        observed_max=float(finite.max()),
    )


def _read_rows(text: str) -> tuple[list[str], list[list[str]]]:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise IngestError("empty file")
    header, data = rows[0], rows[1:]
    header = [h.strip() for h in header]
    if any(h == "" for h in header):
        raise IngestError("empty column name in header row")
    if len(set(header)) != len(header):
        raise IngestError("duplicate column names in header row")
    width = len(header)
    for i, row in enumerate(data):
        if len(row) != width:
            raise IngestError(f"ragged row {i + 2}: {len(row)} cells, expected {width}")
    if len(data) < 2:
        raise IngestError(f"need at least 2 data rows, got {len(data)}")
    return header, [[c.strip() for c in row] for row in data]


def parse_csv(text: str, options: IngestOptions = IngestOptions(), name: str = "dataset") -> Dataset:
    """Build a Dataset from CSV text. See load_csv for the file-path variant."""
    header, data = _read_rows(text)
    warnings: list[str] = []

    if options.time_col is not None:
        if options.time_col not in header:
            raise IngestError(f"time column {options.time_col!r} not in header")
        t_idx = header.index(options.time_col)
        stamps = []
        for i, row in enumerate(data):
            v = _parse_float(row[t_idx])
            if v is None:
                raise IngestError(f"time column has non-numeric or missing value at row {i + 2}")
            stamps.append(v)
        diffs = [b - a for a, b in zip(stamps, stamps[1:])]
        if any(d <= 0 for d in diffs):
            raise IngestError("time column is not strictly increasing")
        if len(set(diffs)) > 1 and (max(diffs) - min(diffs)) > 1e-9 * max(abs(d) for d in diffs):
            warnings.append(
                f"time column {options.time_col!r} is not uniformly spaced; "
                "delays are counted in row index units"
            )
        header = header[:t_idx] + header[t_idx + 1 :]
        data = [row[:t_idx] + row[t_idx + 1 :] for row in data]

    if not header:
        raise IngestError("no usable columns after dropping the time column")

    variables = tuple(
        _build_variable(col, [row[j] for row in data], options) for j, col in enumerate(header)
    )
    return Dataset(
        name=options.name or name,
        length=len(data),
        variables=variables,
        time_unit_label=options.time_unit_label,
        ingest_warnings=tuple(warnings),
    )


def load_csv(path, options: IngestOptions = IngestOptions()) -> Dataset:
    """Ingest a UTF-8 comma-separated file with a header row.

    Empty cells are missing. A column is Discrete iff declared in
    ``options.discrete_cols`` or it has at most ``discrete_threshold``
    distinct non-missing values, all strings or integers.
    """
    from pathlib import Path

    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return parse_csv(text, options, name=p.stem)


def format_value(variable: Variable, t: int) -> str:
    """Cell text for export: level label, shortest float repr, or ''.

    Continuous cells keep their decimal form (repr of float) so a re-ingest
    types the column continuous again.
    """
    if variable.kind == DISCRETE:
        idx = int(variable.values[t])
        return variable.levels[idx] if idx >= 0 else ""
    v = float(variable.values[t])
    return "" if math.isnan(v) else repr(v)


def export_csv(ds: Dataset, path) -> None:
    """Write the dataset back out so it re-ingests to an equal Dataset."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.variable_names)
        for t in range(ds.length):
            writer.writerow([format_value(v, t) for v in ds.variables])


def _continuous_histogram(values: np.ndarray, lo: float, hi: float, bins: int) -> dict:
    finite = values[~np.isnan(values)]
    if lo == hi:
        return {"edges": [lo, hi], "counts": [int(finite.size)]}
    counts, edges = np.histogram(finite, bins=bins, range=(lo, hi))
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def variable_summary(variable: Variable, bins: int = DEFAULT_HISTOGRAM_BINS) -> dict:
    missing = int(variable.missing_mask.sum())
    out: dict = {
        "name": variable.name,
        "kind": variable.kind,
        "count": variable.non_missing_count,
        "missing": missing,
    }
    if variable.kind == CONTINUOUS:
        finite = variable.values[~np.isnan(variable.values)]
        out.update(
            {
                "min": variable.observed_min,
                "max": variable.observed_max,
                "mean": float(finite.mean()),
                "histogram": _continuous_histogram(
                    variable.values, variable.observed_min, variable.observed_max, bins
                ),
            }
        )
    else:
        freq = {
            label: int((variable.values == i).sum()) for i, label in enumerate(variable.levels)
        }
        out["levels"] = freq
    return out


def summary(ds: Dataset, bins: int = DEFAULT_HISTOGRAM_BINS) -> dict:
    """Per-variable stats backing the distribution and loading views."""
    return {
        "name": ds.name,
        "length": ds.length,
        "time_unit_label": ds.time_unit_label,
        "variables": [variable_summary(v, bins) for v in ds.variables],
        "warnings": list(ds.ingest_warnings),
    }


def rename(ds: Dataset, name: str) -> Dataset:
    return replace(ds, name=name)
