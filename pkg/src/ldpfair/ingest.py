"""Load benchmark-style CSVs into datasets.

The loader maps CSV columns onto schema attributes, drops rows failing the
configured filters, buckets continuous columns into categorical ranges,
binarizes the outcome at an absolute or quantile threshold, and reports
exactly what happened to every input row (kept, filtered, or errored).

Unknown categories are row errors, never silently-added domain values: the
domain size parameterizes the privacy mechanism and must not drift with the
data.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .data import (
    ROLE_NON_SENSITIVE,
    ROLE_OUTCOME,
    ROLES,
    AttributeSpec,
    Dataset,
    Schema,
    validate,
)
from .errors import ConfigError, IngestError
from .synth import MODE_ABSOLUTE, MODE_QUANTILE, ThresholdSpec, apply_threshold

MAX_REPORTED_ERRORS = 100


@dataclass(frozen=True)
class BinningSpec:
    """Bucket a numeric column: explicit edges or equal-population quantile cuts.

    Values land in bucket i iff ``edge[i-1] < value <= edge[i]`` (left-open,
    right-closed), matching the strict-greater rule used for outcomes.
    """

    edges: tuple[float, ...] | None = None
    quantile_bins: int | None = None

    def __post_init__(self):
        if (self.edges is None) == (self.quantile_bins is None):
            raise ConfigError("binning needs exactly one of 'edges' or 'quantile_bins'")
        if self.edges is not None:
            edges = tuple(float(e) for e in self.edges)
            if any(a >= b for a, b in zip(edges, edges[1:])):
                raise ConfigError(f"bin edges must be strictly increasing, got {edges}")
            object.__setattr__(self, "edges", edges)
        if self.quantile_bins is not None and self.quantile_bins < 2:
            raise ConfigError("quantile_bins must be >= 2")


@dataclass(frozen=True)
class ColumnSpec:
    """One attribute to extract: categorical (allow-list) or numeric (binned)."""

    name: str
    column: str
    role: str
    categories: tuple[str, ...] | None = None
    binning: BinningSpec | None = None

    def __post_init__(self):
        if self.role not in ROLES or self.role == ROLE_OUTCOME:
            raise ConfigError(f"column {self.name!r} has invalid role {self.role!r}")
        if (self.categories is None) == (self.binning is None):
            raise ConfigError(f"column {self.name!r} needs exactly one of 'categories' or 'binning'")
        if self.categories is not None:
            object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))


@dataclass(frozen=True)
class OutcomeSpec:
    name: str
    column: str
    threshold: ThresholdSpec


@dataclass(frozen=True)
class RowFilter:
    """Keep rows whose raw cell is in an allow-list or numeric range."""

    column: str
    keep: tuple[str, ...] | None = None
    min: float | None = None
    max: float | None = None

    def __post_init__(self):
        if self.keep is None and self.min is None and self.max is None:
            raise ConfigError(f"filter on {self.column!r} has no condition")
        if self.keep is not None:
            object.__setattr__(self, "keep", tuple(str(v) for v in self.keep))


@dataclass(frozen=True)
class IngestConfig:
    path: str
    attributes: tuple[ColumnSpec, ...]
    outcome: OutcomeSpec
    filters: tuple[RowFilter, ...] = ()
    privileged_index: int = 1
    name: str = "dataset"
    regime: str = "custom"
    sensitive_order: tuple[str, ...] = ()


@dataclass(frozen=True)
class RowError:
    row: int
    column: str
    message: str


@dataclass
class LoadReport:
    """Exact accounting: records_in = records_out + filtered + errored."""

    records_in: int = 0
    records_out: int = 0
    filtered: int = 0
    errored: int = 0
    errors: list[RowError] = field(default_factory=list)
    bin_edges: dict[str, tuple[float, ...]] = field(default_factory=dict)
    threshold: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "records_in": self.records_in,
            "records_out": self.records_out,
            "filtered": self.filtered,
            "errored": self.errored,
            "errors": [{"row": e.row, "column": e.column, "message": e.message} for e in self.errors],
            "bin_edges": {k: list(v) for k, v in self.bin_edges.items()},
            "threshold": self.threshold,
        }

    def to_text(self) -> str:
        lines = [
            f"records in:  {self.records_in}",
            f"records out: {self.records_out}",
            f"filtered:    {self.filtered}",
            f"errored:     {self.errored}",
        ]
        if self.threshold is not None:
            lines.append(f"outcome threshold: {self.threshold:g}")
        for name, edges in self.bin_edges.items():
            lines.append(f"bin edges for {name}: {', '.join(f'{e:g}' for e in edges)}")
        for err in self.errors:
            lines.append(f"row {err.row}, column {err.column}: {err.message}")
        return "\n".join(lines)


def _passes_filters(raw: dict[str, str], filters, row_no: int, errors: list[RowError]) -> bool | None:
    """True to keep, False to drop; None when a filter cell is malformed."""
    for f in filters:
        cell = raw.get(f.column, "").strip()
        if f.keep is not None:
            if cell not in f.keep:
                return False
            continue
        try:
            value = float(cell)
        except ValueError:
            if len(errors) < MAX_REPORTED_ERRORS:
                errors.append(RowError(row_no, f.column, f"filter cell {cell!r} is not numeric"))
            return None
        if f.min is not None and value < f.min:
            return False
        if f.max is not None and value > f.max:
            return False
    return True


def _bucket_labels(edges: tuple[float, ...]) -> tuple[str, ...]:
    labels = [f"<={edges[0]:g}"]
    labels += [f"({a:g}, {b:g}]" for a, b in zip(edges, edges[1:])]
    labels.append(f">{edges[-1]:g}")
    return tuple(labels)


def _quantile_edges(values: np.ndarray, bins: int) -> tuple[float, ...]:
    levels = [i / bins for i in range(1, bins)]
    edges = [float(np.quantile(values, lv)) for lv in levels]
    # Collapse duplicate cuts from heavily discrete columns rather than
    # keeping empty buckets.
    unique: list[float] = []
    for e in edges:
        if not unique or e > unique[-1]:
            unique.append(e)
    if not unique:
        raise IngestError("quantile binning is degenerate: all values identical")
    return tuple(unique)


def load(config: IngestConfig) -> tuple[Dataset, LoadReport]:
    """Read, filter, encode, bucket, and binarize one CSV into a dataset."""
    report = LoadReport()
    try:
        fh = open(config.path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {config.path!r}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or ())
        mapped = [spec.column for spec in config.attributes] + [config.outcome.column]
        mapped += [f.column for f in config.filters]
        missing = sorted(set(mapped) - header)
        if missing:
            raise IngestError(f"columns {missing} not in header of {config.path!r}")

        categorical: dict[str, list[int]] = {s.name: [] for s in config.attributes if s.categories}
        numeric: dict[str, list[float]] = {s.name: [] for s in config.attributes if s.binning}
        outcome_values: list[float] = []

        for row_no, raw in enumerate(reader, start=1):
            report.records_in += 1
            keep = _passes_filters(raw, config.filters, row_no, report.errors)
            if keep is None:
                report.errored += 1
                continue
            if not keep:
                report.filtered += 1
                continue

            parsed_cat: dict[str, int] = {}
            parsed_num: dict[str, float] = {}
            outcome_value: float | None = None
            ok = True
            for spec in config.attributes:
                cell = (raw.get(spec.column) or "").strip()
                if spec.categories is not None:
                    if cell not in spec.categories:
                        ok = False
                        if len(report.errors) < MAX_REPORTED_ERRORS:
                            report.errors.append(
                                RowError(row_no, spec.column, f"category {cell!r} not in allow-list")
                            )
                        break
                    parsed_cat[spec.name] = spec.categories.index(cell)
                else:
                    try:
                        parsed_num[spec.name] = float(cell)
                    except ValueError:
                        ok = False
                        if len(report.errors) < MAX_REPORTED_ERRORS:
                            report.errors.append(RowError(row_no, spec.column, f"cell {cell!r} is not numeric"))
                        break
            if ok:
                cell = (raw.get(config.outcome.column) or "").strip()
                try:
                    outcome_value = float(cell)
                except ValueError:
                    ok = False
                    if len(report.errors) < MAX_REPORTED_ERRORS:
                        report.errors.append(
                            RowError(row_no, config.outcome.column, f"outcome cell {cell!r} is not numeric")
                        )
            if not ok:
                report.errored += 1
                continue

            report.records_out += 1
            for name, value in parsed_cat.items():
                categorical[name].append(value)
            for name, value in parsed_num.items():
                numeric[name].append(value)
            outcome_values.append(outcome_value)

    columns: dict[str, np.ndarray] = {}
    attributes: list[AttributeSpec] = []
    for spec in config.attributes:
        if spec.categories is not None:
            attributes.append(AttributeSpec(spec.name, spec.categories, spec.role))
            columns[spec.name] = np.array(categorical[spec.name], dtype=np.int64)
        else:
            values = np.array(numeric[spec.name], dtype=float)
            if spec.binning.edges is not None:
                edges = spec.binning.edges
            else:
                if values.size == 0:
                    raise IngestError(f"no rows left to derive quantile bins for {spec.name!r}")
                edges = _quantile_edges(values, spec.binning.quantile_bins)
            report.bin_edges[spec.name] = edges
            # searchsorted(side='left') counts edges strictly below the value,
            # which is exactly the left-open, right-closed bucket index.
            columns[spec.name] = np.searchsorted(np.asarray(edges), values, side="left").astype(np.int64)
            attributes.append(AttributeSpec(spec.name, _bucket_labels(edges), spec.role))

    scores = np.array(outcome_values, dtype=float)
    try:
        y, tau = apply_threshold(scores, config.outcome.threshold)
    except Exception as exc:
        raise IngestError(f"cannot binarize outcome: {exc}") from exc
    report.threshold = tau
    columns[config.outcome.name] = y
    attributes.append(AttributeSpec(config.outcome.name, ("0", "1"), ROLE_OUTCOME))

    schema = Schema(
        attributes=tuple(attributes),
        sensitive_order=config.sensitive_order,
        privileged_index=config.privileged_index,
    )
    dataset = Dataset(schema, columns)
    violations = validate(dataset)
    if violations:
        raise IngestError("loaded dataset is invalid: " + "; ".join(str(v) for v in violations[:5]))
    return dataset, report


def _threshold_from_dict(doc: dict) -> ThresholdSpec:
    if "threshold" in doc:
        return ThresholdSpec(mode=MODE_ABSOLUTE, value=float(doc["threshold"]))
    if "level" in doc:
        return ThresholdSpec(mode=MODE_QUANTILE, value=float(doc["level"]))
    raise ConfigError("outcome needs either 'threshold' (absolute) or 'level' (quantile)")


def config_from_dict(doc: dict, base_path: str = "") -> IngestConfig:
    """Build an IngestConfig from a parsed YAML document."""
    if not isinstance(doc, dict) or "csv" not in doc:
        raise ConfigError("ingest document must be a mapping with a 'csv' path")
    try:
        attrs = []
        for entry in doc.get("attributes", []):
            binning = None
            if "bins" in entry:
                bins = entry["bins"]
                binning = BinningSpec(
                    edges=tuple(bins["edges"]) if "edges" in bins else None,
                    quantile_bins=bins.get("quantile_bins"),
                )
            attrs.append(
                ColumnSpec(
                    name=str(entry["name"]),
                    column=str(entry.get("column", entry["name"])),
                    role=str(entry.get("role", ROLE_NON_SENSITIVE)),
                    categories=tuple(entry["categories"]) if "categories" in entry else None,
                    binning=binning,
                )
            )
        outcome_doc = doc["outcome"]
        outcome = OutcomeSpec(
            name=str(outcome_doc.get("name", outcome_doc["column"])),
            column=str(outcome_doc["column"]),
            threshold=_threshold_from_dict(outcome_doc),
        )
        filters = tuple(
            RowFilter(
                column=str(f["column"]),
                keep=tuple(f["keep"]) if "keep" in f else None,
                min=float(f["min"]) if "min" in f else None,
                max=float(f["max"]) if "max" in f else None,
            )
            for f in doc.get("filters", [])
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed ingest document: {exc!r}") from exc
    path = str(doc["csv"])
    if base_path and not os.path.isabs(path):
        path = os.path.join(base_path, path)
    return IngestConfig(
        path=path,
        attributes=tuple(attrs),
        outcome=outcome,
        filters=filters,
        privileged_index=int(doc.get("privileged_index", 1)),
        name=str(doc.get("name", "dataset")),
        regime=str(doc.get("regime", "custom")),
        sensitive_order=tuple(doc.get("sensitive_order", ())),
    )


def load_config(path: str) -> IngestConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return config_from_dict(doc, base_path=os.path.dirname(os.path.abspath(path)))


def report_to_json(report: LoadReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2)


COMPAS_THRESHOLDS = {"Q1": 1.0, "Q2": 3.0, "Q3": 5.0}
ADULT_THRESHOLDS = {"Q1": 10_000.0, "Q2": 27_000.0, "Q3": 50_000.0}

_ADULT_RACES = ("Amer-Indian-Eskimo", "Asian-Pac-Islander", "Black", "Other", "White")
_ADULT_MARITAL = (
    "Divorced",
    "Married-AF-spouse",
    "Married-civ-spouse",
    "Married-spouse-absent",
    "Never-married",
    "Separated",
    "Widowed",
)
_ADULT_EDUCATION = (
    "Preschool", "1st-4th", "5th-6th", "7th-8th", "9th", "10th", "11th", "12th",
    "HS-grad", "Some-college", "Assoc-voc", "Assoc-acdm", "Bachelors", "Masters",
    "Prof-school", "Doctorate",
)
_ADULT_COUNTRIES = (
    "Cambodia", "Canada", "China", "Columbia", "Cuba", "Dominican-Republic",
    "Ecuador", "El-Salvador", "England", "France", "Germany", "Greece",
    "Guatemala", "Haiti", "Holand-Netherlands", "Honduras", "Hong", "Hungary",
    "India", "Iran", "Ireland", "Italy", "Jamaica", "Japan", "Laos", "Mexico",
    "Nicaragua", "Outlying-US(Guam-USVI-etc)", "Peru", "Philippines", "Poland",
    "Portugal", "Puerto-Rico", "Scotland", "South", "Taiwan", "Thailand",
    "Trinadad&Tobago", "United-States", "Vietnam", "Yugoslavia",
)


def compas_config(csv_path: str, regime: str = "Q2") -> IngestConfig:
    """Default mapping for a ProPublica-style recidivism-score CSV.

    Keeps black and white defendants screened within 30 days of arrest;
    race is the protected attribute (white coded as the privileged group),
    the sensitive set is {race, sex, age}, and the decile risk score is
    thresholded into the requested outcome regime.
    """
    if regime not in COMPAS_THRESHOLDS:
        raise ConfigError(f"unknown regime {regime!r}")
    return IngestConfig(
        path=csv_path,
        attributes=(
            ColumnSpec("race", "race", "protected", categories=("African-American", "Caucasian")),
            ColumnSpec("sex", "sex", "sensitive", categories=("Female", "Male")),
            ColumnSpec("age", "age", "sensitive", binning=BinningSpec(quantile_bins=3)),
            ColumnSpec("priors", "priors_count", "non_sensitive", binning=BinningSpec(quantile_bins=3)),
        ),
        outcome=OutcomeSpec(
            name="high_risk",
            column="decile_score",
            threshold=ThresholdSpec(mode=MODE_ABSOLUTE, value=COMPAS_THRESHOLDS[regime]),
        ),
        filters=(
            RowFilter(column="race", keep=("African-American", "Caucasian")),
            RowFilter(column="days_b_screening_arrest", min=-30.0, max=30.0),
        ),
        privileged_index=1,
        name="compas",
        regime=regime,
        sensitive_order=("race", "sex", "age"),
    )


def adult_config(csv_path: str, regime: str = "Q3") -> IngestConfig:
    """Default mapping for an Adult-style census CSV with numeric income.

    Gender is the protected attribute, the sensitive set is {gender, age,
    race, marital-status, native-country}, and age / hours-per-week are cut
    into three equal-population buckets.
    """
    if regime not in ADULT_THRESHOLDS:
        raise ConfigError(f"unknown regime {regime!r}")
    return IngestConfig(
        path=csv_path,
        attributes=(
            ColumnSpec("gender", "sex", "protected", categories=("Female", "Male")),
            ColumnSpec("age", "age", "sensitive", binning=BinningSpec(quantile_bins=3)),
            ColumnSpec("race", "race", "sensitive", categories=_ADULT_RACES),
            ColumnSpec("marital-status", "marital-status", "sensitive", categories=_ADULT_MARITAL),
            ColumnSpec("native-country", "native-country", "sensitive", categories=_ADULT_COUNTRIES),
            ColumnSpec("education", "education", "non_sensitive", categories=_ADULT_EDUCATION),
            ColumnSpec("hours-per-week", "hours-per-week", "non_sensitive", binning=BinningSpec(quantile_bins=3)),
        ),
        outcome=OutcomeSpec(
            name="income",
            column="income",
            threshold=ThresholdSpec(mode=MODE_ABSOLUTE, value=ADULT_THRESHOLDS[regime]),
        ),
        privileged_index=1,
        name="adult",
        regime=regime,
        sensitive_order=("gender", "age", "race", "marital-status", "native-country"),
    )
