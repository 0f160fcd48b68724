"""Schemas, datasets, and the attribute-role partition consumed by every other stage.

Attributes play one of four roles: plain model features (``non_sensitive``),
attributes that get obfuscated before leaving the client (``sensitive``), the
single ``protected`` attribute that defines the privileged/unprivileged split
(always part of the sensitive set), and the single binary ``outcome``.

Datasets store domain indices, not labels: every randomizer works on integers
in ``[0, k)`` and the labels only live in the schema.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import yaml

from .errors import ConfigError, ParameterError

ROLE_NON_SENSITIVE = "non_sensitive"
ROLE_SENSITIVE = "sensitive"
ROLE_PROTECTED = "protected"
ROLE_OUTCOME = "outcome"
ROLES = (ROLE_NON_SENSITIVE, ROLE_SENSITIVE, ROLE_PROTECTED, ROLE_OUTCOME)

# Roles whose attributes are obfuscated by the multi-dimensional mechanisms.
SENSITIVE_ROLES = (ROLE_SENSITIVE, ROLE_PROTECTED)


@dataclass(frozen=True)
class AttributeSpec:
    """One categorical attribute: name, ordered category labels, role."""

    name: str
    domain: tuple[str, ...]
    role: str

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(str(v) for v in self.domain))

    @property
    def k(self) -> int:
        return len(self.domain)

    def index_of(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise ParameterError(f"label {label!r} not in domain of {self.name!r}") from None


@dataclass(frozen=True)
class Schema:
    """Ordered attribute list plus the fixed ordering of the sensitive set.

    ``sensitive_order`` is the tuple of attribute names (sensitive and
    protected roles) in the order used by joint encoding and budget
    splitting; it defaults to declaration order and must stay stable over a
    whole experiment.  ``privileged_index`` names which index of the
    protected attribute counts as the privileged group (some benchmark
    datasets invert the usual convention, so it is explicit metadata).
    """

    attributes: tuple[AttributeSpec, ...]
    sensitive_order: tuple[str, ...] = ()
    privileged_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.sensitive_order:
            order = tuple(a.name for a in self.attributes if a.role in SENSITIVE_ROLES)
            object.__setattr__(self, "sensitive_order", order)
        else:
            object.__setattr__(self, "sensitive_order", tuple(self.sensitive_order))

    def attribute(self, name: str) -> AttributeSpec:
        for a in self.attributes:
            if a.name == name:
                return a
        raise ParameterError(f"schema has no attribute {name!r}")

    @property
    def protected(self) -> AttributeSpec:
        matches = [a for a in self.attributes if a.role == ROLE_PROTECTED]
        if len(matches) != 1:
            raise ParameterError(f"schema must have exactly one protected attribute, found {len(matches)}")
        return matches[0]

    @property
    def outcome(self) -> AttributeSpec:
        matches = [a for a in self.attributes if a.role == ROLE_OUTCOME]
        if len(matches) != 1:
            raise ParameterError(f"schema must have exactly one outcome attribute, found {len(matches)}")
        return matches[0]

    @property
    def sensitive_attributes(self) -> tuple[AttributeSpec, ...]:
        return tuple(self.attribute(n) for n in self.sensitive_order)

    @property
    def sensitive_domain_sizes(self) -> tuple[int, ...]:
        return tuple(a.k for a in self.sensitive_attributes)

    @property
    def feature_names(self) -> tuple[str, ...]:
        """Names of the attributes a model trains on (everything but the outcome)."""
        return tuple(a.name for a in self.attributes if a.role != ROLE_OUTCOME)


@dataclass(frozen=True)
class Violation:
    """One broken invariant: the rule, where it happened, and a readable message."""

    rule: str
    attribute: str | None
    row: int | None
    message: str

    def __str__(self) -> str:
        where = []
        if self.attribute is not None:
            where.append(f"attribute={self.attribute}")
        if self.row is not None:
            where.append(f"row={self.row}")
        loc = f" ({', '.join(where)})" if where else ""
        return f"{self.rule}{loc}: {self.message}"


class Dataset:
    """Columnar table of domain indices conforming to a Schema.

    Immutable after construction; columns are stored as read-only int64
    arrays so concurrent read access is safe.
    """

    def __init__(self, schema: Schema, columns: dict[str, np.ndarray]):
        self.schema = schema
        stored: dict[str, np.ndarray] = {}
        for name, col in columns.items():
            arr = np.asarray(col)
            if arr.dtype.kind in "iub":
                arr = arr.astype(np.int64, copy=True)
            else:
                arr = np.array(arr, copy=True)
            arr.setflags(write=False)
            stored[name] = arr
        self.columns = stored
        self.n = len(next(iter(stored.values()))) if stored else 0

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise ParameterError(f"dataset has no column {name!r}") from None

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(self.schema, {n: c[mask] for n, c in self.columns.items()})

    def with_columns(self, replacements: dict[str, np.ndarray]) -> "Dataset":
        cols = dict(self.columns)
        cols.update(replacements)
        return Dataset(self.schema, cols)

    def labels(self, name: str) -> list[str]:
        """Decode one column back to its category labels."""
        spec = self.schema.attribute(name)
        return [spec.domain[int(i)] for i in self.column(name)]

    @classmethod
    def from_label_rows(cls, schema: Schema, rows: Iterable[Sequence[str]]) -> "Dataset":
        """Build a dataset from label tuples ordered like ``schema.attributes``."""
        names = [a.name for a in schema.attributes]
        cols: dict[str, list[int]] = {n: [] for n in names}
        for row in rows:
            if len(row) != len(names):
                raise ParameterError(f"row has {len(row)} values, schema has {len(names)} attributes")
            for spec, value in zip(schema.attributes, row):
                cols[spec.name].append(spec.index_of(str(value)))
        return cls(schema, {n: np.array(v, dtype=np.int64) for n, v in cols.items()})


def validate_schema(schema: Schema) -> list[Violation]:
    """Check schema invariants, returning a report instead of raising."""
    report: list[Violation] = []
    seen: set[str] = set()
    for a in schema.attributes:
        if a.name in seen:
            report.append(Violation("duplicate_attribute", a.name, None, "attribute name repeats"))
        seen.add(a.name)
        if a.role not in ROLES:
            report.append(Violation("unknown_role", a.name, None, f"role {a.role!r} not in {ROLES}"))
        if len(set(a.domain)) != len(a.domain):
            report.append(Violation("duplicate_label", a.name, None, "domain labels repeat"))
        if a.role in SENSITIVE_ROLES and a.k < 2:
            report.append(Violation("domain_too_small", a.name, None, f"k={a.k} but sensitive attributes need k >= 2"))
    n_protected = sum(1 for a in schema.attributes if a.role == ROLE_PROTECTED)
    if n_protected != 1:
        report.append(
            Violation("role_cardinality", None, None, f"expected exactly one protected attribute, found {n_protected}")
        )
    n_outcome = sum(1 for a in schema.attributes if a.role == ROLE_OUTCOME)
    if n_outcome != 1:
        report.append(
            Violation("role_cardinality", None, None, f"expected exactly one outcome attribute, found {n_outcome}")
        )
    else:
        outcome = next(a for a in schema.attributes if a.role == ROLE_OUTCOME)
        if outcome.domain != ("0", "1"):
            report.append(
                Violation("outcome_not_binary", outcome.name, None, f"outcome domain must be ('0', '1'), got {outcome.domain}")
            )
    expected = sorted(a.name for a in schema.attributes if a.role in SENSITIVE_ROLES)
    if sorted(schema.sensitive_order) != expected:
        report.append(
            Violation(
                "sensitive_order_mismatch",
                None,
                None,
                f"sensitive_order {schema.sensitive_order} is not a permutation of {tuple(expected)}",
            )
        )
    if schema.privileged_index not in (0, 1):
        report.append(
            Violation("privileged_index", None, None, f"privileged_index must be 0 or 1, got {schema.privileged_index}")
        )
    return report


def validate(dataset: Dataset) -> list[Violation]:
    """Total validation of a dataset: never raises, reports every broken rule."""
    report = validate_schema(dataset.schema)
    lengths = {name: len(col) for name, col in dataset.columns.items()}
    n = dataset.n
    for a in dataset.schema.attributes:
        col = dataset.columns.get(a.name)
        if col is None:
            report.append(Violation("column_missing", a.name, None, "schema attribute has no column"))
            continue
        if len(col) != n:
            report.append(
                Violation("length_mismatch", a.name, None, f"column has {len(col)} rows, expected {n}")
            )
        if col.dtype.kind not in "iu":
            report.append(Violation("non_integer_column", a.name, None, f"dtype {col.dtype} is not integral"))
            continue
        bad = np.nonzero((col < 0) | (col >= a.k))[0]
        for row in bad:
            report.append(
                Violation("out_of_domain", a.name, int(row), f"index {int(col[row])} outside [0, {a.k})")
            )
    known = {a.name for a in dataset.schema.attributes}
    for name in dataset.columns:
        if name not in known:
            report.append(Violation("unexpected_column", name, None, "column has no schema attribute"))
    return report


def project_groups(dataset: Dataset) -> np.ndarray:
    """Per-record group label: 1 = privileged, 0 = unprivileged.

    Requires a binary protected attribute; intersectional group
    definitions are out of scope.
    """
    protected = dataset.schema.protected
    if protected.k != 2:
        raise ParameterError(
            f"protected attribute {protected.name!r} must be binary, has k={protected.k}"
        )
    col = dataset.column(protected.name)
    return (col == dataset.schema.privileged_index).astype(np.int64)


def schema_to_dict(schema: Schema) -> dict:
    return {
        "attributes": [
            {"name": a.name, "domain": list(a.domain), "role": a.role} for a in schema.attributes
        ],
        "sensitive_order": list(schema.sensitive_order),
        "privileged_index": schema.privileged_index,
    }


def schema_from_dict(doc: dict) -> Schema:
    if not isinstance(doc, dict) or "attributes" not in doc:
        raise ConfigError("schema document must be a mapping with an 'attributes' list")
    attrs = []
    for entry in doc["attributes"]:
        try:
            attrs.append(
                AttributeSpec(
                    name=str(entry["name"]),
                    domain=tuple(str(v) for v in entry["domain"]),
                    role=str(entry.get("role", ROLE_NON_SENSITIVE)),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed attribute entry {entry!r}") from exc
    return Schema(
        attributes=tuple(attrs),
        sensitive_order=tuple(doc.get("sensitive_order", ())),
        privileged_index=int(doc.get("privileged_index", 1)),
    )


def load_schema(path: str) -> Schema:
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_dict(yaml.safe_load(fh))


def dump_schema(schema: Schema, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(schema_to_dict(schema), fh, sort_keys=False)
