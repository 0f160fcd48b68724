"""Experiment pipeline: folds, obfuscation, training, evaluation, aggregation.

For every run a fresh stratified fold split is drawn; for every fold the
training portion's sensitive columns are obfuscated per setting and budget,
a model is trained on the obfuscated split, and both the baseline and the
obfuscated models are evaluated on the untouched original test fold.  The
test portion is digest-checked to prove it never sees randomization.

All randomness is derived from the master seed by fixed arithmetic on the
cell coordinates, so any subset of (run, fold, setting, epsilon) cells can be
recomputed independently and two invocations with the same config produce
byte-identical reports.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import ingest
from .data import Dataset, project_groups
from .errors import ConfigError, ParameterError
from .forest import ForestParams, ForestTrainer
from .mechanisms import (
    SETTING_NO_LDP,
    SETTINGS,
    SPLIT_POLICIES,
    MechanismConfig,
    randomize_sensitive_columns,
)
from .metrics import RATE_NAMES, confusion_rates, disparity
from .synth import PRESETS, REGIME_LEVELS, synth_dataset

DEFAULT_EPSILONS = (16.0, 8.0, 5.0, 3.0, 2.0, 1.0, 0.5, 0.1)

GROUP_PRIVILEGED = "privileged"
GROUP_UNPRIVILEGED = "unprivileged"
GROUP_OVERALL = "overall"
GROUP_ORDER = (GROUP_PRIVILEGED, GROUP_UNPRIVILEGED, GROUP_OVERALL)

MEASURE_ORDER = ("selection_rate", "tpr", "fpr", "accuracy", "ppv", "SD", "EOD", "PED", "OAD", "PRD")

SUMMARY_COLUMNS = (
    "dataset", "regime", "setting", "epsilon", "group", "measure",
    "mean", "sd", "n_included", "n_excluded",
)

# Purpose tags for seed derivation; a fourth component distinguishes the
# consumers so streams never collide.
_SEED_DATASET = 0
_SEED_FOLDS = 1
_SEED_FOREST = 2
_SEED_MECHANISM = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one sweep needs; see the README for the YAML equivalent."""

    dataset: str = "synthetic1"
    regime: str = "Q2"
    n: int = 20_000
    settings: tuple[str, ...] = SETTINGS
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    split_policy: str = "k_based"
    runs: int = 20
    folds: int = 10
    seed: int = 0
    forest: ForestParams = field(default_factory=ForestParams)
    out: str = "results"
    format: str = "csv"
    synth_overrides: dict | None = None

    def __post_init__(self):
        if not self.settings:
            raise ConfigError("settings list is empty")
        unknown = [s for s in self.settings if s not in SETTINGS]
        if unknown:
            raise ConfigError(f"unknown settings {unknown}, expected subset of {SETTINGS}")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ConfigError(f"epsilon grid must be non-empty and strictly positive, got {self.epsilons}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.split_policy not in SPLIT_POLICIES:
            raise ConfigError(f"unknown split policy {self.split_policy!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.dataset in PRESETS and self.regime not in REGIME_LEVELS:
            raise ConfigError(f"unknown regime {self.regime!r}, expected one of {tuple(REGIME_LEVELS)}")
        object.__setattr__(self, "settings", tuple(dict.fromkeys(self.settings)))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    regime: str
    setting: str
    epsilon: float
    run: int
    fold: int
    group: str
    measure: str
    value: float | None


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    regime: str
    setting: str
    epsilon: float
    group: str
    measure: str
    mean: float | None
    sd: float | None
    n_included: int
    n_excluded: int


def derive_rng(master: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=tuple(key)))


def derive_seed(master: int, *key: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=tuple(key)).generate_state(1)[0])


def stratified_folds(y: np.ndarray, groups: np.ndarray, n_folds: int, rng: np.random.Generator) -> np.ndarray:
    """Assign each record to a fold, stratified on (outcome, group).

    Strata are shuffled and dealt round-robin, with the deal offset carried
    across strata so remainders spread evenly; this minimizes folds with an
    empty protected group without biasing any rate.
    """
    n = len(y)
    fold_of = np.empty(n, dtype=np.int64)
    offset = 0
    for y_val in (0, 1):
        for g_val in (0, 1):
            members = np.nonzero((y == y_val) & (groups == g_val))[0]
            members = rng.permutation(members)
            for i, record in enumerate(members):
                fold_of[record] = (offset + i) % n_folds
            offset += len(members)
    return fold_of


def _digest(columns: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    for name in sorted(columns):
        h.update(name.encode())
        h.update(np.ascontiguousarray(columns[name]).tobytes())
    return h.hexdigest()


def _measure_cells(y_true, y_pred, groups) -> list[tuple[str, str, float | None]]:
    """(group, measure, value) triples for one evaluated fold."""
    rates_priv = confusion_rates(y_true[groups == 1], y_pred[groups == 1])
    rates_unpriv = confusion_rates(y_true[groups == 0], y_pred[groups == 0])
    rates_all = confusion_rates(y_true, y_pred)
    cells: list[tuple[str, str, float | None]] = []
    for name in RATE_NAMES:
        cells.append((GROUP_PRIVILEGED, name, rates_priv.rate(name)))
    for name in RATE_NAMES:
        cells.append((GROUP_UNPRIVILEGED, name, rates_unpriv.rate(name)))
    for name in RATE_NAMES:
        cells.append((GROUP_OVERALL, name, rates_all.rate(name)))
    if rates_priv.n == 0 or rates_unpriv.n == 0:
        gaps = {name: None for name in ("SD", "EOD", "PED", "OAD", "PRD")}
    else:
        gaps = disparity(rates_priv, rates_unpriv).as_dict()
    for name, value in gaps.items():
        cells.append((GROUP_OVERALL, name, value))
    return cells


def build_dataset(config: ExperimentConfig) -> tuple[Dataset, str, str]:
    """Materialize the configured dataset: synthetic preset or ingest config path."""
    if config.dataset in PRESETS:
        seed = np.random.SeedSequence(config.seed, spawn_key=(_SEED_DATASET,))
        dataset = synth_dataset(config.dataset, config.regime, config.n, seed, config.synth_overrides)
        return dataset, config.dataset, config.regime
    ingest_config = ingest.load_config(config.dataset)
    dataset, _report = ingest.load(ingest_config)
    return dataset, ingest_config.name, ingest_config.regime


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None,
                   dataset_name: str | None = None, regime: str | None = None,
                   trainer=None) -> list[ResultRow]:
    """Execute the full sweep and return one row per result cell.

    The baseline setting is trained once per (run, fold) and its rows are
    replicated across the epsilon grid so every setting plots over the same
    axis.  Folds whose test portion misses one protected group yield
    undefined metric values but do not stop the run.  ``trainer`` swaps in a
    different learner; anything with the two-method contract of
    :class:`ldpfair.forest.ForestTrainer` works.
    """
    if trainer is None:
        trainer = ForestTrainer()
    if dataset is None:
        dataset, dataset_name, regime = build_dataset(config)
    else:
        dataset_name = dataset_name or config.dataset
        regime = regime or config.regime
    schema = dataset.schema
    outcome_name = schema.outcome.name
    y_all = dataset.column(outcome_name)
    groups_all = project_groups(dataset)
    ldp_settings = [s for s in config.settings if s != SETTING_NO_LDP]

    rows: list[ResultRow] = []

    def emit(setting: str, epsilon: float, run: int, fold: int, cells) -> None:
        for group, measure, value in cells:
            rows.append(
                ResultRow(
                    dataset=dataset_name, regime=regime, setting=setting, epsilon=epsilon,
                    run=run, fold=fold, group=group, measure=measure, value=value,
                )
            )

    for run in range(config.runs):
        fold_rng = derive_rng(config.seed, _SEED_FOLDS, run)
        fold_of = stratified_folds(y_all, groups_all, config.folds, fold_rng)
        for fold in range(config.folds):
            test_mask = fold_of == fold
            train_ds = dataset.subset(~test_mask)
            test_columns = {name: col[test_mask] for name, col in dataset.columns.items()}
            test_digest = _digest(test_columns)
            y_test = y_all[test_mask]
            groups_test = groups_all[test_mask]
            # The baseline and every obfuscated model share one ForestParams
            # per (run, fold) so they differ only by their training data.
            params = replace(config.forest, seed=derive_seed(config.seed, _SEED_FOREST, run, fold))

            if SETTING_NO_LDP in config.settings:
                model = trainer.train(train_ds, params)
                y_pred = trainer.predict(model, test_columns)
                if _digest(test_columns) != test_digest:
                    raise AssertionError("test fold was modified during baseline evaluation")
                cells = _measure_cells(y_test, y_pred, groups_test)
                for epsilon in config.epsilons:
                    emit(SETTING_NO_LDP, epsilon, run, fold, cells)

            for setting in ldp_settings:
                for eps_index, epsilon in enumerate(config.epsilons):
                    mech_rng = derive_rng(config.seed, _SEED_MECHANISM, run, fold, eps_index)
                    mech = MechanismConfig(setting=setting, epsilon=epsilon, split_policy=config.split_policy)
                    obfuscated = randomize_sensitive_columns(train_ds.columns, mech, schema, mech_rng)
                    model = trainer.train(train_ds.with_columns(obfuscated), params)
                    y_pred = trainer.predict(model, test_columns)
                    if _digest(test_columns) != test_digest:
                        raise AssertionError(f"test fold was modified during {setting} evaluation")
                    emit(setting, epsilon, run, fold, _measure_cells(y_test, y_pred, groups_test))
    return rows


def aggregate(rows: list[ResultRow]) -> list[SummaryRow]:
    """Mean and population standard deviation per summary key.

    Undefined values are excluded from the statistics but counted, so a
    summary cell built only from undefined folds stays undefined instead of
    pretending to be zero.
    """
    if not rows:
        raise ParameterError("no rows to aggregate")
    buckets: dict[tuple, tuple[list[float], list[int]]] = {}
    for row in rows:
        key = (row.dataset, row.regime, row.setting, row.epsilon, row.group, row.measure)
        included, excluded = buckets.setdefault(key, ([], [0]))
        if row.value is None:
            excluded[0] += 1
        else:
            included.append(row.value)

    def sort_key(key: tuple):
        dataset, regime, setting, epsilon, group, measure = key
        return (
            dataset,
            regime,
            SETTINGS.index(setting),
            -epsilon,
            GROUP_ORDER.index(group),
            MEASURE_ORDER.index(measure),
        )

    summary = []
    for key in sorted(buckets, key=sort_key):
        included, excluded = buckets[key]
        dataset, regime, setting, epsilon, group, measure = key
        if included:
            mean = float(np.mean(included))
            sd = float(np.std(included))
        else:
            mean = None
            sd = None
        summary.append(
            SummaryRow(
                dataset=dataset, regime=regime, setting=setting, epsilon=epsilon,
                group=group, measure=measure, mean=mean, sd=sd,
                n_included=len(included), n_excluded=excluded[0],
            )
        )
    return summary


def _format_value(value: float | None) -> str:
    return "" if value is None else repr(value)


def emit_report(summary: list[SummaryRow], out_dir: str, fmt: str = "csv") -> str:
    """Write the summary table to ``out_dir`` as summary.csv or summary.json.

    Output is byte-deterministic for a given summary; floats are written
    with full round-trip precision.
    """
    if fmt not in ("csv", "json"):
        raise ParameterError(f"format must be csv or json, got {fmt!r}")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"summary.{fmt}")
    try:
        if fmt == "csv":
            lines = [",".join(SUMMARY_COLUMNS)]
            for row in summary:
                lines.append(
                    ",".join(
                        (
                            row.dataset, row.regime, row.setting, repr(row.epsilon), row.group,
                            row.measure, _format_value(row.mean), _format_value(row.sd),
                            str(row.n_included), str(row.n_excluded),
                        )
                    )
                )
            payload = "\n".join(lines) + "\n"
        else:
            doc = [
                {
                    "dataset": r.dataset, "regime": r.regime, "setting": r.setting,
                    "epsilon": r.epsilon, "group": r.group, "measure": r.measure,
                    "mean": r.mean, "sd": r.sd,
                    "n_included": r.n_included, "n_excluded": r.n_excluded,
                }
                for r in summary
            ]
            payload = json.dumps(doc, indent=2) + "\n"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    except OSError as exc:
        raise ParameterError(f"cannot write report to {path!r}: {exc}") from exc
    return path


def parse_summary_csv(path: str) -> list[SummaryRow]:
    """Inverse of the CSV emitter; round-trips exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = tuple(lines[0].split(","))
    if header != SUMMARY_COLUMNS:
        raise ParameterError(f"unexpected summary header {header}")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        out.append(
            SummaryRow(
                dataset=parts[0], regime=parts[1], setting=parts[2], epsilon=float(parts[3]),
                group=parts[4], measure=parts[5],
                mean=float(parts[6]) if parts[6] else None,
                sd=float(parts[7]) if parts[7] else None,
                n_included=int(parts[8]), n_excluded=int(parts[9]),
            )
        )
    return out


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("experiment document must be a mapping")
    known = {
        "dataset", "regime", "n", "settings", "epsilons", "split_policy",
        "runs", "folds", "seed", "forest", "out", "format", "synth",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown experiment config keys: {sorted(unknown)}")
    forest_doc = doc.get("forest", {}) or {}
    try:
        forest = ForestParams(
            n_trees=int(forest_doc.get("n_trees", 100)),
            max_depth=forest_doc.get("max_depth"),
            min_samples_split=int(forest_doc.get("min_samples_split", 2)),
            features_per_split=forest_doc.get("features_per_split", "sqrt"),
            bootstrap=bool(forest_doc.get("bootstrap", True)),
        )
    except (TypeError, ValueError, ParameterError) as exc:
        raise ConfigError(f"malformed forest section: {exc}") from exc
    defaults = ExperimentConfig()
    return ExperimentConfig(
        dataset=str(doc.get("dataset", defaults.dataset)),
        regime=str(doc.get("regime", defaults.regime)),
        n=int(doc.get("n", defaults.n)),
        settings=tuple(doc.get("settings", defaults.settings)),
        epsilons=tuple(doc.get("epsilons", defaults.epsilons)),
        split_policy=str(doc.get("split_policy", defaults.split_policy)).replace("-", "_"),
        runs=int(doc.get("runs", defaults.runs)),
        folds=int(doc.get("folds", defaults.folds)),
        seed=int(doc.get("seed", defaults.seed)),
        forest=forest,
        out=str(doc.get("out", defaults.out)),
        format=str(doc.get("format", defaults.format)),
        synth_overrides=doc.get("synth"),
    )


def load_experiment_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    config = config_from_dict(doc or {})
    # Ingest config paths are resolved relative to the experiment document.
    if config.dataset not in PRESETS and not os.path.isabs(config.dataset):
        resolved = os.path.join(os.path.dirname(os.path.abspath(path)), config.dataset)
        config = replace(config, dataset=resolved)
    return config
