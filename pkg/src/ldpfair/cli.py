"""Command-line entry point.

Subcommands:

* ``run``      - execute a sweep and write the summary report.
* ``validate`` - check a schema or ingest config (and its data) for violations.
* ``matrix``   - print or save the analytic transition matrix of a mechanism.

Exit codes: 0 success, 2 config error, 3 data error, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np
import yaml

from . import harness, ingest, mechanisms
from .data import (
    ROLE_OUTCOME,
    ROLE_PROTECTED,
    ROLE_SENSITIVE,
    AttributeSpec,
    Schema,
    schema_from_dict,
    validate,
    validate_schema,
)
from .errors import ConfigError, IngestError, LdpFairError, ParameterError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


def _parse_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldpfair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a privacy/fairness sweep")
    run.add_argument("--config", help="experiment config YAML")
    run.add_argument("--dataset", help="preset name (synthetic1, synthetic2) or ingest config path")
    run.add_argument("--regime", choices=("Q1", "Q2", "Q3"), help="outcome regime for synthetic presets")
    run.add_argument("--settings", help="comma-separated subset of noLDP,sLDP,combLDP,indLDP")
    run.add_argument("--epsilons", help="comma-separated privacy budgets")
    run.add_argument("--runs", type=int, help="number of repetitions")
    run.add_argument("--folds", type=int, help="cross-validation folds")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--split-policy", choices=("uniform", "k-based"), help="budget split for indLDP")
    run.add_argument("--n", type=int, help="record count for synthetic presets")
    run.add_argument("--trees", type=int, help="trees per forest")
    run.add_argument("--out", help="output directory")
    run.add_argument("--format", choices=("csv", "json"), help="report format")

    val = sub.add_parser("validate", help="validate a schema or ingest config document")
    val.add_argument("--config", required=True, help="YAML document to check")

    mat = sub.add_parser("matrix", help="dump the transition matrix of a mechanism")
    mat.add_argument("--setting", required=True, choices=[s for s in mechanisms.SETTINGS])
    mat.add_argument("--epsilon", type=float, help="privacy budget (required unless noLDP)")
    mat.add_argument("--domains", required=True, help="comma-separated sensitive domain sizes, protected first")
    mat.add_argument("--split-policy", choices=("uniform", "k-based"), default="k-based")
    mat.add_argument("--cap", type=int, default=mechanisms.DEFAULT_MATRIX_CAP)
    mat.add_argument("--out", help="write CSV here instead of stdout")
    return parser


def _config_for_run(args: argparse.Namespace) -> harness.ExperimentConfig:
    if args.config:
        config = harness.load_experiment_config(args.config)
    else:
        config = harness.ExperimentConfig()
    overrides = {}
    if args.dataset is not None:
        overrides["dataset"] = args.dataset
    if args.regime is not None:
        overrides["regime"] = args.regime
    if args.settings is not None:
        overrides["settings"] = tuple(_parse_list(args.settings))
    if args.epsilons is not None:
        try:
            overrides["epsilons"] = tuple(float(e) for e in _parse_list(args.epsilons))
        except ValueError as exc:
            raise ConfigError(f"bad epsilon list {args.epsilons!r}") from exc
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.folds is not None:
        overrides["folds"] = args.folds
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.split_policy is not None:
        overrides["split_policy"] = args.split_policy.replace("-", "_")
    if args.n is not None:
        overrides["n"] = args.n
    if args.trees is not None:
        overrides["forest"] = replace(config.forest, n_trees=args.trees)
    if args.out is not None:
        overrides["out"] = args.out
    if args.format is not None:
        overrides["format"] = args.format
    return replace(config, **overrides) if overrides else config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_for_run(args)
    rows = harness.run_experiment(config)
    summary = harness.aggregate(rows)
    path = harness.emit_report(summary, config.out, config.format)
    print(f"{len(rows)} result rows, {len(summary)} summary rows -> {path}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{args.config!r} is not a mapping document")
    if "csv" in doc:
        import os

        config = ingest.config_from_dict(doc, base_path=os.path.dirname(os.path.abspath(args.config)))
        dataset, report = ingest.load(config)
        print(report.to_text())
        violations = validate(dataset)
    elif "attributes" in doc:
        violations = validate_schema(schema_from_dict(doc))
    else:
        raise ConfigError("document is neither an ingest config ('csv') nor a schema ('attributes')")
    if violations:
        for v in violations:
            print(str(v))
        print(f"{len(violations)} violation(s)")
        return EXIT_DATA
    print("ok")
    return EXIT_OK


def _matrix_schema(domains: list[int]) -> Schema:
    attributes = [
        AttributeSpec(f"s{i}", tuple(str(v) for v in range(k)), ROLE_PROTECTED if i == 0 else ROLE_SENSITIVE)
        for i, k in enumerate(domains)
    ]
    attributes.append(AttributeSpec("y", ("0", "1"), ROLE_OUTCOME))
    return Schema(attributes=tuple(attributes))


def _cmd_matrix(args: argparse.Namespace) -> int:
    try:
        domains = [int(v) for v in _parse_list(args.domains)]
    except ValueError as exc:
        raise ConfigError(f"bad domain list {args.domains!r}") from exc
    if not domains:
        raise ConfigError("need at least one domain size")
    config = mechanisms.MechanismConfig(
        setting=args.setting,
        epsilon=args.epsilon,
        split_policy=args.split_policy.replace("-", "_"),
    )
    matrix = mechanisms.transition_matrix(config, _matrix_schema(domains), cap=args.cap)
    if args.out:
        mechanisms.matrix_to_csv(matrix, args.out)
        print(f"{matrix.shape[0]}x{matrix.shape[1]} matrix -> {args.out}")
    else:
        np.savetxt(sys.stdout, matrix, delimiter=",", fmt="%.17g")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_matrix(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IngestError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ParameterError, LdpFairError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
