"""Acceptance gate: one test per criterion, one pass/fail line per criterion.

Criteria 5-7 share a single sweep of the synthetic preset (n=20000, 5 runs,
10 folds, full epsilon grid) cached per session.  Mean disparities there are
estimated from 50 fold cells whose per-cell spread is dominated by mechanism
randomness, so the margins printed alongside each verdict matter: several
tolerances are of the same order as the protocol's standard error.  The
sweep runs at the committed default seed and is reproducible byte-for-byte.

Criterion 9 needs the real benchmark CSVs, which do not ship with the
package; point LDPFAIR_COMPAS_CSV / LDPFAIR_ADULT_CSV at them to enable it.
"""

import math
import os
import time

import numpy as np
import pytest

from ldpfair.cli import main as cli_main
from ldpfair.data import AttributeSpec, Schema
from ldpfair.forest import ForestParams
from ldpfair.harness import (
    DEFAULT_EPSILONS,
    ExperimentConfig,
    aggregate,
    run_experiment,
)
from ldpfair.ingest import compas_config, adult_config, load
from ldpfair.mechanisms import (
    MechanismConfig,
    krr_params,
    krr_randomize_column,
    max_probability_ratio,
    split_budget,
    transition_matrix,
)
from ldpfair.metrics import disparity, group_rates

from _oracle import oracle_disparities, oracle_rates

ACCEPTANCE_SEED = 11


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def schema_for(domains):
    attrs = [
        AttributeSpec(f"s{i}", tuple(str(v) for v in range(k)), "protected" if i == 0 else "sensitive")
        for i, k in enumerate(domains)
    ]
    attrs.append(AttributeSpec("y", ("0", "1"), "outcome"))
    return Schema(attributes=tuple(attrs))


def test_criterion_1_ldp_bound_exact():
    start = time.perf_counter()
    worst = 0.0
    for setting in ("sLDP", "combLDP", "indLDP"):
        for eps in (0.1, 1.0, 5.0, 16.0):
            for domains in ((2,), (2, 3), (2, 3, 5)):
                matrix = transition_matrix(MechanismConfig(setting, eps), schema_for(domains))
                ratio = max_probability_ratio(matrix)
                rel = abs(ratio - math.exp(eps)) / math.exp(eps)
                worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    report(
        "criterion 1 (LDP bound exact)",
        worst <= 1e-9 and elapsed < 1.0,
        f"max relative deviation {worst:.2e} (tol 1e-9), runtime {elapsed:.3f}s (< 1s)",
    )


def test_criterion_2_mechanism_calibration():
    start = time.perf_counter()
    n = 1_000_000
    worst = 0.0
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    for k in (2, 4, 16):
        for eps in (0.1, 1.0, 5.0):
            params = krr_params(k, eps)
            out = krr_randomize_column(np.zeros(n, dtype=np.int64), params, rng)
            kept = np.count_nonzero(out == 0) / n
            sigma = math.sqrt(params.p * (1 - params.p) / n)
            worst = max(worst, abs(kept - params.p) / sigma)
    elapsed = time.perf_counter() - start
    report(
        "criterion 2 (mechanism calibration)",
        worst <= 4.0 and elapsed < 10.0,
        f"max |keep-rate - p| = {worst:.2f} sigma (tol 4), runtime {elapsed:.2f}s (< 10s)",
    )


def test_criterion_3_budget_split_identity():
    split = split_budget((2, 3, 5), 1.0, "k_based")
    exact = max(abs(a - b) for a, b in zip(split.epsilons, (0.2, 0.3, 0.5)))
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    worst_sum = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 8))
        sizes = [int(v) for v in rng.integers(2, 12, size=d)]
        eps = float(rng.uniform(0.01, 16.0))
        for policy in ("k_based", "uniform"):
            total = split_budget(sizes, eps, policy).total
            worst_sum = max(worst_sum, abs(total - eps))
    report(
        "criterion 3 (budget split identity)",
        exact <= 1e-12 and worst_sum <= 1e-12,
        f"(2,3,5) deviation {exact:.2e}, worst budget-sum deviation {worst_sum:.2e} (tol 1e-12)",
    )


def test_criterion_4_metric_oracle():
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        y_true = rng.integers(0, 2, n)
        y_pred = rng.integers(0, 2, n)
        groups = rng.integers(0, 2, n)
        rates = group_rates(y_true, y_pred, groups)
        for g in (0, 1):
            expected = oracle_rates(y_true[groups == g], y_pred[groups == g])
            for name in ("selection_rate", "tpr", "fpr", "accuracy", "ppv"):
                assert getattr(rates[g], name) == expected[name]
        if rates[0].n and rates[1].n:
            assert disparity(rates[1], rates[0]).as_dict() == oracle_disparities(y_true, y_pred, groups)
            checked += 1
    report(
        "criterion 4 (metric oracle)",
        checked > 900,
        f"exact match on 1000 random datasets ({checked} with both groups present)",
    )


@pytest.fixture(scope="session")
def synth_sweep():
    config = ExperimentConfig(
        dataset="synthetic1",
        regime="Q2",
        n=20_000,
        settings=("noLDP", "sLDP", "combLDP", "indLDP"),
        epsilons=DEFAULT_EPSILONS,
        runs=5,
        folds=10,
        seed=ACCEPTANCE_SEED,
        forest=ForestParams(),
    )
    summary = aggregate(run_experiment(config))
    means = {}
    for row in summary:
        if row.measure == "SD" and row.group == "overall":
            means[(row.setting, row.epsilon)] = (row.mean, row.sd, row.n_included)
    return means


def test_criterion_5_obs1_strong_privacy_wipes_disparity(synth_sweep):
    base, base_sd, n = synth_sweep[("noLDP", 16.0)]
    comb, comb_sd, _ = synth_sweep[("combLDP", 0.1)]
    se = comb_sd / math.sqrt(n)
    ok = abs(base) >= 0.1 and abs(comb) <= 0.05 and abs(comb) <= 0.25 * abs(base)
    report(
        "criterion 5 (Obs1: |SD| collapse at eps=0.1)",
        ok,
        f"baseline |SD|={abs(base):.3f} (>=0.1), combLDP@0.1 |SD|={abs(comb):.4f} "
        f"(tol 0.05 and {0.25 * abs(base):.3f}; se~{se:.3f})",
    )


def test_criterion_6_obs2_multidimensional_beats_single(synth_sweep):
    sldp, _, _ = synth_sweep[("sLDP", 2.0)]
    comb, _, _ = synth_sweep[("combLDP", 2.0)]
    ok = abs(comb) <= abs(sldp) - 0.02
    report(
        "criterion 6 (Obs2: combLDP below sLDP at eps=2)",
        ok,
        f"|SD| combLDP@2={abs(comb):.3f} vs sLDP@2-0.02={abs(sldp) - 0.02:.3f}",
    )


def test_criterion_7_obs5_variants_converge(synth_sweep):
    ind, ind_sd, n = synth_sweep[("indLDP", 0.1)]
    comb, comb_sd, _ = synth_sweep[("combLDP", 0.1)]
    gap = abs(ind - comb)
    se = math.sqrt(ind_sd**2 + comb_sd**2) / math.sqrt(n)
    report(
        "criterion 7 (Obs5: indLDP ~ combLDP at eps=0.1)",
        gap <= 0.03,
        f"|SD(ind) - SD(comb)|={gap:.4f} (tol 0.03; se~{se:.3f})",
    )


def test_obs1_monotone_trend_along_grid(synth_sweep):
    curve = [abs(synth_sweep[("combLDP", eps)][0]) for eps in DEFAULT_EPSILONS]
    ok = all(curve[i + 1] <= curve[i] + 0.02 for i in range(len(curve) - 1))
    report(
        "Obs1 invariant (combLDP |SD| non-increasing along the grid, slack 0.02)",
        ok,
        "curve " + " -> ".join(f"{v:.3f}" for v in curve),
    )


def test_criterion_8_report_determinism(tmp_path):
    args = [
        "run", "--dataset", "synthetic1", "--regime", "Q2", "--n", "400",
        "--settings", "noLDP,combLDP", "--epsilons", "1.0", "--runs", "1",
        "--folds", "3", "--seed", str(ACCEPTANCE_SEED), "--trees", "15",
    ]
    assert cli_main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "summary.csv").read_bytes()
    second = (tmp_path / "b" / "summary.csv").read_bytes()
    report(
        "criterion 8 (byte-identical reports)",
        first == second,
        f"{len(first)} bytes, digests equal: {first == second}",
    )


def _directional_check(name, config):
    dataset, _report = load(config)
    experiment = ExperimentConfig(
        dataset=name, regime=config.regime, settings=("noLDP", "combLDP"),
        epsilons=(0.1,), runs=5, folds=10, seed=ACCEPTANCE_SEED, forest=ForestParams(),
    )
    summary = aggregate(
        run_experiment(experiment, dataset=dataset, dataset_name=name, regime=config.regime)
    )
    values = {
        (row.setting): row.mean
        for row in summary
        if row.measure == "SD" and row.group == "overall" and row.epsilon == 0.1
    }
    base = abs(values["noLDP"])
    obf = abs(values["combLDP"])
    if base < 0.05:
        pytest.skip(f"{name}: baseline |SD|={base:.3f} < 0.05, directional property not applicable")
    report(
        f"criterion 9 ({name} directional Obs1)",
        obf < base,
        f"|SD| combLDP@0.1={obf:.3f} < baseline {base:.3f}",
    )


def test_criterion_9_user_supplied_benchmarks():
    # Absolute benchmark numbers are not reproduction targets: the published
    # preprocessing is underspecified.  With user-supplied data the suite
    # asserts the direction of the Obs1 trend instead.
    compas_path = os.environ.get("LDPFAIR_COMPAS_CSV")
    adult_path = os.environ.get("LDPFAIR_ADULT_CSV")
    if not compas_path and not adult_path:
        print("[SKIP] criterion 9 (benchmark Obs1 direction): no user-supplied datasets; "
              "absolute published numbers are out of scope by design")
        pytest.skip("set LDPFAIR_COMPAS_CSV / LDPFAIR_ADULT_CSV to run")
    if compas_path:
        _directional_check("compas", compas_config(compas_path, regime="Q2"))
    if adult_path:
        _directional_check("adult", adult_config(adult_path, regime="Q3"))
