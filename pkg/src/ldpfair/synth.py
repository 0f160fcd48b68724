"""Synthetic dataset with a known causal structure.

The generator samples a chain ``C -> A -> M`` of categorical variables and a
continuous score ``Y = alpha*A + beta*M + gamma*C + noise`` that depends on
all three, so the protected attribute A influences the outcome both directly
and through the mediator M.  Binarizing the score at different quantiles
yields outcome distributions skewed to 1 (Q1), balanced (Q2), or skewed to 0
(Q3).

Two presets are exposed: ``synthetic1`` favours the group ``A = 1`` and
``synthetic2`` flips the direct effect so ``A = 0`` collects the majority of
positive outcomes (and is marked privileged accordingly).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import (
    ROLE_OUTCOME,
    ROLE_PROTECTED,
    ROLE_SENSITIVE,
    AttributeSpec,
    Dataset,
    Schema,
)
from .errors import ParameterError

PROB_TOL = 1e-12

MODE_ABSOLUTE = "absolute"
MODE_QUANTILE = "quantile"

# Outcome regimes: quantile level of the binarization threshold.  A low
# threshold leaves most scores above it, so Q1 skews the outcome to 1.
REGIME_LEVELS = {"Q1": 0.25, "Q2": 0.5, "Q3": 0.75}


@dataclass(frozen=True)
class ThresholdSpec:
    """How to binarize a score column: fixed cut or empirical quantile."""

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in (MODE_ABSOLUTE, MODE_QUANTILE):
            raise ParameterError(f"unknown threshold mode {self.mode!r}")
        if self.mode == MODE_QUANTILE and not 0.0 < self.value < 1.0:
            raise ParameterError(f"quantile level must be strictly inside (0, 1), got {self.value}")


@dataclass(frozen=True)
class SynthParams:
    """Distribution parameters of the generator.

    ``p_a_given_c`` holds P(A=1 | C=0) and P(A=1 | C=1); ``p_m_given_a``
    holds the two multinomial triples for M given A.  The noise term is a
    standard normal with fixed unit scale.

    The default coefficients keep a 2:1:1 ratio (direct effect twice the
    mediated and confounded ones) at a scale calibrated against the unit
    noise: the baseline classifier shows a selection-rate gap well above 0.1
    at the balanced threshold, while heavy obfuscation of the training
    features still washes that gap out.  Much larger coefficients leave the
    decision boundary recoverable from almost pure noise, so the gap never
    closes.
    """

    p_c: float = 0.35
    p_a_given_c: tuple[float, float] = (0.55, 0.75)
    p_m_given_a: tuple[tuple[float, float, float], tuple[float, float, float]] = (
        (0.35, 0.4, 0.25),
        (0.5, 0.4, 0.1),
    )
    alpha: float = 0.2
    beta: float = 0.1
    gamma: float = 0.1

    def __post_init__(self):
        for p in (self.p_c, *self.p_a_given_c):
            if not 0.0 <= p <= 1.0:
                raise ParameterError(f"Bernoulli parameter {p} outside [0, 1]")
        for triple in self.p_m_given_a:
            if len(triple) != 3 or any(p < 0 for p in triple):
                raise ParameterError(f"multinomial triple {triple} malformed")
            if abs(sum(triple) - 1.0) > PROB_TOL:
                raise ParameterError(f"multinomial triple {triple} does not sum to 1")


@dataclass(frozen=True)
class ScoredDraw:
    """Generated records before binarization: categorical columns plus raw scores."""

    c: np.ndarray
    a: np.ndarray
    m: np.ndarray
    score: np.ndarray
    params: SynthParams

    @property
    def n(self) -> int:
        return len(self.score)


def generate(params: SynthParams, n: int, seed) -> ScoredDraw:
    """Sample ``n`` records; deterministic for a given seed."""
    if n < 0:
        raise ParameterError(f"record count must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    c = (rng.random(n) < params.p_c).astype(np.int64)
    p_a = np.asarray(params.p_a_given_c)[c]
    a = (rng.random(n) < p_a).astype(np.int64)
    cum = np.cumsum(np.asarray(params.p_m_given_a), axis=1)[a]
    u = rng.random(n)
    m = (u >= cum[:, 0]).astype(np.int64) + (u >= cum[:, 1]).astype(np.int64)
    score = params.alpha * a + params.beta * m + params.gamma * c + rng.standard_normal(n)
    return ScoredDraw(c=c, a=a, m=m, score=score, params=params)


def apply_threshold(scores: np.ndarray, spec: ThresholdSpec) -> tuple[np.ndarray, float]:
    """Binary labels (1 iff score strictly above the cut) and the cut used."""
    scores = np.asarray(scores, dtype=float)
    if spec.mode == MODE_QUANTILE:
        if scores.size == 0 or scores.min() == scores.max():
            raise ParameterError("quantile threshold is degenerate: scores are empty or all identical")
        tau = float(np.quantile(scores, spec.value))
    else:
        tau = float(spec.value)
    return (scores > tau).astype(np.int64), tau


def synth_schema(privileged_index: int = 1) -> Schema:
    return Schema(
        attributes=(
            AttributeSpec("A", ("0", "1"), ROLE_PROTECTED),
            AttributeSpec("C", ("0", "1"), ROLE_SENSITIVE),
            AttributeSpec("M", ("0", "1", "2"), ROLE_SENSITIVE),
            AttributeSpec("Y", ("0", "1"), ROLE_OUTCOME),
        ),
        sensitive_order=("A", "C", "M"),
        privileged_index=privileged_index,
    )


def binarize_outcome(draw: ScoredDraw, spec: ThresholdSpec, privileged_index: int = 1) -> Dataset:
    """Turn a scored draw into a dataset with a binary outcome column."""
    y, _ = apply_threshold(draw.score, spec)
    schema = synth_schema(privileged_index)
    return Dataset(schema, {"A": draw.a, "C": draw.c, "M": draw.m, "Y": y})


@dataclass(frozen=True)
class SynthPreset:
    params: SynthParams
    privileged_index: int


PRESETS = {
    "synthetic1": SynthPreset(params=SynthParams(), privileged_index=1),
    # Same causal graph, direct effect negated: A=0 becomes the favoured group.
    "synthetic2": SynthPreset(params=SynthParams(alpha=-0.2), privileged_index=0),
}


def synth_dataset(
    preset: str,
    regime: str,
    n: int,
    seed,
    overrides: dict | None = None,
) -> Dataset:
    """Generate a preset dataset binarized at one of the Q1/Q2/Q3 regimes."""
    if preset not in PRESETS:
        raise ParameterError(f"unknown preset {preset!r}, expected one of {tuple(PRESETS)}")
    if regime not in REGIME_LEVELS:
        raise ParameterError(f"unknown regime {regime!r}, expected one of {tuple(REGIME_LEVELS)}")
    chosen = PRESETS[preset]
    params = replace(chosen.params, **overrides) if overrides else chosen.params
    draw = generate(params, n, seed)
    spec = ThresholdSpec(mode=MODE_QUANTILE, value=REGIME_LEVELS[regime])
    return binarize_outcome(draw, spec, privileged_index=chosen.privileged_index)
