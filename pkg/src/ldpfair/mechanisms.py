"""k-ary randomized response and its multi-dimensional compositions.

k-RR keeps a categorical value with probability ``p = e^eps / (e^eps + k - 1)``
and otherwise reports one of the ``k - 1`` other values uniformly, each with
probability ``q = 1 / (e^eps + k - 1)``.  Since ``p / q = e^eps`` the
mechanism satisfies eps-LDP over its domain.

Three obfuscation settings build on it:

* ``sLDP``    - k-RR on the protected attribute only, with the full budget.
* ``indLDP``  - per-attribute k-RR over the whole sensitive set, with the
  budget split among attributes (uniformly or proportional to domain size).
* ``combLDP`` - one k-RR draw over the Cartesian product of all sensitive
  domains, treated as a single attribute of size ``prod(k_i)``.

``noLDP`` is modelled as an explicit identity setting rather than
``eps = inf`` so no ``e^eps`` overflow can occur in the hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Schema
from .errors import ParameterError

SETTING_NO_LDP = "noLDP"
SETTING_S_LDP = "sLDP"
SETTING_COMB_LDP = "combLDP"
SETTING_IND_LDP = "indLDP"
SETTINGS = (SETTING_NO_LDP, SETTING_S_LDP, SETTING_COMB_LDP, SETTING_IND_LDP)

SPLIT_UNIFORM = "uniform"
SPLIT_K_BASED = "k_based"
SPLIT_POLICIES = (SPLIT_UNIFORM, SPLIT_K_BASED)

DEFAULT_MATRIX_CAP = 4096


@dataclass(frozen=True)
class KrrParams:
    """Resolved k-RR probabilities for one (k, eps) pair."""

    k: int
    epsilon: float
    p: float
    q: float


@dataclass(frozen=True)
class BudgetSplit:
    """Per-attribute budgets aligned with the schema's sensitive order."""

    epsilons: tuple[float, ...]

    @property
    def total(self) -> float:
        return float(sum(self.epsilons))


@dataclass(frozen=True)
class MechanismConfig:
    """Which obfuscation setting to run, at which budget, with which split."""

    setting: str
    epsilon: float | None = None
    split_policy: str = SPLIT_K_BASED

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ParameterError(f"unknown setting {self.setting!r}, expected one of {SETTINGS}")
        if self.split_policy not in SPLIT_POLICIES:
            raise ParameterError(f"unknown split policy {self.split_policy!r}, expected one of {SPLIT_POLICIES}")
        if self.setting != SETTING_NO_LDP:
            if self.epsilon is None or not self.epsilon > 0:
                raise ParameterError(f"setting {self.setting} needs a positive epsilon, got {self.epsilon}")


def krr_params(k: int, epsilon: float) -> KrrParams:
    """Compute the keep/flip probabilities of k-RR.

    ``epsilon = inf`` is accepted as a pass-through sentinel (p = 1, q = 0).
    The probabilities are evaluated through ``e^-eps`` so large budgets
    cannot overflow.
    """
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise ParameterError(f"domain size must be an integer >= 2, got {k!r}")
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon!r}")
    if math.isinf(epsilon):
        return KrrParams(k=int(k), epsilon=epsilon, p=1.0, q=0.0)
    t = math.exp(-epsilon)
    denom = 1.0 + (k - 1) * t
    return KrrParams(k=int(k), epsilon=float(epsilon), p=1.0 / denom, q=t / denom)


def krr_randomize(value: int, params: KrrParams, rng: np.random.Generator) -> int:
    """Randomize a single domain index under k-RR.

    A flipped value is drawn rejection-free: a uniform offset in
    ``[1, k - 1]`` added modulo k hits every other index with exactly
    probability q.
    """
    if not 0 <= value < params.k:
        raise ParameterError(f"value {value} outside [0, {params.k})")
    if params.q == 0.0:
        return int(value)
    if rng.random() < params.p:
        return int(value)
    offset = int(rng.integers(1, params.k))
    return (int(value) + offset) % params.k


def krr_randomize_column(values: np.ndarray, params: KrrParams, rng: np.random.Generator) -> np.ndarray:
    """Vectorized k-RR over a whole column of domain indices."""
    values = np.asarray(values)
    if values.size and (values.min() < 0 or values.max() >= params.k):
        raise ParameterError(f"column contains indices outside [0, {params.k})")
    if params.q == 0.0:
        return values.astype(np.int64, copy=True)
    keep = rng.random(values.shape) < params.p
    offsets = rng.integers(1, params.k, size=values.shape)
    return np.where(keep, values, (values + offsets) % params.k).astype(np.int64)


def split_budget(domain_sizes, epsilon: float, policy: str = SPLIT_K_BASED) -> BudgetSplit:
    """Divide a total budget among attributes.

    ``k_based`` allocates ``eps * k_i / sum(k)`` so larger domains receive
    proportionally more budget; ``uniform`` divides evenly.  Either way the
    parts sum back to the total.
    """
    sizes = [int(k) for k in domain_sizes]
    if len(sizes) < 1:
        raise ParameterError("need at least one domain size")
    if any(k < 2 for k in sizes):
        raise ParameterError(f"all domain sizes must be >= 2, got {sizes}")
    if not epsilon > 0 or math.isinf(epsilon):
        raise ParameterError(f"epsilon must be positive and finite, got {epsilon!r}")
    if policy == SPLIT_K_BASED:
        total_k = sum(sizes)
        parts = tuple(epsilon * k / total_k for k in sizes)
    elif policy == SPLIT_UNIFORM:
        parts = tuple(epsilon / len(sizes) for _ in sizes)
    else:
        raise ParameterError(f"unknown split policy {policy!r}")
    return BudgetSplit(epsilons=parts)


def cartesian_encode(values, domain_sizes) -> int:
    """Row-major joint index of a value tuple; inverse of :func:`cartesian_decode`."""
    values = tuple(int(v) for v in values)
    sizes = tuple(int(k) for k in domain_sizes)
    if len(values) != len(sizes):
        raise ParameterError(f"{len(values)} values for {len(sizes)} domains")
    joint = 0
    for v, k in zip(values, sizes):
        if not 0 <= v < k:
            raise ParameterError(f"component {v} outside [0, {k})")
        joint = joint * k + v
    return joint


def cartesian_decode(joint: int, domain_sizes) -> tuple[int, ...]:
    """Value tuple for a row-major joint index."""
    sizes = tuple(int(k) for k in domain_sizes)
    total = math.prod(sizes)
    joint = int(joint)
    if not 0 <= joint < total:
        raise ParameterError(f"joint index {joint} outside [0, {total})")
    out = []
    for k in reversed(sizes):
        out.append(joint % k)
        joint //= k
    return tuple(reversed(out))


def cartesian_encode_columns(columns, domain_sizes) -> np.ndarray:
    sizes = tuple(int(k) for k in domain_sizes)
    if len(columns) != len(sizes):
        raise ParameterError(f"{len(columns)} columns for {len(sizes)} domains")
    joint = np.zeros(len(columns[0]) if columns else 0, dtype=np.int64)
    for col, k in zip(columns, sizes):
        col = np.asarray(col)
        if col.size and (col.min() < 0 or col.max() >= k):
            raise ParameterError(f"column contains indices outside [0, {k})")
        joint = joint * k + col
    return joint


def cartesian_decode_columns(joint: np.ndarray, domain_sizes) -> list[np.ndarray]:
    sizes = tuple(int(k) for k in domain_sizes)
    total = math.prod(sizes)
    joint = np.asarray(joint)
    if joint.size and (joint.min() < 0 or joint.max() >= total):
        raise ParameterError(f"joint index outside [0, {total})")
    rest = joint.astype(np.int64, copy=True)
    out: list[np.ndarray] = []
    for k in reversed(sizes):
        out.append(rest % k)
        rest //= k
    out.reverse()
    return out


def randomize_record(values, config: MechanismConfig, schema: Schema, rng: np.random.Generator):
    """Obfuscate one record's sensitive tuple (aligned with ``sensitive_order``)."""
    sizes = schema.sensitive_domain_sizes
    values = tuple(int(v) for v in values)
    if len(values) != len(sizes):
        raise ParameterError(f"expected {len(sizes)} sensitive values, got {len(values)}")
    if config.setting == SETTING_NO_LDP:
        return values
    if config.setting == SETTING_S_LDP:
        pos = schema.sensitive_order.index(schema.protected.name)
        params = krr_params(sizes[pos], config.epsilon)
        out = list(values)
        out[pos] = krr_randomize(values[pos], params, rng)
        return tuple(out)
    if config.setting == SETTING_IND_LDP:
        split = split_budget(sizes, config.epsilon, config.split_policy)
        return tuple(
            krr_randomize(v, krr_params(k, eps_i), rng)
            for v, k, eps_i in zip(values, sizes, split.epsilons)
        )
    joint = cartesian_encode(values, sizes)
    params = krr_params(math.prod(sizes), config.epsilon)
    return cartesian_decode(krr_randomize(joint, params, rng), sizes)


def randomize_sensitive_columns(
    columns: dict[str, np.ndarray],
    config: MechanismConfig,
    schema: Schema,
    rng: np.random.Generator,
) -> dict[str, np.ndarray]:
    """Obfuscate the sensitive columns of a columnar table.

    Returns a new column dict; the input arrays are never mutated.  Only the
    columns named in ``schema.sensitive_order`` are replaced.
    """
    out = dict(columns)
    sizes = schema.sensitive_domain_sizes
    names = schema.sensitive_order
    if config.setting == SETTING_NO_LDP:
        return out
    if config.setting == SETTING_S_LDP:
        name = schema.protected.name
        params = krr_params(schema.protected.k, config.epsilon)
        out[name] = krr_randomize_column(columns[name], params, rng)
        return out
    if config.setting == SETTING_IND_LDP:
        split = split_budget(sizes, config.epsilon, config.split_policy)
        for name, k, eps_i in zip(names, sizes, split.epsilons):
            out[name] = krr_randomize_column(columns[name], krr_params(k, eps_i), rng)
        return out
    joint = cartesian_encode_columns([columns[n] for n in names], sizes)
    params = krr_params(math.prod(sizes), config.epsilon)
    decoded = cartesian_decode_columns(krr_randomize_column(joint, params, rng), sizes)
    for name, col in zip(names, decoded):
        out[name] = col
    return out


def _krr_matrix(k: int, epsilon: float) -> np.ndarray:
    params = krr_params(k, epsilon)
    matrix = np.full((k, k), params.q)
    np.fill_diagonal(matrix, params.p)
    return matrix


def transition_matrix(config: MechanismConfig, schema: Schema, cap: int = DEFAULT_MATRIX_CAP) -> np.ndarray:
    """Analytic transition matrix of a configured mechanism.

    Rows index true values, columns reported values, over the domain the
    randomizer acts on: the joint sensitive domain for ``combLDP``,
    ``indLDP`` and ``noLDP``, and the protected attribute's own domain for
    ``sLDP`` (which leaves the other sensitive attributes untouched, so it
    only carries a privacy guarantee there).
    """
    sizes = schema.sensitive_domain_sizes
    if config.setting == SETTING_S_LDP:
        k = schema.protected.k
        if k > cap:
            raise ParameterError(f"domain size {k} exceeds cap {cap}")
        return _krr_matrix(k, config.epsilon)
    joint = math.prod(sizes)
    if joint > cap:
        raise ParameterError(f"joint sensitive domain size {joint} exceeds cap {cap}")
    if config.setting == SETTING_NO_LDP:
        return np.eye(joint)
    if config.setting == SETTING_COMB_LDP:
        return _krr_matrix(joint, config.epsilon)
    split = split_budget(sizes, config.epsilon, config.split_policy)
    matrix = np.ones((1, 1))
    for k, eps_i in zip(sizes, split.epsilons):
        matrix = np.kron(matrix, _krr_matrix(k, eps_i))
    return matrix


def max_probability_ratio(matrix: np.ndarray) -> float:
    """Largest column-wise ratio ``T[a, z] / T[a', z]`` over the whole matrix.

    This is the quantity bounded by ``e^eps`` under eps-LDP.  Columns with a
    zero entry yield ``inf``.
    """
    matrix = np.asarray(matrix, dtype=float)
    hi = matrix.max(axis=0)
    lo = matrix.min(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(lo > 0, hi / lo, np.inf)
    return float(ratios.max())


def matrix_to_csv(matrix: np.ndarray, path: str) -> None:
    """Dump a transition matrix for offline inspection."""
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
