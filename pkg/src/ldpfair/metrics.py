"""Per-group confusion rates and the five signed group-disparity metrics.

All disparities follow the same sign convention: privileged-group rate minus
unprivileged-group rate.  Rates whose denominator is zero are reported as
``None`` (an explicit undefined marker) and propagate to the disparities that
consume them; they are never silently coerced to zero, because a fake zero
would read as perfect fairness in degenerate folds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

DISPARITY_NAMES = ("SD", "EOD", "PED", "OAD", "PRD")
RATE_NAMES = ("selection_rate", "tpr", "fpr", "accuracy", "ppv")


@dataclass(frozen=True)
class GroupRates:
    """Confusion counts and derived rates for one group of records."""

    n: int
    tp: int
    fp: int
    tn: int
    fn: int
    selection_rate: float | None
    tpr: float | None
    fpr: float | None
    accuracy: float | None
    ppv: float | None

    def rate(self, name: str) -> float | None:
        if name not in RATE_NAMES:
            raise ParameterError(f"unknown rate {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class DisparityReport:
    """Signed privileged-minus-unprivileged gaps; None where undefined."""

    sd: float | None
    eod: float | None
    ped: float | None
    oad: float | None
    prd: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {"SD": self.sd, "EOD": self.eod, "PED": self.ped, "OAD": self.oad, "PRD": self.prd}


def _check_binary(name: str, values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ParameterError(f"{name} must contain only 0/1 entries")
    return arr.astype(np.int64)


def confusion_rates(y_true, y_pred) -> GroupRates:
    """Exact confusion counting for one population.

    TPR = TP/(TP+FN), FPR = FP/(FP+TN), PPV = TP/(TP+FP); each is None when
    its denominator vanishes, as are all rates of an empty population.
    """
    yt = _check_binary("y_true", y_true)
    yp = _check_binary("y_pred", y_pred)
    if len(yt) != len(yp):
        raise ParameterError(f"length mismatch: {len(yt)} true labels vs {len(yp)} predictions")
    n = len(yt)
    tp = int(np.count_nonzero((yt == 1) & (yp == 1)))
    fp = int(np.count_nonzero((yt == 0) & (yp == 1)))
    tn = int(np.count_nonzero((yt == 0) & (yp == 0)))
    fn = int(np.count_nonzero((yt == 1) & (yp == 0)))
    return GroupRates(
        n=n,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        selection_rate=(tp + fp) / n if n else None,
        tpr=tp / (tp + fn) if tp + fn else None,
        fpr=fp / (fp + tn) if fp + tn else None,
        accuracy=(tp + tn) / n if n else None,
        ppv=tp / (tp + fp) if tp + fp else None,
    )


def group_rates(y_true, y_pred, groups) -> dict[int, GroupRates]:
    """Confusion rates split by group label (0 = unprivileged, 1 = privileged)."""
    yt = _check_binary("y_true", y_true)
    yp = _check_binary("y_pred", y_pred)
    g = _check_binary("groups", groups)
    if not len(yt) == len(yp) == len(g):
        raise ParameterError("y_true, y_pred, and groups must have equal lengths")
    return {
        group: confusion_rates(yt[g == group], yp[g == group])
        for group in (0, 1)
    }


def _diff(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return a - b


def disparity(privileged: GroupRates, unprivileged: GroupRates) -> DisparityReport:
    """Five signed gaps between the two groups' rates.

    SD compares selection rates, EOD true positive rates, PED false positive
    rates, OAD accuracies, and PRD positive predictive values.
    """
    if privileged.n == 0 or unprivileged.n == 0:
        raise ParameterError("disparity needs both groups non-empty")
    return DisparityReport(
        sd=_diff(privileged.selection_rate, unprivileged.selection_rate),
        eod=_diff(privileged.tpr, unprivileged.tpr),
        ped=_diff(privileged.fpr, unprivileged.fpr),
        oad=_diff(privileged.accuracy, unprivileged.accuracy),
        prd=_diff(privileged.ppv, unprivileged.ppv),
    )
