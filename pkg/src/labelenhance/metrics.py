"""The six distribution-recovery measures, per-dataset averaging, and
cross-method average ranks.

By convention the first argument is the ground truth and the second the
recovery, which fixes the KL argument order.  Denominators and the KL
divisor are clamped below at 1e-12; true-zero degrees contribute nothing
to KL (limit convention).
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "MetricVector",
    "METRIC_NAMES",
    "METRIC_DIRECTIONS",
    "EvaluationReport",
    "evaluate_pair",
    "evaluate_dataset",
    "average_ranks",
    "average_given_ranks",
    "build_report",
]

EPS = 1e-12

METRIC_NAMES = ("cheb", "canber", "clark", "kl", "cosine", "intersec")

# "lower" means smaller is better
METRIC_DIRECTIONS = {
    "cheb": "lower",
    "canber": "lower",
    "clark": "lower",
    "kl": "lower",
    "cosine": "higher",
    "intersec": "higher",
}


@dataclass(frozen=True)
class MetricVector:
    cheb: float
    canber: float
    clark: float
    kl: float
    cosine: float
    intersec: float

    def as_dict(self):
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _check_distributions(D, D_hat, ndim):
    D = np.asarray(D, dtype=float)
    D_hat = np.asarray(D_hat, dtype=float)
    if D.shape != D_hat.shape:
        raise ValueError(f"shape mismatch: {D.shape} vs {D_hat.shape}")
    if D.ndim != ndim:
        raise ValueError(f"expected {ndim}-D input, got {D.ndim}-D")
    for name, M in (("truth", D), ("recovery", D_hat)):
        if not np.isfinite(M).all():
            raise ValueError(f"{name} contains non-finite entries")
        if (M < 0).any():
            raise ValueError(f"{name} contains negative entries")
        sums = M.sum(axis=0)
        if np.abs(sums - 1.0).max() > 1e-6:
            raise ValueError(f"{name} columns must sum to 1 within 1e-6")
    return D, D_hat


def _compute(D, D_hat):
    """Columnwise metric values for o x n inputs; returns 6 arrays of length n."""
    diff = np.abs(D - D_hat)
    den = np.maximum(D + D_hat, EPS)
    cheb = diff.max(axis=0)
    canber = (diff / den).sum(axis=0)
    clark = np.sqrt(((D - D_hat) ** 2 / den ** 2).sum(axis=0))
    kl_terms = np.where(D > 0, D * np.log(np.maximum(D, EPS) / np.maximum(D_hat, EPS)), 0.0)
    kl = kl_terms.sum(axis=0)
    norms = np.linalg.norm(D, axis=0) * np.linalg.norm(D_hat, axis=0)
    cosine = (D * D_hat).sum(axis=0) / np.maximum(norms, EPS)
    intersec = np.minimum(D, D_hat).sum(axis=0)
    return cheb, canber, clark, kl, cosine, intersec


def evaluate_pair(d, d_hat):
    """Six measures between a ground-truth column and a recovered column."""
    d, d_hat = _check_distributions(d, d_hat, ndim=1)
    values = _compute(d[:, None], d_hat[:, None])
    return MetricVector(*(float(v[0]) for v in values))


def evaluate_dataset(D, D_hat):
    """Unweighted per-instance mean of the six measures over o x n matrices."""
    D, D_hat = _check_distributions(D, D_hat, ndim=2)
    values = _compute(D, D_hat)
    return MetricVector(*(float(v.mean()) for v in values))


def average_given_ranks(ranks):
    """Mean over datasets of precomputed per-dataset ranks.

    ``ranks`` maps dataset -> {method -> rank}; every dataset must cover
    the same methods.
    """
    if not ranks:
        raise ValueError("need at least one dataset")
    datasets = list(ranks)
    methods = list(ranks[datasets[0]])
    if len(methods) < 2:
        raise ValueError("need at least two methods")
    out = {m: 0.0 for m in methods}
    for ds in datasets:
        row = ranks[ds]
        if set(row) != set(methods):
            missing = set(methods).symmetric_difference(row)
            raise ValueError(f"dataset {ds!r}: inconsistent methods {sorted(missing)}")
        for m in methods:
            out[m] += float(row[m])
    return {m: v / len(datasets) for m, v in out.items()}


def average_ranks(scores, direction="lower"):
    """Rank methods per dataset (1 = best, ties share the averaged rank)
    and average the ranks over datasets.

    ``scores`` maps dataset -> {method -> value}; ``direction`` is "lower"
    when smaller values are better, "higher" otherwise.
    """
    if direction not in ("lower", "higher"):
        raise ValueError(f"unknown direction {direction!r}")
    if not scores:
        raise ValueError("need at least one dataset")
    datasets = list(scores)
    methods = list(scores[datasets[0]])
    if len(methods) < 2:
        raise ValueError("need at least two methods")
    per_dataset = {}
    for ds in datasets:
        row = scores[ds]
        if set(row) != set(methods):
            missing = set(methods).symmetric_difference(row)
            raise ValueError(f"dataset {ds!r}: inconsistent methods {sorted(missing)}")
        vals = np.array([float(row[m]) for m in methods])
        if direction == "higher":
            vals = -vals
        r = rankdata(vals, method="average")
        per_dataset[ds] = dict(zip(methods, r))
    return average_given_ranks(per_dataset)


@dataclass
class EvaluationReport:
    """Per-dataset metric values plus per-metric average ranks."""

    per_dataset: dict   # dataset -> method -> MetricVector
    avg_rank: dict      # metric -> method -> float


def build_report(per_dataset):
    """Assemble an :class:`EvaluationReport` from per-dataset MetricVectors."""
    avg_rank = {}
    for metric in METRIC_NAMES:
        scores = {ds: {m: getattr(mv, metric) for m, mv in row.items()}
                  for ds, row in per_dataset.items()}
        avg_rank[metric] = average_ranks(scores, METRIC_DIRECTIONS[metric])
    return EvaluationReport(per_dataset=per_dataset, avg_rank=avg_rank)
