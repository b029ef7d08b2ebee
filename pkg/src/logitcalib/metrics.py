"""Classification quality and unseen-class confidence metrics.

F-score and false-positive rate are computed per class one-vs-rest and
averaged. The headline numbers are the unweighted (macro) means,
matching the evaluation protocol the package is built around; the
support-weighted F-score and the pooled (micro) FPR are emitted beside
them. Degenerate classes (no predictions, or no negatives) contribute 0
to the averages.

Unseen-class statistics summarize the max-probability confidence on
records whose true class the model never saw: the mean and the unbiased
sample variance (0.0 for a single record). A model that knows what it
does not know pushes the mean toward 1/K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .inference import Posterior, predict


@dataclass(eq=False)
class ConfusionMatrix:
    """counts[i, j] = records of true class i predicted as class j."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DataError(f"confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] < 2:
            raise DataError("confusion matrix needs at least 2 classes")
        if np.any(counts < 0):
            raise DataError("confusion matrix counts must be non-negative")
        counts.flags.writeable = False
        self.counts = counts

    @property
    def k(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(
    preds: Sequence[int], labels: Sequence[int], k: int | None = None
) -> ConfusionMatrix:
    """Tally predictions against true labels into a K x K matrix."""
    p = np.asarray(preds, dtype=np.int64)
    t = np.asarray(labels, dtype=np.int64)
    if p.shape != t.shape or p.ndim != 1:
        raise DataError("preds and labels must be matching 1-D sequences")
    if k is None:
        if p.size == 0:
            raise DataError("cannot infer K from empty inputs; pass k=")
        k = int(max(p.max(), t.max())) + 1
    k = int(k)
    if k < 2:
        raise DataError(f"need at least 2 classes, got k={k}")
    if p.size:
        if p.min() < 0 or p.max() >= k or t.min() < 0 or t.max() >= k:
            raise DataError(f"class indices out of range for k={k}")
    counts = np.bincount(t * k + p, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts)


def _per_class_parts(m: ConfusionMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    c = m.counts.astype(np.float64)
    tp = np.diag(c)
    fp = c.sum(axis=0) - tp
    fn = c.sum(axis=1) - tp
    tn = c.sum() - tp - fp - fn
    return tp, fp, fn, tn


def f_scores(m: ConfusionMatrix) -> tuple[float, ...]:
    """Per-class one-vs-rest F1; 0.0 for degenerate classes.

    Computed as 2*TP / (2*TP + FP + FN), the integer-count form of
    2*precision*recall / (precision + recall): one rounding instead of
    four, so small rational cases come out exact.
    """
    tp, fp, fn, _ = _per_class_parts(m)
    out = []
    for c in range(m.k):
        denom = 2.0 * tp[c] + fp[c] + fn[c]
        out.append(float(2.0 * tp[c] / denom) if denom > 0 else 0.0)
    return tuple(out)


def f_score_avg(m: ConfusionMatrix) -> float:
    """Unweighted mean of per-class F1 scores."""
    return float(np.mean(f_scores(m)))


def f_score_weighted(m: ConfusionMatrix) -> float:
    """Support-weighted mean of per-class F1 scores."""
    support = m.counts.sum(axis=1).astype(np.float64)
    total = support.sum()
    if total == 0:
        return 0.0
    return float(np.dot(f_scores(m), support / total))


def fpr_per_class(m: ConfusionMatrix) -> tuple[float, ...]:
    """Per-class one-vs-rest false-positive rate FP / (FP + TN)."""
    _, fp, _, tn = _per_class_parts(m)
    out = []
    for c in range(m.k):
        denom = fp[c] + tn[c]
        out.append(float(fp[c] / denom) if denom > 0 else 0.0)
    return tuple(out)


def fpr_avg(m: ConfusionMatrix) -> float:
    """Unweighted mean of per-class false-positive rates."""
    return float(np.mean(fpr_per_class(m)))


def fpr_micro(m: ConfusionMatrix) -> float:
    """Pooled false-positive rate: sum(FP) / sum(FP + TN)."""
    _, fp, _, tn = _per_class_parts(m)
    denom = float((fp + tn).sum())
    return float(fp.sum() / denom) if denom > 0 else 0.0


def unseen_stats(preds: Sequence[Posterior]) -> tuple[float, float]:
    """Mean and unbiased variance of max-probability confidence.

    Intended for records from classes the model never trained on. A
    single record has no unbiased variance estimate; 0.0 is returned.
    """
    preds = list(preds)
    if not preds:
        raise DataError("unseen_stats needs at least one prediction")
    conf = [predict(p)[1] for p in preds]
    # fsum keeps the mean of identical scores exact (a uniform posterior
    # must report mean 1/K and variance 0, not 1/K plus an ulp)
    mean = math.fsum(conf) / len(conf)
    if len(conf) == 1:
        return mean, 0.0
    var = math.fsum((c - mean) ** 2 for c in conf) / (len(conf) - 1)
    return mean, var


def score_histogram(
    preds: Sequence[Posterior], bins: int = 20, all_scores: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Counts of confidence scores in equal bins over [0, 1].

    By default only the max-probability score of each prediction is
    counted; all_scores=True pools every class probability.
    """
    if not isinstance(bins, (int, np.integer)) or bins < 1:
        raise DataError(f"bins must be a positive integer, got {bins!r}")
    preds = list(preds)
    if all_scores:
        values = np.array([p for post in preds for p in post.probs], dtype=np.float64)
    else:
        values = np.array([predict(p)[1] for p in preds], dtype=np.float64)
    counts, edges = np.histogram(values, bins=int(bins), range=(0.0, 1.0))
    return counts.astype(np.int64), edges


@dataclass(frozen=True)
class EvaluationReport:
    """One prediction layer's quality metrics on a labeled split."""

    layer: str
    f_scores: tuple[float, ...]
    f_score_avg: float
    f_score_weighted: float
    fprs: tuple[float, ...]
    fpr_avg: float
    fpr_micro: float
    false_positive_mean_confidence: float | None
    unseen_mean_score: float | None
    unseen_var_score: float | None


def evaluation_report(
    preds: Sequence[Posterior],
    labels: Sequence[int],
    unseen_preds: Sequence[Posterior] | None = None,
) -> EvaluationReport:
    """Assemble the full metric set for one layer's predictions."""
    preds = list(preds)
    if not preds:
        raise DataError("evaluation needs at least one prediction")
    layer = preds[0].layer
    for p in preds:
        if p.layer != layer:
            raise DataError("all predictions in a report must share one layer")
    idx = np.zeros(len(preds), dtype=np.int64)
    conf = np.zeros(len(preds), dtype=np.float64)
    for i, p in enumerate(preds):
        idx[i], conf[i] = predict(p)
    labels_arr = np.asarray(labels, dtype=np.int64)
    k = len(preds[0].probs)
    m = confusion(idx, labels_arr, k=k)
    return _report_from_arrays(layer, m, idx, labels_arr, conf, unseen_preds)


def _report_from_arrays(
    layer: str,
    m: ConfusionMatrix,
    pred_idx: np.ndarray,
    labels: np.ndarray,
    confidences: np.ndarray,
    unseen_preds: Sequence[Posterior] | None = None,
    unseen_confidences: np.ndarray | None = None,
) -> EvaluationReport:
    wrong = pred_idx != labels
    fp_conf = float(confidences[wrong].mean()) if wrong.any() else None
    unseen_mean = unseen_var = None
    if unseen_preds is not None and len(list(unseen_preds)):
        unseen_mean, unseen_var = unseen_stats(list(unseen_preds))
    elif unseen_confidences is not None and unseen_confidences.size:
        vals = [float(v) for v in unseen_confidences]
        unseen_mean = math.fsum(vals) / len(vals)
        unseen_var = (
            math.fsum((v - unseen_mean) ** 2 for v in vals) / (len(vals) - 1)
            if len(vals) > 1
            else 0.0
        )
    return EvaluationReport(
        layer=layer,
        f_scores=f_scores(m),
        f_score_avg=f_score_avg(m),
        f_score_weighted=f_score_weighted(m),
        fprs=fpr_per_class(m),
        fpr_avg=fpr_avg(m),
        fpr_micro=fpr_micro(m),
        false_positive_mean_confidence=fp_conf,
        unseen_mean_score=unseen_mean,
        unseen_var_score=unseen_var,
    )


def format_pct(x: float) -> str:
    """A rate as a 0-100 percentage string with 2 decimals."""
    return format(100.0 * float(x), ".2f")


def report_to_dict(report: EvaluationReport, class_names: Sequence[str]) -> dict:
    """JSON-ready dict: raw rates plus display percentages."""
    names = list(class_names)
    if len(names) != len(report.f_scores):
        raise DataError("class_names must match the number of classes")
    return {
        "layer": report.layer,
        "f_scores": {n: v for n, v in zip(names, report.f_scores)},
        "f_score_avg": report.f_score_avg,
        "f_score_avg_pct": format_pct(report.f_score_avg),
        "f_score_weighted": report.f_score_weighted,
        "f_score_weighted_pct": format_pct(report.f_score_weighted),
        "fprs": {n: v for n, v in zip(names, report.fprs)},
        "fpr_avg": report.fpr_avg,
        "fpr_avg_pct": format_pct(report.fpr_avg),
        "fpr_micro": report.fpr_micro,
        "fpr_micro_pct": format_pct(report.fpr_micro),
        "false_positive_mean_confidence": report.false_positive_mean_confidence,
        "unseen_mean_score": report.unseen_mean_score,
        "unseen_var_score": report.unseen_var_score,
    }
