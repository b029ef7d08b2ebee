"""Temperature scaling and reliability diagnostics.

Temperature fitting minimizes the mean negative log-likelihood of
softmax(z / T) over a labeled validation set, searching T in
[0.05, 20]. The objective can be flat or multi-modal on odd inputs, so
the search runs golden-section on three equal sub-intervals and also
scores T in {0.05, 1, 20} directly; the best candidate wins. The direct
T=1 candidate guarantees the fitted NLL never exceeds the uncalibrated
one.

Reliability diagrams bin predictions by confidence into equal bins over
[0, 1]. Bins are closed on the right: a confidence exactly on an
interior edge falls in the bin below it, and 1.0 falls in the last bin.
ECE is the count-weighted mean absolute gap between per-bin accuracy
and per-bin mean confidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import LogitRecord
from .errors import DataError
from .inference import Posterior, predict
from . import jsonio, kernels

T_MIN = 0.05
T_MAX = 20.0
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TemperatureParam:
    """Fitted temperature and the validation NLL it achieves."""

    T: float
    nll: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "nll", float(self.nll))
        if not math.isfinite(self.T) or self.T <= 0:
            raise DataError(f"temperature must be positive and finite, got {self.T!r}")


@dataclass(frozen=True)
class ReliabilityDiagram:
    """Per-bin counts, mean confidence, and accuracy, plus the ECE."""

    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    mean_confidence: tuple[float, ...]
    accuracy: tuple[float, ...]
    ece: float

    @property
    def total(self) -> int:
        return sum(self.counts)


def _golden_min(f, lo: float, hi: float, tol: float = 1e-4) -> tuple[float, float]:
    """Golden-section minimum of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def fit_temperature_arrays(z: np.ndarray, labels: np.ndarray) -> TemperatureParam:
    """Fit T on an (N, K) logit matrix and N label indices."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if z.ndim != 2 or z.shape[0] == 0:
        raise DataError("temperature fitting needs a non-empty (N, K) logit matrix")
    if labels.shape != (z.shape[0],):
        raise DataError("labels must match the number of logit rows")
    if not np.isfinite(z).all():
        raise DataError("logit components must be finite")
    if labels.min() < 0 or labels.max() >= z.shape[1]:
        raise DataError("label indices out of range")

    def objective(t: float) -> float:
        return kernels.tempered_nll(z, labels, t)

    cuts = np.linspace(T_MIN, T_MAX, 4)
    candidates = [_golden_min(objective, cuts[i], cuts[i + 1]) for i in (0, 1, 2)]
    candidates.extend((t, objective(t)) for t in (T_MIN, 1.0, T_MAX))
    t_best, _ = min(candidates, key=lambda c: (c[1], c[0]))
    return TemperatureParam(float(t_best), objective(float(t_best)))


def fit_temperature(val: Sequence[LogitRecord]) -> TemperatureParam:
    """Fit T on labeled records (typically the validation split)."""
    records = list(val)
    if not records:
        raise DataError("temperature fitting needs a non-empty labeled record list")
    for r in records:
        if r.label is None:
            raise DataError("temperature fitting needs labeled records")
    z = np.array([r.logits for r in records], dtype=np.float64)
    labels = np.array([r.label for r in records], dtype=np.int64)
    return fit_temperature_arrays(z, labels)


def save_temperature(param: TemperatureParam, path) -> None:
    jsonio.dump({"T": param.T, "nll": param.nll}, path)


def load_temperature(path) -> TemperatureParam:
    doc = jsonio.load(path)
    try:
        return TemperatureParam(float(doc["T"]), float(doc["nll"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed temperature file: {exc!r}") from exc


def reliability_arrays(
    confidences: np.ndarray, correct: np.ndarray, bins: int = 10
) -> ReliabilityDiagram:
    """Build a reliability diagram from confidence and correctness arrays."""
    if not isinstance(bins, (int, np.integer)) or bins < 1:
        raise DataError(f"bins must be a positive integer, got {bins!r}")
    conf = np.asarray(confidences, dtype=np.float64)
    corr = np.asarray(correct, dtype=np.float64)
    if conf.shape != corr.shape or conf.ndim != 1:
        raise DataError("confidences and correctness must be matching 1-D arrays")
    if conf.size and (conf.min() < 0.0 or conf.max() > 1.0):
        raise DataError("confidences must lie in [0, 1]")
    edges = np.linspace(0.0, 1.0, int(bins) + 1)
    # right-closed bins: an interior-edge confidence goes in the bin below
    idx = np.searchsorted(edges, conf, side="left") - 1
    idx = np.clip(idx, 0, int(bins) - 1)
    counts = np.bincount(idx, minlength=int(bins))
    conf_sum = np.bincount(idx, weights=conf, minlength=int(bins))
    corr_sum = np.bincount(idx, weights=corr, minlength=int(bins))
    mean_conf = np.zeros(int(bins))
    acc = np.zeros(int(bins))
    nonzero = counts > 0
    mean_conf[nonzero] = conf_sum[nonzero] / counts[nonzero]
    acc[nonzero] = corr_sum[nonzero] / counts[nonzero]
    n = int(counts.sum())
    ece = 0.0
    if n:
        ece = float(np.sum(counts[nonzero] / n * np.abs(acc[nonzero] - mean_conf[nonzero])))
    return ReliabilityDiagram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        mean_confidence=tuple(float(v) for v in mean_conf),
        accuracy=tuple(float(v) for v in acc),
        ece=ece,
    )


def reliability(
    preds: Sequence[Posterior], labels: Sequence[int], bins: int = 10
) -> ReliabilityDiagram:
    """Reliability diagram of argmax predictions against true labels."""
    preds = list(preds)
    labels_arr = np.asarray(labels, dtype=np.int64)
    if labels_arr.shape != (len(preds),):
        raise DataError("labels must match the number of predictions")
    conf = np.zeros(len(preds))
    correct = np.zeros(len(preds))
    for i, p in enumerate(preds):
        cls, c = predict(p)
        conf[i] = c
        correct[i] = 1.0 if cls == int(labels_arr[i]) else 0.0
    return reliability_arrays(conf, correct, bins)


def write_reliability_csv(diagram: ReliabilityDiagram, path) -> None:
    """CSV rows bin_lo,bin_hi,count,mean_confidence,accuracy."""
    lines = ["bin_lo,bin_hi,count,mean_confidence,accuracy"]
    for b in range(len(diagram.counts)):
        lines.append(
            ",".join(
                (
                    jsonio.format_float(diagram.bin_edges[b]),
                    jsonio.format_float(diagram.bin_edges[b + 1]),
                    str(diagram.counts[b]),
                    jsonio.format_float(diagram.mean_confidence[b]),
                    jsonio.format_float(diagram.accuracy[b]),
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
