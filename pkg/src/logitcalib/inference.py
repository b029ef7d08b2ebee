"""Prediction layers mapping logit vectors to normalized posteriors.

Four layers share one output shape:

    softmax      exp(z_c) / sum_j exp(z_j)
    softmax_T    softmax of z / T with a fitted temperature T
    ml           histogram likelihoods, uniform class priors:
                 L_c(x) / sum_j L_j(x) where L_c is the product of
                 class-c bin masses across logit dimensions
    map          histogram likelihoods times the per-class Gaussian
                 prior evaluated at the class's own logit coordinate

All products are taken in log space and exp-normalized after a max
shift, so extreme logits and tiny bin masses cannot overflow or
underflow the normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .density import ClassConditionalModel
from .errors import DataError
from . import kernels

LAYERS = ("softmax", "softmax_T", "ml", "map")
LIKELIHOOD_MODES = ("product", "own-dimension")


@dataclass(frozen=True)
class Posterior:
    """Normalized class probabilities from one prediction layer.

    normalizer holds the evidence in linear scale: the sum of the
    unnormalized per-class scores. It can overflow to inf for extreme
    softmax logits; probs themselves never do.
    """

    probs: tuple[float, ...]
    normalizer: float
    layer: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "normalizer", float(self.normalizer))
        if len(self.probs) < 2:
            raise DataError("a posterior needs at least 2 classes")
        total = 0.0
        for p in self.probs:
            if math.isnan(p) or p < 0.0 or p > 1.0:
                raise DataError(f"posterior probabilities must lie in [0, 1], got {p!r}")
            total += p
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"posterior probabilities sum to {total!r}, not 1")
        if math.isnan(self.normalizer) or self.normalizer <= 0.0:
            raise DataError(f"normalizer must be positive, got {self.normalizer!r}")


def _validate_matrix(z, k: int | None = None) -> np.ndarray:
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"expected an (N, K) logit matrix, got shape {arr.shape}")
    if arr.shape[1] < 2:
        raise DataError("logit vectors need at least 2 components")
    if k is not None and arr.shape[1] != k:
        raise DataError(
            f"logit vectors have {arr.shape[1]} components, the model has {k} classes"
        )
    if arr.size and not np.isfinite(arr).all():
        raise DataError("logit components must be finite")
    return arr


def _logsumexp_rows(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1)
    return m + np.log(np.exp(z - m[:, None]).sum(axis=1))


def _exp_normalize(loglik: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities and linear-scale normalizers from log-score rows."""
    m = loglik.max(axis=1, keepdims=True)
    if not np.isfinite(m).all():
        raise DataError(
            "every class has zero likelihood at some input; "
            "fit densities with smoothing alpha > 0"
        )
    e = np.exp(loglik - m)
    s = e.sum(axis=1, keepdims=True)
    probs = e / s
    norms = np.exp(np.log(s[:, 0]) + m[:, 0])
    return probs, norms


def softmax_batch(z) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise softmax plus the linear-scale partition values."""
    z = _validate_matrix(z)
    probs = kernels.softmax_batch(z)
    # the partition value may overflow to inf for extreme logits; the
    # probabilities themselves are max-shifted and never do
    with np.errstate(over="ignore"):
        norms = np.exp(_logsumexp_rows(z))
    return probs, norms


def softmax_tempered_batch(z, t: float) -> tuple[np.ndarray, np.ndarray]:
    if not (isinstance(t, (int, float)) and math.isfinite(t) and t > 0):
        raise DataError(f"temperature must be a positive finite number, got {t!r}")
    z = _validate_matrix(z)
    return softmax_batch(z / float(t))


def _mode_check(mode: str) -> bool:
    if mode not in LIKELIHOOD_MODES:
        raise DataError(
            f"unknown likelihood mode {mode!r}; expected one of {LIKELIHOOD_MODES}"
        )
    return mode == "own-dimension"


def ml_loglik_batch(model: ClassConditionalModel, z, mode: str = "product") -> np.ndarray:
    """Log histogram likelihood rows log L_c(x), before any prior."""
    own = _mode_check(mode)
    z = _validate_matrix(z, model.k)
    p = model.packed
    return kernels.hist_loglik(p.edges, p.logmass, p.logfloor, z, own)


def ml_batch(
    model: ClassConditionalModel, z, mode: str = "product"
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram-likelihood posterior under uniform class priors."""
    return _exp_normalize(ml_loglik_batch(model, z, mode))


def map_batch(
    model: ClassConditionalModel, z, mode: str = "product"
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram likelihood times the own-coordinate Gaussian prior."""
    loglik = ml_loglik_batch(model, z, mode)
    z = np.asarray(z, dtype=np.float64)
    p = model.packed
    logprior = -0.5 * np.log(2.0 * np.pi * p.prior_sigma2)[None, :] - (
        (z - p.prior_mu[None, :]) ** 2 / (2.0 * p.prior_sigma2[None, :])
    )
    return _exp_normalize(loglik + logprior)


def _as_row(logits) -> np.ndarray:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"expected a 1-D logit vector, got shape {arr.shape}")
    return arr[None, :]


def softmax(logits: Sequence[float]) -> Posterior:
    probs, norms = softmax_batch(_as_row(logits))
    return Posterior(tuple(probs[0]), float(norms[0]), "softmax")


def softmax_tempered(logits: Sequence[float], t: float) -> Posterior:
    probs, norms = softmax_tempered_batch(_as_row(logits), t)
    return Posterior(tuple(probs[0]), float(norms[0]), "softmax_T")


def ml_posterior(
    model: ClassConditionalModel, logits: Sequence[float], mode: str = "product"
) -> Posterior:
    probs, norms = ml_batch(model, _as_row(logits), mode)
    return Posterior(tuple(probs[0]), float(norms[0]), "ml")


def map_posterior(
    model: ClassConditionalModel, logits: Sequence[float], mode: str = "product"
) -> Posterior:
    probs, norms = map_batch(model, _as_row(logits), mode)
    return Posterior(tuple(probs[0]), float(norms[0]), "map")


def predict(posterior: Posterior) -> tuple[int, float]:
    """Argmax class index and its probability; ties go to the lowest index."""
    arr = np.asarray(posterior.probs, dtype=np.float64)
    idx = int(np.argmax(arr))
    return idx, float(arr[idx])


def predict_batch(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise argmax indices and confidences; ties go to the lowest index."""
    probs = np.asarray(probs, dtype=np.float64)
    idx = np.argmax(probs, axis=1)
    conf = probs[np.arange(probs.shape[0]), idx]
    return idx.astype(np.int64), conf
