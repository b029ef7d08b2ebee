"""Synthetic logit generator with a closed-form Bayes oracle.

Records are drawn from per-class multivariate Gaussians with diagonal
covariance: class c emits K-dimensional vectors N(means[c], diag
(variances[c])). Because the generating distribution is known, the true
posterior P(C | x) has a closed form, giving an exact reference that
fitted histogram models can be checked against. Out-of-distribution
records for the unseen split come from a separate Gaussian placed far
from every class mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dataset import ClassRegistry, LogitRecord, SplitDataset
from .errors import DataError
from .inference import Posterior
from . import jsonio


@dataclass(frozen=True)
class SplitCounts:
    """Record counts per split; zero means the split is absent."""

    train: int = 0
    validation: int = 0
    test: int = 0
    unseen: int = 0

    def __post_init__(self) -> None:
        for name in ("train", "validation", "test", "unseen"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
                raise DataError(f"count {name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    def get(self, split: str) -> int:
        return int(getattr(self, split))


@dataclass(frozen=True)
class SynthSpec:
    """Full description of one synthetic dataset, including the seed."""

    names: tuple[str, ...]
    means: tuple[tuple[float, ...], ...]
    variances: tuple[tuple[float, ...], ...]
    priors: tuple[float, ...]
    counts: SplitCounts
    ood_mean: tuple[float, ...] | None = None
    ood_variance: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        k = len(self.names)
        ClassRegistry(self.names)  # validates uniqueness and K >= 2
        means = tuple(tuple(float(v) for v in row) for row in self.means)
        variances = tuple(tuple(float(v) for v in row) for row in self.variances)
        priors = tuple(float(p) for p in self.priors)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "priors", priors)
        if len(means) != k or any(len(row) != k for row in means):
            raise DataError(f"means must be a {k} x {k} grid")
        if len(variances) != k or any(len(row) != k for row in variances):
            raise DataError(f"variances must be a {k} x {k} grid")
        for row in means:
            for v in row:
                if not math.isfinite(v):
                    raise DataError("means must be finite")
        for row in variances:
            for v in row:
                if not (math.isfinite(v) and v > 0):
                    raise DataError(f"variances must be positive, got {v!r}")
        if len(priors) != k:
            raise DataError(f"priors must have length {k}")
        if any(p < 0 for p in priors) or abs(sum(priors) - 1.0) > 1e-12:
            raise DataError("priors must be non-negative and sum to 1")
        if (self.ood_mean is None) != (self.ood_variance is None):
            raise DataError("ood_mean and ood_variance must be given together")
        if self.ood_mean is not None:
            om = tuple(float(v) for v in self.ood_mean)
            ov = tuple(float(v) for v in self.ood_variance)
            object.__setattr__(self, "ood_mean", om)
            object.__setattr__(self, "ood_variance", ov)
            if len(om) != k or len(ov) != k:
                raise DataError(f"ood parameters must have length {k}")
            if any(not math.isfinite(v) for v in om):
                raise DataError("ood_mean must be finite")
            if any(not (math.isfinite(v) and v > 0) for v in ov):
                raise DataError("ood_variance entries must be positive")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise DataError(f"seed must be an integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if not isinstance(self.counts, SplitCounts):
            raise DataError("counts must be a SplitCounts")
        if self.counts.unseen > 0 and self.ood_mean is None:
            raise DataError("an unseen split needs ood_mean and ood_variance")

    @property
    def k(self) -> int:
        return len(self.names)


def _arrays(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (
        np.asarray(spec.means, dtype=np.float64),
        np.asarray(spec.variances, dtype=np.float64),
        np.asarray(spec.priors, dtype=np.float64),
    )


def generate(spec: SynthSpec) -> SplitDataset:
    """Draw a dataset from the spec; identical spec means identical bytes.

    Labels come first from one choice call per split, then the logit
    matrix from one normal call, so the stream of RNG draws is a pure
    function of the spec.
    """
    means, variances, priors = _arrays(spec)
    k = spec.k
    rng = np.random.default_rng(spec.seed)
    records: list[LogitRecord] = []
    for split in ("train", "validation", "test"):
        n = spec.counts.get(split)
        labels = rng.choice(k, size=n, p=priors)
        x = rng.normal(means[labels], np.sqrt(variances[labels]))
        for row, lab in zip(x, labels):
            records.append(LogitRecord(tuple(row), int(lab), split))
    n_unseen = spec.counts.get("unseen")
    if n_unseen:
        x = rng.normal(
            np.asarray(spec.ood_mean), np.sqrt(np.asarray(spec.ood_variance)), (n_unseen, k)
        )
        for row in x:
            records.append(LogitRecord(tuple(row), None, "unseen"))
    return SplitDataset(ClassRegistry(spec.names), tuple(records))


def bayes_logjoint_batch(spec: SynthSpec, z) -> np.ndarray:
    """log P(x | c) + log prior_c rows for the generating distribution."""
    means, variances, priors = _arrays(spec)
    x = np.asarray(z, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.k:
        raise DataError(f"expected an (N, {spec.k}) matrix, got shape {x.shape}")
    if x.size and not np.isfinite(x).all():
        raise DataError("inputs must be finite")
    # (N, K, K): record n, class c, dimension j
    diff = x[:, None, :] - means[None, :, :]
    loglik = -0.5 * np.log(2.0 * np.pi * variances)[None, :, :] - (
        diff**2 / (2.0 * variances)[None, :, :]
    )
    with np.errstate(divide="ignore"):
        logprior = np.log(priors)
    return loglik.sum(axis=2) + logprior[None, :]


def bayes_posterior_batch(spec: SynthSpec, z) -> tuple[np.ndarray, np.ndarray]:
    """Exact posterior rows P(c | x) under the generating distribution."""
    logjoint = bayes_logjoint_batch(spec, z)
    m = logjoint.max(axis=1, keepdims=True)
    e = np.exp(logjoint - m)
    s = e.sum(axis=1, keepdims=True)
    return e / s, np.exp(np.log(s[:, 0]) + m[:, 0])


def bayes_posterior(spec: SynthSpec, logits: Sequence[float]) -> Posterior:
    """Exact posterior for one logit vector; the ground-truth oracle."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"expected a 1-D logit vector, got shape {arr.shape}")
    probs, norms = bayes_posterior_batch(spec, arr[None, :])
    return Posterior(tuple(probs[0]), float(norms[0]), "bayes")


def calibrated_logit_dataset(spec: SynthSpec) -> SplitDataset:
    """Generate a dataset whose logits are the true log-joint scores.

    softmax of such logits equals the exact Bayes posterior of the
    underlying draw, so the resulting dataset is perfectly calibrated at
    temperature 1 by construction.
    """
    base = generate(spec)
    x = np.array([r.logits for r in base.records], dtype=np.float64)
    z = bayes_logjoint_batch(spec, x)
    records = tuple(
        LogitRecord(tuple(row), rec.label, rec.split, rec.tag)
        for row, rec in zip(z, base.records)
    )
    return SplitDataset(base.registry, records)


def default_ood(
    means: Sequence[Sequence[float]],
    variances: Sequence[Sequence[float]],
    factor: float = 6.0,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """OOD Gaussian at least `factor` pooled standard deviations from
    every class mean in every dimension."""
    m = np.asarray(means, dtype=np.float64)
    v = np.asarray(variances, dtype=np.float64)
    pooled_sd = float(np.sqrt(v.mean()))
    mean = m.max(axis=0) + factor * pooled_sd
    var = np.full(m.shape[1], pooled_sd**2)
    return tuple(float(x) for x in mean), tuple(float(x) for x in var)


def default_spec(seed: int = 7) -> SynthSpec:
    """Three moderately separated classes plus a far-out OOD group.

    The OOD mean is staggered by half a standard deviation per
    dimension; a perfectly symmetric far-out point is a special case
    that hides how confident each layer gets away from the data.
    """
    names = ("class_a", "class_b", "class_c")
    k = len(names)
    means = tuple(
        tuple(1.0 if j == c else -1.0 for j in range(k)) for c in range(k)
    )
    variances = tuple(tuple(1.0 for _ in range(k)) for _ in range(k))
    ood_mean, ood_var = default_ood(means, variances)
    ood_mean = tuple(v + 0.5 * d for d, v in enumerate(ood_mean))
    return SynthSpec(
        names=names,
        means=means,
        variances=variances,
        priors=tuple(1.0 / k for _ in range(k)),
        counts=SplitCounts(train=6000, validation=2000, test=2000, unseen=1000),
        ood_mean=ood_mean,
        ood_variance=ood_var,
        seed=seed,
    )


def spec_to_dict(spec: SynthSpec) -> dict:
    return {
        "names": list(spec.names),
        "means": [list(row) for row in spec.means],
        "variances": [list(row) for row in spec.variances],
        "priors": list(spec.priors),
        "counts": {
            "train": spec.counts.train,
            "validation": spec.counts.validation,
            "test": spec.counts.test,
            "unseen": spec.counts.unseen,
        },
        "ood_mean": None if spec.ood_mean is None else list(spec.ood_mean),
        "ood_variance": None if spec.ood_variance is None else list(spec.ood_variance),
        "seed": spec.seed,
    }


def spec_from_dict(doc: dict) -> SynthSpec:
    try:
        counts = SplitCounts(**{k: int(v) for k, v in doc.get("counts", {}).items()})
        return SynthSpec(
            names=tuple(doc["names"]),
            means=tuple(tuple(row) for row in doc["means"]),
            variances=tuple(tuple(row) for row in doc["variances"]),
            priors=tuple(doc["priors"]),
            counts=counts,
            ood_mean=None if doc.get("ood_mean") is None else tuple(doc["ood_mean"]),
            ood_variance=(
                None if doc.get("ood_variance") is None else tuple(doc["ood_variance"])
            ),
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed synth spec: {exc!r}") from exc


def save_spec(spec: SynthSpec, path) -> None:
    jsonio.dump(spec_to_dict(spec), path)


def load_spec(path) -> SynthSpec:
    doc = jsonio.load(path)
    if not isinstance(doc, dict):
        raise DataError(f"{path}: synth spec must be a JSON object")
    return spec_from_dict(doc)


def with_seed(spec: SynthSpec, seed: int) -> SynthSpec:
    return replace(spec, seed=int(seed))
