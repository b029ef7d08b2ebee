"""Histogram and Gaussian densities fit on training-set logits.

The class-conditional model keeps, for each class c, one histogram per
logit dimension j, fit on the logit columns of the class-c training
records, plus one Gaussian fit on class c's own logit column. Histogram
bins are equal width over the fitted sample range; a sample exactly on
an interior edge counts in the bin to its right, and the maximum sample
falls in the last bin. Bin masses carry additive smoothing:

    mass[b] = (count[b] + alpha) / (N + alpha * B)

so every bin keeps positive mass when alpha > 0, and evaluation outside
the fitted range returns the smoothing floor alpha / (N + alpha * B).
Masses are per-bin probabilities summing to 1, not densities; ratios of
masses across classes at a fixed point are what the prediction layers
consume, so the constant bin-width factor cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import ClassRegistry, SplitDataset
from .errors import DataError, FitError
from . import jsonio


@dataclass(frozen=True, eq=False)
class HistogramDensity:
    """Equal-width binned masses over [edges[0], edges[-1]]."""

    edges: np.ndarray
    masses: np.ndarray
    smoothing_alpha: float
    sample_count: int

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64)
        masses = np.asarray(self.masses, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 2:
            raise DataError("histogram needs at least 2 edges")
        if masses.ndim != 1 or masses.size != edges.size - 1:
            raise DataError(
                f"{masses.size} masses do not match {edges.size} edges"
            )
        if not np.isfinite(edges).all() or not np.isfinite(masses).all():
            raise DataError("histogram edges and masses must be finite")
        if not np.all(np.diff(edges) > 0):
            raise DataError("histogram edges must be strictly ascending")
        if np.any(masses < 0) or abs(float(masses.sum()) - 1.0) > 1e-9:
            raise DataError("histogram masses must be non-negative and sum to 1")
        if self.smoothing_alpha < 0:
            raise DataError("smoothing_alpha must be >= 0")
        if self.sample_count < 0:
            raise DataError("sample_count must be >= 0")
        edges.flags.writeable = False
        masses.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "smoothing_alpha", float(self.smoothing_alpha))
        object.__setattr__(self, "sample_count", int(self.sample_count))

    @property
    def bin_count(self) -> int:
        return int(self.masses.size)

    @property
    def floor(self) -> float:
        """Mass reported for points outside the fitted range."""
        if self.smoothing_alpha == 0.0:
            return 0.0
        return self.smoothing_alpha / (
            self.sample_count + self.smoothing_alpha * self.bin_count
        )


@dataclass(frozen=True)
class GaussianDensity:
    """Normal density with mean mu and variance sigma2."""

    mu: float
    sigma2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if not math.isfinite(self.mu) or not math.isfinite(self.sigma2):
            raise DataError("Gaussian parameters must be finite")
        if self.sigma2 <= 0:
            raise DataError("Gaussian variance must be positive")


def fit_histogram(
    samples: Sequence[float] | np.ndarray,
    bins: int,
    range: tuple[float, float] | None = None,
    alpha: float = 0.01,
) -> HistogramDensity:
    """Fit an equal-width histogram with additive smoothing.

    With range=None the support is [min(samples), max(samples)], widened
    by 1e-9 on each side when all samples coincide. With an explicit
    range, samples outside it are dropped from the normalization.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise FitError("cannot fit a histogram on an empty sample list")
    if not np.isfinite(arr).all():
        raise FitError("histogram samples must be finite")
    if not isinstance(bins, (int, np.integer)) or bins < 1:
        raise FitError(f"bins must be a positive integer, got {bins!r}")
    if alpha < 0:
        raise FitError(f"alpha must be >= 0, got {alpha!r}")
    if range is None:
        lo = float(arr.min())
        hi = float(arr.max())
        if lo == hi:
            lo -= 1e-9
            hi += 1e-9
    else:
        lo, hi = float(range[0]), float(range[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise FitError(f"range must satisfy lo < hi, got ({lo!r}, {hi!r})")
    counts, edges = np.histogram(arr, bins=int(bins), range=(lo, hi))
    n = int(counts.sum())
    if n == 0:
        raise FitError("no samples fall inside the requested range")
    masses = (counts + alpha) / (n + alpha * int(bins))
    return HistogramDensity(edges, masses, float(alpha), n)


def eval_histogram(h: HistogramDensity, x: float) -> float:
    """Mass of the bin containing x; the smoothing floor outside the range."""
    x = float(x)
    if not math.isfinite(x):
        raise DataError(f"cannot evaluate a histogram at non-finite x={x!r}")
    edges = h.edges
    if x < edges[0] or x > edges[-1]:
        return h.floor
    idx = int(np.searchsorted(edges, x, side="right")) - 1
    if idx == h.bin_count:
        idx -= 1
    return float(h.masses[idx])


def fit_gaussian(samples: Sequence[float] | np.ndarray) -> GaussianDensity:
    """Sample mean and unbiased sample variance."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size < 2:
        raise FitError(f"need at least 2 samples to fit a Gaussian, got {arr.size}")
    if not np.isfinite(arr).all():
        raise FitError("Gaussian samples must be finite")
    mu = float(arr.mean())
    sigma2 = float(arr.var(ddof=1))
    if sigma2 <= 0:
        raise FitError("samples have zero variance; a Gaussian fit is degenerate")
    return GaussianDensity(mu, sigma2)


def eval_gaussian(g: GaussianDensity, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DataError(f"cannot evaluate a Gaussian at non-finite x={x!r}")
    z = (x - g.mu) ** 2 / (2.0 * g.sigma2)
    return math.exp(-z) / math.sqrt(2.0 * math.pi * g.sigma2)


class PackedModel(NamedTuple):
    """Array form of a ClassConditionalModel for the batch kernels."""

    edges: np.ndarray        # (K, K, B+1)
    logmass: np.ndarray      # (K, K, B)
    logfloor: np.ndarray     # (K, K)
    prior_mu: np.ndarray     # (K,)
    prior_sigma2: np.ndarray  # (K,)


@dataclass(eq=False)
class ClassConditionalModel:
    """K x K histogram grid plus one Gaussian prior per class.

    hists[c][j] is the density of logit dimension j conditioned on the
    true class being c; priors[c] is fit on class c's own dimension.
    """

    registry: ClassRegistry
    hists: tuple[tuple[HistogramDensity, ...], ...]
    priors: tuple[GaussianDensity, ...]
    bin_count: int
    smoothing_alpha: float

    def __post_init__(self) -> None:
        k = self.registry.k
        self.hists = tuple(tuple(row) for row in self.hists)
        self.priors = tuple(self.priors)
        if len(self.hists) != k or any(len(row) != k for row in self.hists):
            raise DataError(f"model needs a {k} x {k} histogram grid")
        if len(self.priors) != k:
            raise DataError(f"model needs {k} Gaussian priors")
        for row in self.hists:
            for h in row:
                if h.bin_count != self.bin_count:
                    raise DataError(
                        f"histogram bin count {h.bin_count} does not match "
                        f"the model bin_count {self.bin_count}"
                    )
                if h.smoothing_alpha != self.smoothing_alpha:
                    raise DataError(
                        "all histograms must share the model smoothing_alpha"
                    )

    @property
    def k(self) -> int:
        return self.registry.k

    @cached_property
    def packed(self) -> PackedModel:
        k, b = self.k, self.bin_count
        edges = np.zeros((k, k, b + 1), dtype=np.float64)
        logmass = np.zeros((k, k, b), dtype=np.float64)
        logfloor = np.zeros((k, k), dtype=np.float64)
        with np.errstate(divide="ignore"):
            for c in range(k):
                for j in range(k):
                    h = self.hists[c][j]
                    edges[c, j] = h.edges
                    logmass[c, j] = np.log(h.masses)
                    logfloor[c, j] = np.log(h.floor) if h.floor > 0 else -np.inf
        prior_mu = np.array([g.mu for g in self.priors], dtype=np.float64)
        prior_sigma2 = np.array([g.sigma2 for g in self.priors], dtype=np.float64)
        for a in (edges, logmass, logfloor, prior_mu, prior_sigma2):
            a.flags.writeable = False
        return PackedModel(edges, logmass, logfloor, prior_mu, prior_sigma2)


def fit_class_conditional(
    train: SplitDataset,
    bins: int,
    alpha: float = 0.01,
) -> ClassConditionalModel:
    """Fit the K x K histogram grid and per-class Gaussian priors."""
    reg = train.registry
    k = reg.k
    matrix = train.logit_matrix("train")
    labels = train.labels("train")
    hists: list[tuple[HistogramDensity, ...]] = []
    priors: list[GaussianDensity] = []
    for c in range(k):
        sub = matrix[labels == c]
        if sub.shape[0] < 2:
            raise FitError(
                f"class {reg.names[c]!r} has {sub.shape[0]} training records; "
                f"need at least 2"
            )
        row = []
        for j in range(k):
            try:
                row.append(fit_histogram(sub[:, j], bins, alpha=alpha))
            except FitError as exc:
                raise FitError(
                    f"class {reg.names[c]!r}, dimension {j}: {exc}"
                ) from None
        hists.append(tuple(row))
        try:
            priors.append(fit_gaussian(sub[:, c]))
        except FitError as exc:
            raise FitError(f"class {reg.names[c]!r} prior: {exc}") from None
    return ClassConditionalModel(reg, tuple(hists), tuple(priors), int(bins), float(alpha))


def save_model(model: ClassConditionalModel, path) -> None:
    """Write the model as canonical JSON (sorted keys, exact floats)."""
    doc = {
        "alpha": model.smoothing_alpha,
        "bin_count": model.bin_count,
        "hists": [
            [
                {
                    "edges": list(h.edges),
                    "masses": list(h.masses),
                    "sample_count": h.sample_count,
                }
                for h in row
            ]
            for row in model.hists
        ],
        "priors": [{"mu": g.mu, "sigma2": g.sigma2} for g in model.priors],
        "registry": list(model.registry.names),
    }
    jsonio.dump(doc, path)


def load_model(path) -> ClassConditionalModel:
    doc = jsonio.load(path)
    if not isinstance(doc, dict):
        raise DataError(f"{path}: model file must hold a JSON object")
    try:
        registry = ClassRegistry(tuple(doc["registry"]))
        alpha = float(doc["alpha"])
        bin_count = int(doc["bin_count"])
        hists = tuple(
            tuple(
                HistogramDensity(
                    np.asarray(h["edges"], dtype=np.float64),
                    np.asarray(h["masses"], dtype=np.float64),
                    alpha,
                    int(h["sample_count"]),
                )
                for h in row
            )
            for row in doc["hists"]
        )
        priors = tuple(
            GaussianDensity(float(g["mu"]), float(g["sigma2"])) for g in doc["priors"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed model file: {exc!r}") from exc
    return ClassConditionalModel(registry, hists, priors, bin_count, alpha)
