"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

Batch histogram log-likelihood lookup dominates prediction time and the
tempered-NLL objective dominates temperature fitting, so both carry a
numba @njit implementation. The backend is picked once at import:

    LOGITCALIB_BACKEND=numba   require numba (ImportError if missing)
    LOGITCALIB_BACKEND=numpy   force the pure-numpy fallback
    unset / auto               numba when importable, else numpy

Both backends produce bit-identical histogram lookups (same bisection
convention, same accumulation order); the softmax and NLL kernels agree
to float rounding. Each backend is individually deterministic.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("LOGITCALIB_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"LOGITCALIB_BACKEND={_requested!r} is not valid; "
        f"use 'numba', 'numpy', or leave it unset"
    )

_nb = None
if _requested in ("auto", "numba"):
    try:
        import numba as _nb
    except ImportError:
        if _requested == "numba":
            raise
        _nb = None

BACKEND = "numba" if _nb is not None else "numpy"


def hist_loglik_numpy(
    edges: np.ndarray,
    logmass: np.ndarray,
    logfloor: np.ndarray,
    x: np.ndarray,
    own_dim: bool = False,
) -> np.ndarray:
    """Sum of per-dimension log bin masses, one row per record.

    edges (K,K,B+1), logmass (K,K,B), logfloor (K,K), x (N,K) -> (N,K).
    out[n,c] = sum_j log hists[c][j](x[n,j]), or the own-dimension term
    alone when own_dim is set. Out-of-range points take logfloor[c,j].
    """
    n, k = x.shape
    b = logmass.shape[2]
    out = np.zeros((n, k), dtype=np.float64)
    for c in range(k):
        dims = (c,) if own_dim else range(k)
        for j in dims:
            e = edges[c, j]
            xv = x[:, j]
            idx = np.searchsorted(e, xv, side="right") - 1
            idx[idx == b] = b - 1
            np.clip(idx, 0, b - 1, out=idx)
            in_range = (xv >= e[0]) & (xv <= e[-1])
            out[:, c] += np.where(in_range, logmass[c, j, idx], logfloor[c, j])
    return out


def softmax_numpy(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax, max-shifted so large logits cannot overflow."""
    m = z.max(axis=1, keepdims=True)
    e = np.exp(z - m)
    return e / e.sum(axis=1, keepdims=True)


def tempered_nll_numpy(z: np.ndarray, labels: np.ndarray, t: float) -> float:
    """Mean negative log-likelihood of softmax(z / t) at the true labels."""
    zt = z / t
    m = zt.max(axis=1)
    lse = m + np.log(np.exp(zt - m[:, None]).sum(axis=1))
    return float(np.mean(lse - zt[np.arange(z.shape[0]), labels]))


if _nb is not None:

    @_nb.njit(cache=True)
    def _hist_loglik_nb(edges, logmass, logfloor, x, own_dim):  # pragma: no cover
        n, k = x.shape
        b = logmass.shape[2]
        out = np.zeros((n, k), dtype=np.float64)
        for i in range(n):
            for c in range(k):
                acc = 0.0
                for j in range(k):
                    if own_dim and j != c:
                        continue
                    v = x[i, j]
                    if v < edges[c, j, 0] or v > edges[c, j, b]:
                        acc += logfloor[c, j]
                    else:
                        lo = 0
                        hi = b + 1
                        while lo < hi:
                            mid = (lo + hi) // 2
                            if v < edges[c, j, mid]:
                                hi = mid
                            else:
                                lo = mid + 1
                        idx = lo - 1
                        if idx == b:
                            idx = b - 1
                        acc += logmass[c, j, idx]
                out[i, c] = acc
        return out

    @_nb.njit(cache=True)
    def _softmax_nb(z):  # pragma: no cover
        n, k = z.shape
        out = np.empty((n, k), dtype=np.float64)
        for i in range(n):
            m = z[i, 0]
            for j in range(1, k):
                if z[i, j] > m:
                    m = z[i, j]
            s = 0.0
            for j in range(k):
                out[i, j] = np.exp(z[i, j] - m)
                s += out[i, j]
            for j in range(k):
                out[i, j] /= s
        return out

    @_nb.njit(cache=True)
    def _tempered_nll_nb(z, labels, t):  # pragma: no cover
        n, k = z.shape
        total = 0.0
        for i in range(n):
            m = z[i, 0] / t
            for j in range(1, k):
                v = z[i, j] / t
                if v > m:
                    m = v
            s = 0.0
            for j in range(k):
                s += np.exp(z[i, j] / t - m)
            total += np.log(s) + m - z[i, labels[i]] / t
        return total / n

    def hist_loglik_numba(edges, logmass, logfloor, x, own_dim=False):
        return _hist_loglik_nb(edges, logmass, logfloor, x, own_dim)

    def softmax_numba(z):
        return _softmax_nb(z)

    def tempered_nll_numba(z, labels, t):
        return float(_tempered_nll_nb(z, labels, t))

else:
    hist_loglik_numba = None
    softmax_numba = None
    tempered_nll_numba = None


def _as_matrix(z) -> np.ndarray:
    return np.ascontiguousarray(z, dtype=np.float64)


def hist_loglik(edges, logmass, logfloor, x, own_dim: bool = False) -> np.ndarray:
    edges = np.ascontiguousarray(edges, dtype=np.float64)
    logmass = np.ascontiguousarray(logmass, dtype=np.float64)
    logfloor = np.ascontiguousarray(logfloor, dtype=np.float64)
    x = _as_matrix(x)
    if BACKEND == "numba":
        return hist_loglik_numba(edges, logmass, logfloor, x, bool(own_dim))
    return hist_loglik_numpy(edges, logmass, logfloor, x, bool(own_dim))


def softmax_batch(z) -> np.ndarray:
    z = _as_matrix(z)
    if BACKEND == "numba":
        return softmax_numba(z)
    return softmax_numpy(z)


def tempered_nll(z, labels, t: float) -> float:
    z = _as_matrix(z)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if BACKEND == "numba":
        return tempered_nll_numba(z, labels, float(t))
    return tempered_nll_numpy(z, labels, float(t))
