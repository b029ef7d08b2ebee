"""Compare the numba kernels against the pure-numpy fallback.

Both implementations are imported directly, so the LOGITCALIB_BACKEND
switch is irrelevant here. Each kernel is checked for agreement before
timing; histogram lookups must match bit for bit, the reductions to
within accumulated rounding.

Usage: python3 benchmarks/bench_backends.py [--rows N] [--bins B] [--repeats R]
"""

import argparse
import time

import numpy as np

from logitcalib import kernels
from logitcalib.density import fit_class_conditional
from logitcalib.synth import SplitCounts, SynthSpec, generate


def build_inputs(rows: int, bins: int):
    k = 3
    spec = SynthSpec(
        names=("a", "b", "c"),
        means=tuple(tuple(1.5 if j == c else -1.5 for j in range(k)) for c in range(k)),
        variances=tuple((1.0,) * k for _ in range(k)),
        priors=(1 / 3, 1 / 3, 1 / 3),
        counts=SplitCounts(train=50_000),
        seed=99,
    )
    model = fit_class_conditional(generate(spec), bins=bins, alpha=0.01)
    packed = model.packed
    rng = np.random.default_rng(100)
    z = rng.normal(0.0, 2.0, size=(rows, k))
    labels = rng.integers(0, k, size=rows)
    return packed, z, labels


def best_of(repeats: int, fn, *args) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--bins", type=int, default=25)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    packed, z, labels = build_inputs(args.rows, args.bins)
    hist_args = (packed.edges, packed.logmass, packed.logfloor, z)

    cases = [
        ("hist_loglik", kernels.hist_loglik_numpy, kernels.hist_loglik_numba, hist_args),
        ("softmax", kernels.softmax_numpy, kernels.softmax_numba, (z,)),
        ("tempered_nll", kernels.tempered_nll_numpy, kernels.tempered_nll_numba,
         (z, labels, 1.5)),
    ]

    print(f"rows={args.rows} bins={args.bins} repeats={args.repeats} "
          f"(best-of timing, ms)")
    print(f"{'kernel':<14} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for name, np_fn, nb_fn, call_args in cases:
        if nb_fn is None:
            t_np = best_of(args.repeats, np_fn, *call_args)
            print(f"{name:<14} {t_np * 1e3:>10.2f} {'absent':>10} {'-':>9}")
            continue
        a = np_fn(*call_args)
        b = nb_fn(*call_args)  # also triggers compilation before timing
        if name == "hist_loglik":
            assert np.array_equal(a, b), "backends disagree bitwise"
        else:
            assert np.allclose(a, b, rtol=1e-12), "backends disagree"
        t_np = best_of(args.repeats, np_fn, *call_args)
        t_nb = best_of(args.repeats, nb_fn, *call_args)
        print(f"{name:<14} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} "
              f"{t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
