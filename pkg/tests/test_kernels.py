"""Backend agreement: the numba kernels match the numpy fallback, and the
numpy fallback matches a plain scalar reference."""

import numpy as np
import numpy.testing as npt
import pytest

from logitcalib import kernels
from logitcalib.dataset import ClassRegistry, LogitRecord, SplitDataset
from logitcalib.density import eval_histogram, fit_class_conditional

HAS_NUMBA = kernels.hist_loglik_numba is not None


def _model(seed=0, k=3, n=60, bins=7, alpha=0.01):
    rng = np.random.default_rng(seed)
    reg = ClassRegistry(tuple(f"c{i}" for i in range(k)))
    recs = []
    for c in range(k):
        for _ in range(n):
            mean = np.full(k, -1.0)
            mean[c] = 1.0
            recs.append(LogitRecord(tuple(rng.normal(mean, 1.0)), c, "train"))
    ds = SplitDataset(reg, tuple(recs))
    return fit_class_conditional(ds, bins=bins, alpha=alpha)


class TestNumpyAgainstScalar:
    def test_hist_loglik_matches_scalar_eval(self):
        """The batch lookup equals per-record scalar evaluation exactly,
        including points outside every histogram's range."""
        model = _model()
        p = model.packed
        rng = np.random.default_rng(1)
        x = np.concatenate(
            [rng.normal(0, 3, size=(200, 3)), rng.normal(0, 30, size=(50, 3))]
        )
        got = kernels.hist_loglik_numpy(p.edges, p.logmass, p.logfloor, x, False)
        for i in range(x.shape[0]):
            for c in range(model.k):
                expected = sum(
                    np.log(eval_histogram(model.hists[c][j], x[i, j]))
                    for j in range(model.k)
                )
                assert got[i, c] == expected

    def test_own_dimension_mode_matches_scalar(self):
        model = _model(seed=2)
        p = model.packed
        rng = np.random.default_rng(3)
        x = rng.normal(0, 3, size=(100, 3))
        got = kernels.hist_loglik_numpy(p.edges, p.logmass, p.logfloor, x, True)
        for i in range(x.shape[0]):
            for c in range(model.k):
                expected = np.log(eval_histogram(model.hists[c][c], x[i, c]))
                assert got[i, c] == expected

    def test_softmax_matches_direct_formula(self):
        rng = np.random.default_rng(4)
        z = rng.normal(0, 4, size=(100, 5))
        got = kernels.softmax_numpy(z)
        for i in range(z.shape[0]):
            e = np.exp(z[i] - z[i].max())
            npt.assert_allclose(got[i], e / e.sum(), rtol=1e-15)

    def test_tempered_nll_matches_direct_formula(self):
        rng = np.random.default_rng(5)
        z = rng.normal(0, 3, size=(200, 4))
        labels = rng.integers(0, 4, size=200)
        for t in (0.1, 1.0, 2.5):
            zt = z / t
            e = np.exp(zt - zt.max(axis=1, keepdims=True))
            probs = e / e.sum(axis=1, keepdims=True)
            expected = -np.mean(np.log(probs[np.arange(200), labels]))
            npt.assert_allclose(
                kernels.tempered_nll_numpy(z, labels, t), expected, rtol=1e-12
            )


@pytest.mark.skipif(not HAS_NUMBA, reason="numba backend not available")
class TestBackendAgreement:
    def test_hist_loglik_bitwise_equal(self):
        """Both backends share the bisection convention and accumulation
        order, so the histogram lookup is bit-identical across them."""
        model = _model(seed=6, k=4, bins=11)
        p = model.packed
        rng = np.random.default_rng(7)
        x = np.concatenate(
            [
                rng.normal(0, 3, size=(500, 4)),
                rng.normal(0, 40, size=(100, 4)),
                np.array([p.edges[c, j, rng.integers(12)] for c in range(4) for j in range(4)])
                .reshape(-1, 4),
            ]
        )
        for own in (False, True):
            a = kernels.hist_loglik_numpy(p.edges, p.logmass, p.logfloor, x, own)
            b = kernels.hist_loglik_numba(p.edges, p.logmass, p.logfloor, x, own)
            npt.assert_array_equal(a, b)

    def test_softmax_backends_agree(self):
        rng = np.random.default_rng(8)
        z = rng.normal(0, 5, size=(300, 3))
        npt.assert_allclose(
            kernels.softmax_numba(z), kernels.softmax_numpy(z), rtol=1e-14, atol=0
        )

    def test_tempered_nll_backends_agree(self):
        rng = np.random.default_rng(9)
        z = rng.normal(0, 3, size=(400, 3))
        labels = rng.integers(0, 3, size=400)
        for t in (0.05, 0.7, 1.0, 13.0):
            npt.assert_allclose(
                kernels.tempered_nll_numba(z, labels, t),
                kernels.tempered_nll_numpy(z, labels, t),
                rtol=1e-12,
            )

    def test_dispatch_uses_selected_backend(self):
        assert kernels.BACKEND in ("numba", "numpy")
        model = _model(seed=10)
        p = model.packed
        rng = np.random.default_rng(11)
        x = rng.normal(0, 3, size=(50, 3))
        via_dispatch = kernels.hist_loglik(p.edges, p.logmass, p.logfloor, x)
        direct = (
            kernels.hist_loglik_numba if kernels.BACKEND == "numba"
            else kernels.hist_loglik_numpy
        )(p.edges, p.logmass, p.logfloor, x, False)
        npt.assert_array_equal(via_dispatch, direct)


class TestBackendEnvFlag:
    def test_numpy_backend_forced_in_subprocess(self):
        """LOGITCALIB_BACKEND=numpy selects the fallback at import time."""
        import subprocess
        import sys

        code = (
            "import os; os.environ['LOGITCALIB_BACKEND']='numpy'; "
            "from logitcalib import kernels; print(kernels.BACKEND)"
        )
        out = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == "numpy"

    def test_invalid_backend_value_fails_loudly(self):
        import subprocess
        import sys

        code = (
            "import os; os.environ['LOGITCALIB_BACKEND']='gpu'; "
            "import logitcalib.kernels"
        )
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
        assert out.returncode != 0
        assert "LOGITCALIB_BACKEND" in out.stderr
