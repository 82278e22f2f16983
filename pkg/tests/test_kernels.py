"""Numba and numpy kernel flavours must agree."""
import numpy as np
import pytest

from consclust import kernels
from consclust._accel import HAS_NUMBA, get_backend, use_backend
from consclust.core import encode_binary

from ._helpers import random_bps

pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("seed", range(5))
def test_block_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    coding = encode_binary(random_bps(rng, 40, 7, kmax=5, missing=0.2))
    cols = np.ascontiguousarray(coding.cols)
    labels = rng.integers(0, 4, size=coding.n)
    table = rng.random((4, coding.d))
    w = rng.random(coding.r)
    np.testing.assert_allclose(kernels.block_gather_numba(cols, table, w),
                               kernels.block_gather_numpy(cols, table, w), rtol=1e-12)
    c1, v1 = kernels.block_counts_numba(cols, labels, 4, coding.d)
    c2, v2 = kernels.block_counts_numpy(cols, labels, 4, coding.d)
    np.testing.assert_array_equal(c1, c2)
    np.testing.assert_array_equal(v1, v2)


def test_dense_kernels_agree(rng):
    X = rng.normal(size=(50, 6))
    C = rng.normal(size=(5, 6))
    np.testing.assert_allclose(kernels.sq_dists_numba(X, C), kernels.sq_dists_numpy(X, C), rtol=1e-12)
    labels = rng.integers(0, 5, size=50)
    w = rng.random(50)
    s1, m1 = kernels.weighted_sums_numba(X, w, labels, 5)
    s2, m2 = kernels.weighted_sums_numpy(X, w, labels, 5)
    np.testing.assert_allclose(s1, s2, rtol=1e-12)
    np.testing.assert_allclose(m1, m2, rtol=1e-12)


def test_coassoc_agree(rng):
    L = random_bps(rng, 30, 6, missing=0.3).labels
    np.testing.assert_array_equal(kernels.coassoc_numba(L), kernels.coassoc_numpy(L))


@pytest.mark.parametrize("single", [False, True])
def test_agglomerate_agree_with_ties(rng, single):
    # integer similarities produce many ties; tie-breaking must match exactly
    L = random_bps(rng, 25, 4, kmax=3).labels
    S = kernels.coassoc_numpy(L).astype(float)
    for K in (1, 2, 3, 7, 25):
        a = kernels.agglomerate_numba(S, K, single)
        b = kernels.agglomerate_numpy(S, K, single)
        np.testing.assert_array_equal(a, b)


def test_backend_switch():
    before = get_backend()
    with use_backend("numpy"):
        assert get_backend() == "numpy"
    assert get_backend() == before


def test_benchmark_script_runs(capsys):
    import runpy
    from pathlib import Path
    bench = runpy.run_path(str(Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"))
    bench["main"](["--n", "300", "--r", "5", "--hac-n", "40", "--repeat", "1"])
    out = capsys.readouterr().out
    assert all(name in out for name in ("block_gather", "agglomerate", "kcc_fuse"))
