"""External agreement between partitions, restricted to jointly labelled points."""
import numpy as np

from .core import Partition, as_bps
from .kcc import contingency, utility


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(a, b):
    """Mutual information over sqrt(H_a H_b).

    A zero-entropy side scores 0, except that two single-cluster partitions
    are identical and score 1.
    """
    N = contingency(a, b)
    ha, hb = _entropy(N.sum(axis=1)), _entropy(N.sum(axis=0))
    if ha <= 0 or hb <= 0:
        return 1.0 if ha == hb else 0.0
    p = N / N.sum()
    pa, pb = p.sum(axis=1), p.sum(axis=0)
    nz = p > 0
    mi = float((p[nz] * np.log(p[nz] / np.outer(pa, pb)[nz])).sum())
    return float(min(1.0, max(0.0, mi / np.sqrt(ha * hb))))


def _comb2(x):
    return x * (x - 1) / 2.0


def ari(a, b):
    """Hubert-Arabie adjusted Rand index."""
    N = contingency(a, b)
    n = N.sum()
    index = _comb2(N).sum()
    rows, cols = _comb2(N.sum(axis=1)).sum(), _comb2(N.sum(axis=0)).sum()
    expected = rows * cols / _comb2(n) if n > 1 else 0.0
    top = (rows + cols) / 2.0
    if top == expected:
        return 1.0 if index == expected else 0.0
    return float((index - expected) / (top - expected))


def purity(pred, truth):
    """sum_k max_j n_kj / n."""
    N = contingency(pred, truth)
    return float(N.max(axis=1).sum() / N.sum())


def ensemble_agreement(pi, bps, kind="uc"):
    """sum_i U(pi, pi_i): the quantity consensus clustering maximises."""
    bps = as_bps(bps)
    pi = pi if isinstance(pi, Partition) else Partition(pi)
    return float(sum(utility(pi, p, kind) for p in bps.partitions))
