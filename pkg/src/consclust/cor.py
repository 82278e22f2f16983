"""Clustering with outlier removal on the flip-augmented coding.

``B~ = [B | B-bar]`` where B-bar complements B inside every covered block.
K-means on ``B~`` with the distance ``sum_j b~_j log(b~_j / m~_j)`` has the
cluster objective ``sum_k n_k HL(C_k)``, HL being the summed binary entropy
of the cluster's column means over B.  The engine works on the B half only:
for a covered block with 1 at column ``c`` the cost is
``-log m_c - sum_{j != c} log(1 - m_j)``.

K + 1 clusters are fitted; the one with the largest per-point Holoentropy
is returned as the outlier set.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from ._lloyd import run_restarts
from ._models import BlockModel, block_sums
from .core import MISSING, BinaryCoding, ConsensusOutcome, Partition, as_bps, encode_binary, relabel_compact
from .errors import AllMissingPoint, ConfigError

EPS = 1e-6


@dataclass(frozen=True)
class AugmentedCoding:
    """Dense ``n x 2d`` matrix ``[B | B-bar]``; missing blocks are zero in both halves."""

    values: np.ndarray
    widths: np.ndarray

    @property
    def d(self):
        return int(self.widths.sum())


def augment_flip(coding):
    if not isinstance(coding, BinaryCoding):
        coding = encode_binary(as_bps(coding))
    B = coding.toarray()
    covered_cols = coding.covered[:, coding.block_of]
    flipped = np.where(covered_cols, 1 - B, 0)
    return AugmentedCoding(np.hstack([B, flipped]), np.asarray(coding.widths))


def binary_entropy(p):
    p = np.asarray(p, dtype=np.float64)
    return -(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p))


def holoentropy(rows):
    """Sum over columns of the binary entropy of the column means (nats)."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("holoentropy needs a non-empty 2-d block of rows")
    return float(binary_entropy(rows.mean(axis=0)).sum())


def flip_kl_objective(aug, labels):
    """Unsmoothed sum_k sum_{l in C_k} sum_j b~ log(b~ / m~) on the dense B~.

    Centroid coordinates average over the rows that cover the column's block.
    """
    A = aug.values.astype(np.float64) if isinstance(aug, AugmentedCoding) else np.asarray(aug, dtype=np.float64)
    d = A.shape[1] // 2
    # a column pair is covered iff exactly one of (b, b-bar) is set
    cov = np.tile(A[:, :d] + A[:, d:], 2)
    labels = np.asarray(labels)
    total = 0.0
    for k in np.unique(labels):
        rows = A[labels == k]
        n_cov = cov[labels == k].sum(axis=0)
        m = np.divide(rows.sum(axis=0), n_cov, out=np.zeros(2 * d), where=n_cov > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            total += float((xlogy(rows, rows) - xlogy(rows, m[None, :])).sum())
    return total


def holoentropy_objective(coding, labels):
    """sum_k sum_j n_{k,block(j)} H2(m_kj) with column means over covered rows.

    For complete codings this is ``sum_k n_k HL(C_k)``.
    """
    if not isinstance(coding, BinaryCoding):
        coding = encode_binary(as_bps(coding))
    B = coding.toarray().astype(np.float64)
    cov = coding.covered[:, coding.block_of].astype(np.float64)
    labels = np.asarray(labels)
    total = 0.0
    for k in np.unique(labels):
        h = labels == k
        n_cov = cov[h].sum(axis=0)
        m = np.divide(B[h].sum(axis=0), n_cov, out=np.zeros(coding.d), where=n_cov > 0)
        total += float((n_cov * binary_entropy(m)).sum())
    return total


def flip_table(m, coding, eps=EPS):
    ms = (m + eps) / (1.0 + 2.0 * eps)
    log1m = np.log1p(-ms)
    return -np.log(ms) + log1m - block_sums(log1m, coding.offsets)[:, coding.block_of]


class FlipModel(BlockModel):
    """KL K-means on ``B~`` seeded with one background center at the global
    column means.

    Plain k-means++ gives every incoherent point its own seed, so scattered
    outliers end up as singletons next to a merged pair of real clusters.
    The background center is the maximum-entropy centroid and is the cheapest
    home for points that fit no cluster.
    """

    def __init__(self, coding, eps=EPS):
        super().__init__(coding, lambda m, c: flip_table(m, c, eps))

    def background_center(self):
        return self.prior[None, :].copy()


def cor_fuse(bps, K, seed=0, restarts=10, max_iter=100, eps=EPS, n_jobs=None):
    """Joint consensus clustering and outlier detection.

    Returns a partition with ``K`` clusters where outliers are MISSING, and
    their indices in ``outliers``.
    """
    if K < 2:
        raise ConfigError("K must be >= 2")
    bps = as_bps(bps)
    coding = encode_binary(bps)
    if np.any(~coding.covered.any(axis=1)):
        raise AllMissingPoint("a point is missing from every basic partition")
    if K + 1 > coding.n:
        raise ConfigError(f"K + 1 = {K + 1} clusters need at least that many points")
    model = FlipModel(coding, eps)
    fit = run_restarts(model, K + 1, seed, restarts, max_iter, n_jobs)
    labels = fit.labels
    outlier_k = _outlier_cluster(coding, labels, K + 1)
    out_mask = labels == outlier_k
    final = np.where(out_mask, MISSING, labels)
    return ConsensusOutcome(
        Partition(relabel_compact(final), K),
        tuple(fit.trace),
        np.flatnonzero(out_mask),
        seed,
        fit.n_iter,
        fit.restart,
    )


def cluster_holoentropies(coding, labels, K):
    """Per-point Holoentropy of each cluster (column means over covered rows)."""
    B = coding.toarray().astype(np.float64)
    cov = coding.covered[:, coding.block_of].astype(np.float64)
    out = np.zeros(K)
    for k in range(K):
        h = labels == k
        n_cov = cov[h].sum(axis=0)
        m = np.divide(B[h].sum(axis=0), n_cov, out=np.zeros(coding.d), where=n_cov > 0)
        out[k] = binary_entropy(m).sum()
    return out


def _outlier_cluster(coding, labels, K):
    """Largest Holoentropy wins; near-ties go to the smaller cluster, then lower id."""
    hl = cluster_holoentropies(coding, labels, K)
    sizes = np.bincount(labels, minlength=K)
    top = np.flatnonzero(hl >= hl.max() - 1e-12)
    return int(min(top, key=lambda k: (sizes[k], k)))
