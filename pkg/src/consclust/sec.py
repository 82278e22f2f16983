"""Spectral ensemble clustering on the co-association graph.

Two routes to the same normalised-cut objective:

* dense: top-K eigenvectors of ``D^-1/2 S D^-1/2`` followed by K-means
  (cubic time, used as the reference path);
* sparse: weighted K-means on rows ``b_l / w_l`` with weights ``w_l``,
  which never materialises ``S``.

For any discrete partition the weighted K-means objective plus the trace
term equals ``sum_l |b_l|^2 / w_l``, a constant of the ensemble.
"""
import numpy as np
from scipy.linalg import eigh

from ._lloyd import run_restarts
from ._models import EuclideanModel, SecModel
from .core import ConsensusOutcome, Partition, as_bps, build_coassociation, check_dense, degree_weights, encode_binary
from .errors import AllMissingPoint, ConfigError, DisconnectedDegree, ZeroWeight


def normalized_coassociation(S):
    """``D^-1/2 S D^-1/2`` for a co-association matrix with positive degrees."""
    S = np.asarray(S, dtype=np.float64)
    deg = S.sum(axis=1)
    if np.any(deg <= 0):
        raise DisconnectedDegree("a point has zero degree in the co-association graph")
    s = 1.0 / np.sqrt(deg)
    return S * s[:, None] * s[None, :]


def spectral_embedding(S, K):
    """Top-K eigenpairs of the normalised co-association, eigenvalues descending."""
    A = normalized_coassociation(S)
    n = A.shape[0]
    vals, vecs = eigh(A, subset_by_index=[n - K, n - 1])
    return vecs[:, ::-1], vals[::-1]


def trace_value(S, labels):
    """tr(Z' D^-1/2 S D^-1/2 Z) for the scaled indicator Z of ``labels``.

    Equals ``sum_k (h_k' S h_k) / (h_k' D h_k)``.
    """
    S = np.asarray(S, dtype=np.float64)
    labels = np.asarray(labels.labels if isinstance(labels, Partition) else labels)
    deg = S.sum(axis=1)
    total = 0.0
    for k in np.unique(labels):
        h = labels == k
        total += S[np.ix_(h, h)].sum() / deg[h].sum()
    return float(total)


def sparse_trace_value(bps, labels):
    """Same trace term from the binary coding, in O(n r) memory."""
    coding = encode_binary(as_bps(bps))
    w = degree_weights(bps)
    labels = np.asarray(labels.labels if isinstance(labels, Partition) else labels)
    total = 0.0
    for k in np.unique(labels):
        h = labels == k
        cols = coding.cols[h]
        counts = np.bincount(cols[cols >= 0], minlength=coding.d).astype(float)
        total += (counts @ counts) / w[h].sum()
    return float(total)


def weighted_objective(bps, labels):
    """sum_l w_l ||b_l / w_l - m_k||^2 with m_k = sum b_l / sum w_l."""
    coding = encode_binary(as_bps(bps))
    w = degree_weights(bps)
    labels = np.asarray(labels.labels if isinstance(labels, Partition) else labels, dtype=np.int64)
    model = SecModel(coding, w)
    D = model.costs(model.fit_centers(labels, int(labels.max()) + 1))
    return float(D[np.arange(labels.size), labels].sum())


def weighted_kmeans(Q, weights, K, seed=0, restarts=10, max_iter=100, n_jobs=None):
    """Lloyd iterations with weighted centroids on dense rows ``Q``."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0):
        raise ZeroWeight("weights must be positive")
    fit = run_restarts(EuclideanModel(Q, weights=w), K, seed, restarts, max_iter, n_jobs)
    return ConsensusOutcome(Partition(fit.labels, K), tuple(fit.trace), None, seed, fit.n_iter, fit.restart)


def sec_fuse_sparse(bps, K, seed=0, restarts=10, max_iter=100, n_jobs=None):
    """Spectral ensemble clustering as weighted K-means on ``b_l / w_l``."""
    if K < 2:
        raise ConfigError("K must be >= 2")
    bps = as_bps(bps)
    if np.any(bps.coverage() == 0):
        raise AllMissingPoint("a point is missing from every basic partition")
    coding = encode_binary(bps)
    w = degree_weights(bps)
    fit = run_restarts(SecModel(coding, w), K, seed, restarts, max_iter, n_jobs)
    return ConsensusOutcome(Partition(fit.labels, K), tuple(fit.trace), None, seed, fit.n_iter, fit.restart)


def sec_fuse_dense(bps, K, seed=0, restarts=10, max_iter=100, normalize_rows=False, dense_cap=None, n_jobs=None):
    """K-means on the top-K eigenvectors of the normalised co-association."""
    if K < 2:
        raise ConfigError("K must be >= 2")
    bps = as_bps(bps)
    check_dense(bps.n, dense_cap)
    Z, _ = spectral_embedding(build_coassociation(bps, dense_cap), K)
    if normalize_rows:
        Z = Z / np.maximum(np.linalg.norm(Z, axis=1, keepdims=True), 1e-300)
    fit = run_restarts(EuclideanModel(Z), K, seed, restarts, max_iter, n_jobs)
    return ConsensusOutcome(Partition(fit.labels, K), tuple(fit.trace), None, seed, fit.n_iter, fit.restart)
