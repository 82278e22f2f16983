"""Graph-side consumers of the co-association matrix."""
import numpy as np

from . import kernels
from .core import Partition, check_dense, relabel_compact
from .errors import ConfigError, ShapeMismatch

ACTIVATIONS = {
    "none": lambda z: z,
    "relu": lambda z: np.maximum(z, 0.0),
    "sigmoid": lambda z: 1.0 / (1.0 + np.exp(-z)),
}


def hac_consensus(S, K, linkage="average", dense_cap=None):
    """Agglomerative consensus on co-association similarities.

    Repeatedly merges the most similar pair of groups (average or single
    linkage on similarity) until ``K`` remain.  Ties go to the smallest
    pair of indices.  Output labels are numbered by first appearance.
    """
    S = np.asarray(S)
    n = S.shape[0]
    check_dense(n, dense_cap)
    if S.shape != (n, n):
        raise ShapeMismatch("co-association matrix must be square")
    if not 1 <= K <= n:
        raise ConfigError(f"K must lie in 1..{n}")
    if linkage not in ("average", "single"):
        raise ConfigError("linkage must be 'average' or 'single'")
    parent = kernels.agglomerate(np.ascontiguousarray(S, dtype=np.float64), int(K), linkage == "single")
    roots = np.asarray(parent).copy()
    while True:
        nxt = roots[roots]
        if np.array_equal(nxt, roots):
            break
        roots = nxt
    return Partition(relabel_compact(roots), K)


def propagation_operator(S):
    """``D^-1/2 (I + S) D^-1/2`` with D the row sums of ``I + S``."""
    S = np.asarray(S, dtype=np.float64)
    A = S + np.eye(S.shape[0])
    d = 1.0 / np.sqrt(A.sum(axis=1))
    return A * d[:, None] * d[None, :]


def consensus_propagate(S, X, weights, activation="relu"):
    """Forward pass Z <- phi(A Z W_l) over the weight stack, Z starting at X.

    Weights are supplied, never trained.
    """
    if activation not in ACTIVATIONS:
        raise ConfigError(f"activation must be one of {sorted(ACTIVATIONS)}")
    S = np.asarray(S, dtype=np.float64)
    Z = np.asarray(X, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if S.shape != (Z.shape[0], Z.shape[0]):
        raise ShapeMismatch(f"graph is {S.shape} but X has {Z.shape[0]} rows")
    A = propagation_operator(S)
    phi = ACTIVATIONS[activation]
    for depth, W in enumerate(weights):
        W = np.asarray(W, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] != Z.shape[1]:
            raise ShapeMismatch(f"layer {depth}: weight has {W.shape} but input width is {Z.shape[1]}")
        Z = phi(A @ Z @ W)
    return Z
