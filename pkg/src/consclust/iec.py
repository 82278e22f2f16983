"""Infinite ensemble clustering: marginalised dropout denoising of the
binary coding, then K-means on the denoised representation.

With ``B_aug = [B | 1]`` and scatter ``Sigma = B_aug' B_aug``, dropout level
``s`` on the coding columns (never on the bias) gives keep-probabilities
``v = [1-s, ..., 1-s, 1]`` and the expected statistics

    E[U]_ij = Sigma_ij v_j
    E[V]_ij = Sigma_ij v_i v_j   (i != j),   Sigma_ii v_i   (i == j)

The linear map is ``W = E[U] (E[V] + ridge I)^-1`` and the representation
is ``Q = B_aug W'``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._lloyd import run_restarts
from ._models import EuclideanModel
from .core import BinaryCoding, ConsensusOutcome, Partition, as_bps, encode_binary
from .errors import ConfigError, SingularSystem


@dataclass(frozen=True)
class MarginalizedMap:
    W: np.ndarray
    dropout: float
    ridge: float
    EU: np.ndarray
    EV: np.ndarray


def augmented(coding):
    B = coding.toarray().astype(np.float64)
    return np.hstack([B, np.ones((B.shape[0], 1))])


def expected_scatter(B_aug, s):
    """E[U] and E[V] under dropout ``s`` on all but the last column."""
    Sigma = B_aug.T @ B_aug
    v = np.full(Sigma.shape[0], 1.0 - s)
    v[-1] = 1.0
    EU = Sigma * v[None, :]
    EV = Sigma * np.outer(v, v)
    np.fill_diagonal(EV, np.diag(Sigma) * v)
    return EU, EV


def marginalized_map(coding, s=0.2, ridge=1e-5):
    if not 0 <= s < 1:
        raise ConfigError("dropout level must lie in [0, 1)")
    if ridge < 0:
        raise ConfigError("ridge must be >= 0")
    if not isinstance(coding, BinaryCoding):
        coding = encode_binary(as_bps(coding))
    if coding.n == 0:
        raise ConfigError("empty coding")
    EU, EV = expected_scatter(augmented(coding), s)
    A = EV + ridge * np.eye(EV.shape[0])
    if ridge == 0 and np.linalg.matrix_rank(A) < A.shape[0]:
        raise SingularSystem("E[V] is singular; use ridge > 0")
    try:
        # W A = EU  <=>  A W' = EU'  (A symmetric)
        W = scipy.linalg.solve(A, EU.T, assume_a="sym").T
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystem(str(exc)) from exc
    return MarginalizedMap(W, s, ridge, EU, EV)


def marginalized_representation(coding, s=0.2, ridge=1e-5, drop_bias=False):
    if not isinstance(coding, BinaryCoding):
        coding = encode_binary(as_bps(coding))
    mm = marginalized_map(coding, s, ridge)
    Q = augmented(coding) @ mm.W.T
    return Q[:, :-1] if drop_bias else Q


def iec_fuse(bps, K, s=0.2, ridge=1e-5, seed=0, restarts=10, max_iter=100, drop_bias=False, n_jobs=None):
    """K-means on the marginalised representation ``Q = B_aug W'``."""
    if K < 2:
        raise ConfigError("K must be >= 2")
    Q = marginalized_representation(encode_binary(as_bps(bps)), s, ridge, drop_bias)
    fit = run_restarts(EuclideanModel(Q), K, seed, restarts, max_iter, n_jobs)
    return ConsensusOutcome(Partition(fit.labels, K), tuple(fit.trace), None, seed, fit.n_iter, fit.restart)
