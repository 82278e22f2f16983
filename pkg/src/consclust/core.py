"""Partitions, basic-partition ensembles and their two summaries.

Labels are 0-based inside the package with ``MISSING = -1``.  Files and the
CLI use 1-based labels with 0 for missing; convert with
:meth:`Partition.from_file_labels` / :meth:`Partition.to_file_labels`.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import DenseCapExceeded, InvalidPartition, ZeroWeight

MISSING = -1
DENSE_CAP = 5000


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Partition:
    """Cluster labels of ``n`` points; ``labels[l]`` in ``0..k-1`` or MISSING."""

    labels: np.ndarray
    k: Optional[int] = None

    def __post_init__(self):
        labels = _frozen(self.labels, np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise InvalidPartition("partition needs a non-empty 1-d label vector")
        present = labels[labels != MISSING]
        if present.size == 0:
            raise InvalidPartition("partition has no non-missing label")
        if present.min() < 0:
            raise InvalidPartition(f"label {present.min()} is neither a cluster id nor MISSING")
        k = int(present.max()) + 1 if self.k is None else int(self.k)
        if k < 1 or present.max() >= k:
            raise InvalidPartition(f"labels exceed declared k={k}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_file_labels(cls, values, k=None):
        """Build from 1-based labels where 0 marks missing / outlier."""
        v = np.asarray(values, dtype=np.int64)
        if v.size and v.min() < 0:
            raise InvalidPartition("file labels must be >= 0")
        return cls(v - 1, k)

    def to_file_labels(self):
        return self.labels + 1

    @property
    def n(self):
        return self.labels.size

    @property
    def observed(self):
        return self.labels != MISSING

    def sizes(self):
        return np.bincount(self.labels[self.observed], minlength=self.k)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.k, self.labels.tobytes()))


@dataclass(frozen=True)
class BasicPartitionSet:
    """``r`` basic partitions over the same ``n`` points, stored column-wise.

    ``labels[:, i]`` holds partition ``i`` (0-based, MISSING = -1) and
    ``ks[i]`` its declared cluster count.
    """

    labels: np.ndarray
    ks: tuple

    def __post_init__(self):
        labels = _frozen(self.labels, np.int64)
        if labels.ndim != 2 or labels.shape[0] == 0 or labels.shape[1] == 0:
            raise InvalidPartition("need an n x r label matrix with n, r >= 1")
        ks = tuple(int(k) for k in self.ks)
        if len(ks) != labels.shape[1]:
            raise InvalidPartition("one declared k per basic partition")
        for i, k in enumerate(ks):
            Partition(labels[:, i], k)  # validates column i
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ks", ks)

    @classmethod
    def from_partitions(cls, partitions: Sequence[Partition]):
        partitions = list(partitions)
        if not partitions:
            raise InvalidPartition("need at least one basic partition")
        n = partitions[0].n
        if any(p.n != n for p in partitions):
            raise InvalidPartition("basic partitions differ in length")
        return cls(np.column_stack([p.labels for p in partitions]), tuple(p.k for p in partitions))

    @classmethod
    def from_file_matrix(cls, values, ks=None):
        """From an n x r matrix of 1-based labels with 0 = missing."""
        v = np.asarray(values, dtype=np.int64)
        if v.ndim != 2:
            raise InvalidPartition("basic-partition matrix must be 2-d")
        if ks is None:
            ks = tuple(int(max(c.max(), 1)) for c in v.T)
        return cls(v - 1, ks)

    def to_file_matrix(self):
        return self.labels + 1

    @property
    def n(self):
        return self.labels.shape[0]

    @property
    def r(self):
        return self.labels.shape[1]

    @property
    def partitions(self):
        return [Partition(self.labels[:, i], k) for i, k in enumerate(self.ks)]

    def coverage(self):
        """Number of basic partitions that label each point."""
        return (self.labels != MISSING).sum(axis=1)

    def __getitem__(self, i):
        return Partition(self.labels[:, i], self.ks[i])

    def __len__(self):
        return self.r


def as_bps(obj):
    if isinstance(obj, BasicPartitionSet):
        return obj
    if isinstance(obj, Partition):
        return BasicPartitionSet.from_partitions([obj])
    return BasicPartitionSet.from_partitions(obj)


@dataclass(frozen=True)
class BinaryCoding:
    """Block 1-of-K_i coding of an ensemble, kept in column-index form.

    ``cols[l, i]`` is the global column of the 1 in block ``i`` of row ``l``
    (``offsets[i] + label``), or -1 for an all-zero (missing) block.
    """

    cols: np.ndarray
    widths: np.ndarray
    offsets: np.ndarray = field(init=False)
    block_of: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cols", _frozen(self.cols, np.int64))
        widths = _frozen(self.widths, np.int64)
        object.__setattr__(self, "widths", widths)
        offsets = np.concatenate([[0], np.cumsum(widths)[:-1]])
        object.__setattr__(self, "offsets", _frozen(offsets, np.int64))
        object.__setattr__(self, "block_of", _frozen(np.repeat(np.arange(widths.size), widths), np.int64))

    @property
    def n(self):
        return self.cols.shape[0]

    @property
    def r(self):
        return self.cols.shape[1]

    @property
    def d(self):
        return int(self.widths.sum())

    @property
    def covered(self):
        return self.cols >= 0

    @property
    def nnz(self):
        return int(self.covered.sum())

    def tocsr(self):
        rows, blocks = np.nonzero(self.covered)
        data = np.ones(rows.size, dtype=np.int64)
        return sp.csr_matrix((data, (rows, self.cols[rows, blocks])), shape=(self.n, self.d))

    def toarray(self):
        B = np.zeros((self.n, self.d), dtype=np.int64)
        rows, blocks = np.nonzero(self.covered)
        B[rows, self.cols[rows, blocks]] = 1
        return B


def encode_binary(bps):
    """Concatenated 1-of-K_i coding of every basic partition."""
    bps = as_bps(bps)
    widths = np.asarray(bps.ks, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(widths)[:-1]])
    cols = np.where(bps.labels == MISSING, -1, bps.labels + offsets[None, :])
    return BinaryCoding(cols, widths)


def check_dense(n, dense_cap=None):
    cap = DENSE_CAP if dense_cap is None else dense_cap
    if n > cap:
        raise DenseCapExceeded(f"n={n} exceeds the dense cap of {cap}; use a sparse method")


def build_coassociation(bps, dense_cap=None):
    """Co-association counts ``S[x, y] = #{i : pi_i(x) == pi_i(y) != MISSING}``.

    Returns a read-only symmetric int64 array.  Counted directly from the
    labels, so it can be checked against ``B @ B.T``.
    """
    bps = as_bps(bps)
    check_dense(bps.n, dense_cap)
    S = kernels.coassoc(np.ascontiguousarray(bps.labels))
    S.setflags(write=False)
    return S


def degree_weights(bps):
    """Row sums of the co-association matrix, without building it.

    ``w[l]`` is the summed size of the clusters containing ``x_l`` over the
    basic partitions that label ``x_l``.
    """
    bps = as_bps(bps)
    w = np.zeros(bps.n)
    for i, k in enumerate(bps.ks):
        col = bps.labels[:, i]
        obs = col != MISSING
        sizes = np.bincount(col[obs], minlength=k)
        w[obs] += sizes[col[obs]]
    if np.any(w <= 0):
        bad = np.flatnonzero(w <= 0)
        raise ZeroWeight(f"points {bad[:10].tolist()} are missing from every basic partition")
    return w


@dataclass(frozen=True)
class ConsensusOutcome:
    """Result of a fusion run."""

    partition: Partition
    objective_trace: tuple
    outliers: Optional[np.ndarray] = None
    seed: Optional[int] = None
    n_iter: int = 0
    restart: int = 0

    @property
    def objective(self):
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    @property
    def labels(self):
        return self.partition.labels


def relabel_compact(labels):
    """Map used labels onto 0..m-1 in order of first appearance; keeps MISSING."""
    labels = np.asarray(labels, dtype=np.int64)
    out = np.full(labels.shape, MISSING, dtype=np.int64)
    obs = labels != MISSING
    _, first, inv = np.unique(labels[obs], return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    out[obs] = order[inv]
    return out
