"""K-means-based consensus clustering over the binary coding.

Maximising a utility sum  sum_i U(pi, pi_i)  is solved as K-means on the
binary coding with the distance paired to the utility:

=====  =========================  ==========================================
kind   mu(m)                      per-block distance f(b, m)
=====  =========================  ==========================================
uc     ||m||_2^2                  ||b - m||_2^2
uh     -H(m)                      KL(b || m)  (m epsilon-smoothed)
ucos   ||m||_2                    1 - cos(b, m)
ulp    ||m||_p                    1 - sum_j b_j m_j^(p-1) / ||m||_p^(p-1)
=====  =========================  ==========================================

Missing blocks contribute nothing to distances and are left out of the
per-block centroid denominators.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from ._lloyd import run_restarts
from ._models import BlockModel, EuclideanModel, block_sums
from .core import (
    MISSING,
    BinaryCoding,
    ConsensusOutcome,
    Partition,
    as_bps,
    encode_binary,
)
from .errors import AllMissingPoint, ConfigError, DegenerateCluster, NoOverlap
from .generate import _values, standardize

KINDS = ("uc", "uh", "ucos", "ulp")


@dataclass(frozen=True)
class UtilityKind:
    name: str = "uc"
    p: float = 2.0
    eps: float = 1e-6

    def __post_init__(self):
        if self.name not in KINDS:
            raise ConfigError(f"utility must be one of {KINDS}, got {self.name!r}")
        if self.name == "ulp" and not self.p > 1:
            raise ConfigError("ulp needs p > 1")
        if not 0 < self.eps <= 1e-3:
            raise ConfigError("smoothing eps must lie in (0, 1e-3]")

    @classmethod
    def parse(cls, text):
        """Parse the CLI form: ``uc``, ``uh``, ``ucos`` or ``ulp:<p>``."""
        if isinstance(text, cls):
            return text
        name, _, arg = str(text).strip().lower().partition(":")
        if name == "ulp":
            try:
                return cls("ulp", p=float(arg) if arg else 2.0)
            except ValueError:
                raise ConfigError(f"bad ulp exponent in {text!r}") from None
        if arg:
            raise ConfigError(f"utility {name!r} takes no argument")
        return cls(name)

    def __str__(self):
        return f"ulp:{self.p:g}" if self.name == "ulp" else self.name


def _kind(kind):
    return UtilityKind.parse(kind) if not isinstance(kind, UtilityKind) else kind


def mu(m, kind):
    """The convex function behind each utility, along the last axis."""
    kind = _kind(kind)
    m = np.asarray(m, dtype=np.float64)
    if kind.name == "uc":
        return (m * m).sum(axis=-1)
    if kind.name == "uh":
        return xlogy(m, m).sum(axis=-1)
    if kind.name == "ucos":
        return np.sqrt((m * m).sum(axis=-1))
    return (m ** kind.p).sum(axis=-1) ** (1.0 / kind.p)


def contingency(a, b):
    """Counts table over points labelled in both partitions."""
    a = a.labels if isinstance(a, Partition) else np.asarray(a)
    b = b.labels if isinstance(b, Partition) else np.asarray(b)
    both = (a != MISSING) & (b != MISSING)
    if not both.any():
        raise NoOverlap("partitions share no labelled point")
    ai, bi = a[both], b[both]
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1.0)
    return table


def utility(pi, pi_i, kind="uc", strict=False):
    """U_mu(pi, pi_i) = sum_k p_k+ mu(m_k,i) - mu(P^(i)).

    Only clusters of ``pi`` that are non-empty on the overlap contribute.
    With ``strict=True`` a ``pi`` declaring more clusters than it uses
    raises DegenerateCluster instead.
    """
    kind = _kind(kind)
    if strict and isinstance(pi, Partition) and pi.k is not None:
        used = np.unique(pi.labels[pi.observed]).size
        if used < pi.k:
            raise DegenerateCluster(f"partition declares {pi.k} clusters but uses {used}")
    N = contingency(pi, pi_i)
    N = N[N.sum(axis=1) > 0]
    total = N.sum()
    pk = N.sum(axis=1) / total
    m = N / N.sum(axis=1, keepdims=True)
    P = N.sum(axis=0) / total
    return float((pk * mu(m, kind)).sum() - mu(P, kind))


def categorical_utility(pi, pi_i):
    """Category utility from the contingency table (the uc special case)."""
    N = contingency(pi, pi_i)
    p = N / N.sum()
    pk = p.sum(axis=1)
    keep = pk > 0
    within = ((p[keep] / pk[keep, None]) ** 2).sum(axis=1)
    return float((pk[keep] * within).sum() - (p.sum(axis=0) ** 2).sum())


def kcc_distance(b, m, widths, kind="uc", smooth=True):
    """Utility-induced distance between a binary row ``b`` and a centroid ``m``.

    Written block by block straight from the definitions; all-zero blocks
    of ``b`` (missing labels) are skipped.  ``smooth=False`` drops the
    entropy smoothing.
    """
    kind = _kind(kind)
    b = np.asarray(b, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    total = 0.0
    lo = 0
    for w in widths:
        bb, mm = b[lo:lo + w], m[lo:lo + w]
        lo += w
        if bb.sum() == 0:
            continue
        if kind.name == "uc":
            total += ((bb - mm) ** 2).sum()
        elif kind.name == "uh":
            ms = (mm + kind.eps) / (1.0 + w * kind.eps) if smooth else mm
            total += (xlogy(bb, bb) - xlogy(bb, ms)).sum()
        elif kind.name == "ucos":
            total += 1.0 - bb @ mm / (np.linalg.norm(bb) * np.linalg.norm(mm))
        else:
            p = kind.p
            norm = (mm ** p).sum() ** (1.0 / p)
            total += 1.0 - (bb * mm ** (p - 1)).sum() / norm ** (p - 1)
    return float(total)


def distance_table(m, coding, kind, smooth=True):
    """Per-column block cost for every centroid: ``table[k, c]`` is the cost
    of the block holding column ``c`` when the point's 1 is at ``c``."""
    kind = _kind(kind)
    off = coding.offsets
    blk = coding.block_of
    if kind.name == "uc":
        return 1.0 - 2.0 * m + block_sums(m * m, off)[:, blk]
    if kind.name == "uh":
        if smooth:
            widths = coding.widths[blk]
            m = (m + kind.eps) / (1.0 + widths * kind.eps)
        with np.errstate(divide="ignore"):
            return -np.log(m)
    if kind.name == "ucos":
        return 1.0 - m / np.sqrt(block_sums(m * m, off))[:, blk]
    p = kind.p
    norm = block_sums(m ** p, off) ** (1.0 / p)
    return 1.0 - m ** (p - 1) / (norm ** (p - 1))[:, blk]


def _coding(bps_or_coding):
    if isinstance(bps_or_coding, BinaryCoding):
        return bps_or_coding
    return encode_binary(as_bps(bps_or_coding))


def _check_covered(coding):
    bad = np.flatnonzero(~coding.covered.any(axis=1))
    if bad.size:
        raise AllMissingPoint(f"points {bad[:10].tolist()} are missing from every basic partition")


def _model(coding, kind, weights=None, smooth=True):
    kind = _kind(kind)
    return BlockModel(coding, lambda m, c: distance_table(m, c, kind, smooth), weights)


def kcc_objective(bps_or_coding, labels, kind="uc", weights=None, smooth=True):
    """K-means objective of a fixed assignment, centroids = block means."""
    coding = _coding(bps_or_coding)
    labels = np.asarray(labels.labels if isinstance(labels, Partition) else labels, dtype=np.int64)
    K = int(labels.max()) + 1
    model = _model(coding, kind, weights, smooth)
    with np.errstate(invalid="ignore"):
        D = model.costs(model.fit_centers(labels, K))
    return float(D[np.arange(labels.size), labels].sum())


def kcc_fuse(bps, K, kind="uc", seed=0, restarts=10, max_iter=100, weights=None, n_jobs=None):
    """Consensus partition maximising sum_i U(pi, pi_i) via K-means on B."""
    if K < 2:
        raise ConfigError("K must be >= 2")
    coding = _coding(bps)
    _check_covered(coding)
    fit = run_restarts(_model(coding, kind, weights), K, seed, restarts, max_iter, n_jobs)
    return ConsensusOutcome(Partition(fit.labels, K), tuple(fit.trace), None, seed, fit.n_iter, fit.restart)


def constrained_fuse(X, P, K, lam, seed=0, restarts=10, max_iter=100, standardize_x=True, n_jobs=None):
    """K-means on ``[X | sqrt(lam) * onehot(P)]`` with unlabelled rows masked.

    Minimises SSE(X; H) - lam * n * U_c(H o M, P) up to a constant: the
    categorical term pulls labelled points towards clusters that agree
    with the side information ``P`` (MISSING where none is available).
    With ``lam == 0`` this is exactly ``base_kmeans`` on the same matrix.
    """
    if lam < 0:
        raise ConfigError("lam must be >= 0")
    Xv = _values(X)
    if standardize_x:
        Xv = standardize(Xv)
    P = P if isinstance(P, Partition) else Partition(P)
    if P.n != Xv.shape[0]:
        raise ConfigError("side information length differs from the data")
    model = EuclideanModel(Xv, side_labels=P.labels, n_side=P.k, lam=lam)
    fit = run_restarts(model, K, seed, restarts, max_iter, n_jobs)
    return ConsensusOutcome(Partition(fit.labels, K), tuple(fit.trace), None, seed, fit.n_iter, fit.restart)
