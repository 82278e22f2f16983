"""Basic-partition generation from a raw feature matrix.

Three strategies are offered: random K per run (RPS), random feature
subsets (RFS) and random row subsets giving incomplete partitions
(SUBSAMPLE).  Every run is seeded by ``subseed(cfg.seed, i)`` so the
ensemble does not depend on ``n_jobs``.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._lloyd import default_threads, run_restarts, subseed
from ._models import EuclideanModel
from .core import MISSING, BasicPartitionSet, Partition
from .errors import ConfigError, KTooLarge

STRATEGIES = ("rps", "rfs", "subsample")


@dataclass(frozen=True)
class DataMatrix:
    """Feature matrix plus an optional held-out truth partition."""

    values: np.ndarray
    truth: Optional[Partition] = None

    def __post_init__(self):
        X = np.array(self.values, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
            raise ValueError("data matrix needs n >= 2 rows and at least one column")
        if not np.all(np.isfinite(X)):
            raise ValueError("data matrix has non-finite entries")
        X.setflags(write=False)
        object.__setattr__(self, "values", X)

    @property
    def n(self):
        return self.values.shape[0]


def _values(X):
    return X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=np.float64)


def standardize(X):
    """Column z-scores; constant columns are centred only."""
    X = _values(X)
    sd = X.std(axis=0)
    return (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


@dataclass(frozen=True)
class GenerationConfig:
    strategy: str = "rps"
    r: int = 100
    k_range: Optional[tuple] = None  # None -> (2, ceil(sqrt(n)))
    feature_fraction: float = 0.5
    row_fraction: float = 0.5
    fixed_k: Optional[int] = None
    seed: int = 0
    max_iter: int = 100
    restarts: int = 1
    standardize: bool = True

    def validate(self, n=None, n_features=None):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.r < 1:
            raise ConfigError("r must be >= 1")
        if self.max_iter < 1 or self.restarts < 1:
            raise ConfigError("max_iter and restarts must be >= 1")
        if not 0 < self.feature_fraction <= 1 or not 0 < self.row_fraction <= 1:
            raise ConfigError("fractions must lie in (0, 1]")
        if self.strategy == "rps":
            lo, hi = self.resolved_k_range(n)
            if lo < 2 or hi < lo:
                raise ConfigError(f"k_range must satisfy 2 <= lo <= hi, got ({lo}, {hi})")
        else:
            if self.fixed_k is None or self.fixed_k < 1:
                raise ConfigError(f"strategy {self.strategy} needs fixed_k >= 1")
            if self.strategy == "subsample" and n is not None and math.ceil(self.row_fraction * n) < self.fixed_k:
                raise ConfigError("row sample is smaller than fixed_k")
        return self

    def resolved_k_range(self, n=None):
        if self.k_range is not None:
            return int(self.k_range[0]), int(self.k_range[1])
        if n is None:
            raise ConfigError("k_range defaults to [2, ceil(sqrt(n))] and needs n")
        return 2, max(2, math.ceil(math.sqrt(n)))


def sse(X, labels):
    """Within-cluster sum of squared distances to cluster means."""
    X = _values(X)
    labels = np.asarray(labels)
    total = 0.0
    for k in np.unique(labels):
        Z = X[labels == k]
        total += float(((Z - Z.mean(axis=0)) ** 2).sum())
    return total


def kmeans_fit(X, k, seed=0, max_iter=100, restarts=10, n_jobs=1):
    """Lloyd K-means with k-means++ seeding; returns the best LloydFit."""
    X = _values(X)
    if k > X.shape[0]:
        raise KTooLarge(f"k={k} exceeds n={X.shape[0]}")
    return run_restarts(EuclideanModel(X), k, seed, restarts, max_iter, n_jobs)


def base_kmeans(X, k, seed=0, max_iter=100, restarts=10, n_jobs=1):
    """Squared-Euclidean K-means, best of ``restarts`` by SSE."""
    fit = kmeans_fit(X, k, seed, max_iter, restarts, n_jobs)
    return Partition(fit.labels, k)


def _run_all(jobs, n_jobs):
    n_jobs = default_threads() if n_jobs is None else n_jobs
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(lambda f: f(), jobs))
    return [f() for f in jobs]


def _prepare(X, cfg):
    X = _values(X)
    cfg.validate(X.shape[0], X.shape[1])
    return standardize(X) if cfg.standardize else X


def generate_rps(X, cfg, n_jobs=None):
    """K drawn uniformly from ``k_range`` for each basic partition."""
    X = _prepare(X, replace(cfg, strategy="rps"))
    lo, hi = cfg.resolved_k_range(X.shape[0])
    if hi > X.shape[0]:
        raise KTooLarge(f"k_range upper bound {hi} exceeds n={X.shape[0]}")

    def job(i):
        s = subseed(cfg.seed, i)
        k = int(np.random.default_rng(s).integers(lo, hi + 1))
        return lambda: base_kmeans(X, k, s, cfg.max_iter, cfg.restarts)

    return BasicPartitionSet.from_partitions(_run_all([job(i) for i in range(cfg.r)], n_jobs))


def generate_rfs(X, cfg, n_jobs=None):
    """Fixed K on a random feature subset (without replacement) per run."""
    X = _prepare(X, replace(cfg, strategy="rfs"))
    m = max(1, math.ceil(cfg.feature_fraction * X.shape[1]))

    def job(i):
        s = subseed(cfg.seed, i)
        feats = np.sort(np.random.default_rng(s).choice(X.shape[1], size=m, replace=False))
        return lambda: base_kmeans(X[:, feats], cfg.fixed_k, s, cfg.max_iter, cfg.restarts)

    return BasicPartitionSet.from_partitions(_run_all([job(i) for i in range(cfg.r)], n_jobs))


def generate_subsample(X, cfg, n_jobs=None):
    """Fixed K on a random row sample; unsampled points are MISSING."""
    X = _prepare(X, replace(cfg, strategy="subsample"))
    n = X.shape[0]
    m = math.ceil(cfg.row_fraction * n)

    def job(i):
        s = subseed(cfg.seed, i)
        rows = np.sort(np.random.default_rng(s).choice(n, size=m, replace=False))

        def run():
            part = base_kmeans(X[rows], cfg.fixed_k, s, cfg.max_iter, cfg.restarts)
            labels = np.full(n, MISSING, dtype=np.int64)
            labels[rows] = part.labels
            return Partition(labels, cfg.fixed_k)

        return run

    return BasicPartitionSet.from_partitions(_run_all([job(i) for i in range(cfg.r)], n_jobs))


def generate(X, cfg, n_jobs=None):
    fn = {"rps": generate_rps, "rfs": generate_rfs, "subsample": generate_subsample}
    if cfg.strategy not in fn:
        raise ConfigError(f"unknown strategy {cfg.strategy!r}")
    return fn[cfg.strategy](X, cfg, n_jobs)
