"""Shared Lloyd iteration, k-means++ seeding and restart handling.

A *model* supplies three methods:

``centers_from_points(idx)``
    centers built from the given rows (used for seeding);
``fit_centers(labels, K)``
    optimal centers for a fixed assignment;
``costs(centers)``
    ``(n, K)`` matrix of point-to-center costs whose row-wise sum over the
    assignment is the objective.

and optionally ``seed_weights`` (first-center sampling weights).
"""
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyClusterResolved

log = logging.getLogger(__name__)

DEFAULT_THREADS_ENV = "CONSCLUST_THREADS"


def default_threads():
    try:
        return max(1, int(os.environ.get(DEFAULT_THREADS_ENV, "1")))
    except ValueError:
        return 1


def subseed(seed, index):
    """Independent, reproducible integer seed for (seed, index)."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint32)[0])


@dataclass
class LloydFit:
    labels: np.ndarray
    trace: list
    n_iter: int
    repairs: int
    restart: int = 0

    @property
    def objective(self):
        return self.trace[-1]


# relative tie tolerance, floored at 1e-12 absolute for all-duplicate data
TIE_RTOL = 1e-12


def kmeanspp(model, K, rng, background=None):
    """k-means++ seeding; returns chosen point indices.

    With ``background`` (a 1-row center) that center counts as already
    chosen and only ``K - 1`` points are drawn.
    """
    n = model.n
    chosen = []
    if background is None:
        w = getattr(model, "seed_weights", None)
        if w is None:
            first = int(rng.integers(n))
        else:
            first = int(rng.choice(n, p=w / w.sum()))
        chosen.append(first)
        mind = model.costs(model.centers_from_points(np.array([first])))[:, 0]
    else:
        mind = model.costs(background)[:, 0]
    while len(chosen) < K - (background is not None):
        mind = np.maximum(mind, 0.0)
        total = mind.sum()
        if not np.isfinite(total) or total <= 0:
            # every point coincides with a chosen center
            pool = np.setdiff1d(np.arange(n), chosen)
            pick = int(rng.choice(pool))
        else:
            pick = int(rng.choice(n, p=mind / total))
        chosen.append(pick)
        mind = np.minimum(mind, model.costs(model.centers_from_points(np.array([pick])))[:, 0])
    return np.array(chosen, dtype=np.int64)


def repair_empty(labels, D, K):
    """Move worst-fit points into empty clusters.  Returns (labels, moves)."""
    sizes = np.bincount(labels, minlength=K)
    moves = 0
    for k in np.flatnonzero(sizes == 0):
        fit = D[np.arange(labels.size), labels].copy()
        fit[sizes[labels] <= 1] = -np.inf
        l = int(np.argmax(fit))
        sizes[labels[l]] -= 1
        labels[l] = k
        sizes[k] = 1
        moves += 1
    return labels, moves


def lloyd(model, K, rng, max_iter=100):
    if K > model.n:
        raise ValueError(f"K={K} exceeds n={model.n}")
    bg_fn = getattr(model, "background_center", None)
    if bg_fn is None:
        D = model.costs(model.centers_from_points(kmeanspp(model, K, rng)))
    else:
        bg = bg_fn()
        idx = kmeanspp(model, K, rng, background=bg)
        D = model.costs(np.vstack([bg, model.centers_from_points(idx)]))
    labels = np.argmin(D, axis=1)
    trace = []
    repairs = 0
    evaluated = labels
    for _ in range(max_iter):
        labels, moved = repair_empty(labels, D, K)
        repairs += moved
        D = model.costs(model.fit_centers(labels, K))
        trace.append(float(D[np.arange(labels.size), labels].sum()))
        evaluated = labels
        new = np.argmin(D, axis=1)
        # ties (up to rounding) keep the current cluster, otherwise duplicate
        # points can cycle between a repaired singleton and its twins' cluster
        rows = np.arange(labels.size)
        tol = TIE_RTOL * max(float(np.abs(D).max()), 1.0)
        new = np.where(D[rows, labels] <= D[rows, new] + tol, labels, new)
        if np.array_equal(new, labels):
            break
        labels = new
    if repairs:
        warnings.warn(EmptyClusterResolved(f"{repairs} empty cluster(s) re-seeded"), stacklevel=3)
    return LloydFit(evaluated.astype(np.int64), trace, len(trace), repairs)


def run_restarts(model, K, seed=0, restarts=10, max_iter=100, n_jobs=None):
    """Best-of-``restarts`` Lloyd runs; ties go to the lowest restart index.

    Restart ``j`` draws from ``default_rng([seed, j])`` so the result does not
    depend on ``n_jobs``.
    """
    restarts = max(1, int(restarts))
    n_jobs = default_threads() if n_jobs is None else max(1, int(n_jobs))

    def one(j):
        fit = lloyd(model, K, np.random.default_rng([int(seed), j]), max_iter)
        fit.restart = j
        return fit

    if n_jobs > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=min(n_jobs, restarts)) as pool:
            fits = list(pool.map(one, range(restarts)))
    else:
        fits = [one(j) for j in range(restarts)]
    best = min(fits, key=lambda f: (f.objective, f.restart))
    log.debug("best restart %d objective %.6g after %d iterations", best.restart, best.objective, best.n_iter)
    return best
