"""Hot inner loops, each in a numba and a vectorised numpy flavour.

The public functions dispatch on :func:`consclust._accel.get_backend`.
Both flavours are kept importable (``*_numba`` / ``*_numpy``) so tests can
check them against each other and the benchmark can time them.

Binary codings are handled through their column-index form: ``cols[l, i]``
is the global column of the single 1 in block ``i`` of row ``l``, or -1
when that block is all-zero (label missing).
"""
import numpy as np

from . import _accel
from ._accel import njit


# --------------------------------------------------------------------------
# block gather: cost[l, k] = sum_i weights[i] * table[k, cols[l, i]]

@njit(cache=True, nogil=True)
def block_gather_numba(cols, table, weights):
    n, r = cols.shape
    K = table.shape[0]
    out = np.zeros((n, K))
    for l in range(n):
        for k in range(K):
            acc = 0.0
            for i in range(r):
                c = cols[l, i]
                if c >= 0:
                    acc += weights[i] * table[k, c]
            out[l, k] = acc
    return out


def block_gather_numpy(cols, table, weights):
    valid = cols >= 0
    safe = np.where(valid, cols, 0)
    w = np.where(valid, weights[None, :], 0.0)
    out = np.empty((cols.shape[0], table.shape[0]))
    for k in range(table.shape[0]):
        out[:, k] = (table[k][safe] * w).sum(axis=1)
    return out


# --------------------------------------------------------------------------
# block counts: counts[k, c] = #{l in cluster k with a 1 in column c}
#               cover[k, i]  = #{l in cluster k covered by block i}

@njit(cache=True, nogil=True)
def block_counts_numba(cols, labels, K, d):
    n, r = cols.shape
    counts = np.zeros((K, d))
    cover = np.zeros((K, r))
    for l in range(n):
        k = labels[l]
        for i in range(r):
            c = cols[l, i]
            if c >= 0:
                counts[k, c] += 1.0
                cover[k, i] += 1.0
    return counts, cover


def block_counts_numpy(cols, labels, K, d):
    n, r = cols.shape
    valid = cols >= 0
    rows = np.broadcast_to(labels[:, None], cols.shape)
    counts = np.bincount((rows * d + cols)[valid], minlength=K * d).astype(float)
    blocks = np.broadcast_to(np.arange(r)[None, :], cols.shape)
    cover = np.bincount((rows * r + blocks)[valid], minlength=K * r).astype(float)
    return counts.reshape(K, d), cover.reshape(K, r)


# --------------------------------------------------------------------------
# squared Euclidean distances between rows of X and rows of C

@njit(cache=True, nogil=True)
def sq_dists_numba(X, C):
    n, p = X.shape
    K = C.shape[0]
    out = np.empty((n, K))
    for l in range(n):
        for k in range(K):
            acc = 0.0
            for j in range(p):
                t = X[l, j] - C[k, j]
                acc += t * t
            out[l, k] = acc
    return out


def sq_dists_numpy(X, C):
    out = np.empty((X.shape[0], C.shape[0]))
    for k in range(C.shape[0]):
        diff = X - C[k]
        out[:, k] = np.einsum("ij,ij->i", diff, diff)
    return out


# --------------------------------------------------------------------------
# weighted cluster means of dense rows

@njit(cache=True, nogil=True)
def weighted_sums_numba(X, weights, labels, K):
    n, p = X.shape
    sums = np.zeros((K, p))
    mass = np.zeros(K)
    for l in range(n):
        k = labels[l]
        w = weights[l]
        mass[k] += w
        for j in range(p):
            sums[k, j] += w * X[l, j]
    return sums, mass


def weighted_sums_numpy(X, weights, labels, K):
    onehot = np.zeros((K, X.shape[0]))
    onehot[labels, np.arange(X.shape[0])] = weights
    return onehot @ X, onehot.sum(axis=1)


# --------------------------------------------------------------------------
# co-association counts straight from the label matrix (missing = -1)

@njit(cache=True, nogil=True)
def coassoc_numba(labels):
    n, r = labels.shape
    S = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(x, n):
            acc = 0
            for i in range(r):
                a = labels[x, i]
                if a >= 0 and a == labels[y, i]:
                    acc += 1
            S[x, y] = acc
            S[y, x] = acc
    return S


def coassoc_numpy(labels):
    n, r = labels.shape
    S = np.zeros((n, n), dtype=np.int64)
    for i in range(r):
        L = labels[:, i]
        eq = (L[:, None] == L[None, :]) & (L >= 0)[:, None]
        S += eq
    return S


# --------------------------------------------------------------------------
# agglomerative merging on a similarity matrix (average or single linkage).
# Merges the most similar pair; ties go to the lexicographically smallest
# (i, j).  Stops when n_clusters groups remain.  Returns root ids per point.

@njit(cache=True)
def _row_best(sim, active, i):
    n = sim.shape[0]
    best = -np.inf
    arg = -1
    for j in range(n):
        if j != i and active[j] and sim[i, j] > best:
            best = sim[i, j]
            arg = j
    return arg, best


@njit(cache=True)
def agglomerate_numba(S, n_clusters, single):
    n = S.shape[0]
    sim = S.astype(np.float64).copy()
    size = np.ones(n)
    active = np.ones(n, dtype=np.bool_)
    parent = np.arange(n)
    nbr = np.empty(n, dtype=np.int64)
    nbr_sim = np.empty(n)
    for i in range(n):
        nbr[i], nbr_sim[i] = _row_best(sim, active, i)
    remaining = n
    while remaining > n_clusters:
        a = -1
        best = -np.inf
        for i in range(n):
            if active[i] and nbr_sim[i] > best:
                best = nbr_sim[i]
                a = i
        b = nbr[a]
        if b < a:
            a, b = b, a
        sa = size[a]
        sb = size[b]
        for k in range(n):
            if active[k] and k != a and k != b:
                if single:
                    v = max(sim[a, k], sim[b, k])
                else:
                    v = (sa * sim[a, k] + sb * sim[b, k]) / (sa + sb)
                sim[a, k] = v
                sim[k, a] = v
        size[a] = sa + sb
        active[b] = False
        parent[b] = a
        remaining -= 1
        for k in range(n):
            if not active[k]:
                continue
            if k == a or nbr[k] == a or nbr[k] == b:
                nbr[k], nbr_sim[k] = _row_best(sim, active, k)
            elif sim[k, a] > nbr_sim[k] or (sim[k, a] == nbr_sim[k] and a < nbr[k]):
                nbr[k] = a
                nbr_sim[k] = sim[k, a]
    return parent


def agglomerate_numpy(S, n_clusters, single):
    n = S.shape[0]
    sim = S.astype(np.float64).copy()
    np.fill_diagonal(sim, -np.inf)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    parent = np.arange(n)
    nbr = np.argmax(sim, axis=1)
    nbr_sim = sim[np.arange(n), nbr]
    remaining = n
    while remaining > n_clusters:
        cand = np.where(active, nbr_sim, -np.inf)
        a = int(np.argmax(cand))
        b = int(nbr[a])
        if b < a:
            a, b = b, a
        if single:
            row = np.maximum(sim[a], sim[b])
        else:
            row = (size[a] * sim[a] + size[b] * sim[b]) / (size[a] + size[b])
        row[~active] = -np.inf
        row[a] = -np.inf
        row[b] = -np.inf
        sim[a] = row
        sim[:, a] = row
        sim[b] = -np.inf
        sim[:, b] = -np.inf
        size[a] += size[b]
        active[b] = False
        parent[b] = a
        remaining -= 1
        stale = active & ((nbr == a) | (nbr == b))
        stale[a] = True
        idx = np.flatnonzero(stale)
        if idx.size:
            sub = sim[idx]
            nbr[idx] = np.argmax(sub, axis=1)
            nbr_sim[idx] = sub[np.arange(idx.size), nbr[idx]]
        col = sim[:, a]
        better = active & ~stale & ((col > nbr_sim) | ((col == nbr_sim) & (a < nbr)))
        nbr[better] = a
        nbr_sim[better] = col[better]
    return parent


# --------------------------------------------------------------------------
# dispatch

def _pick(numba_fn, numpy_fn):
    def call(*args):
        if _accel.get_backend() == "numba":
            return numba_fn(*args)
        return numpy_fn(*args)
    call.__name__ = numpy_fn.__name__.replace("_numpy", "")
    call.__doc__ = f"Dispatch to ``{numba_fn.__name__}`` or ``{numpy_fn.__name__}``."
    return call


block_gather = _pick(block_gather_numba, block_gather_numpy)
block_counts = _pick(block_counts_numba, block_counts_numpy)
sq_dists = _pick(sq_dists_numba, sq_dists_numpy)
weighted_sums = _pick(weighted_sums_numba, weighted_sums_numpy)
coassoc = _pick(coassoc_numba, coassoc_numpy)
agglomerate = _pick(agglomerate_numba, agglomerate_numpy)

KERNELS = {
    "block_gather": (block_gather_numba, block_gather_numpy),
    "block_counts": (block_counts_numba, block_counts_numpy),
    "sq_dists": (sq_dists_numba, sq_dists_numpy),
    "weighted_sums": (weighted_sums_numba, weighted_sums_numpy),
    "coassoc": (coassoc_numba, coassoc_numpy),
    "agglomerate": (agglomerate_numba, agglomerate_numpy),
}
