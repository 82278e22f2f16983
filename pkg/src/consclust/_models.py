"""Cost models plugged into :func:`consclust._lloyd.lloyd`."""
import numpy as np

from . import kernels


class EuclideanModel:
    """(Weighted) squared-Euclidean K-means, optionally with a masked
    categorical side block scaled by ``lam`` (partition-level constraints).
    """

    def __init__(self, X, weights=None, side_labels=None, n_side=0, lam=0.0):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.n = self.X.shape[0]
        self.weights = None if weights is None else np.ascontiguousarray(weights, dtype=np.float64)
        # constant weights seed exactly like the unweighted case
        uniform = self.weights is None or np.ptp(self.weights) == 0
        self.seed_weights = None if uniform else self.weights
        self.side = None
        if side_labels is not None and lam > 0:
            y = np.asarray(side_labels, dtype=np.int64)
            obs = y >= 0
            if obs.any():
                self.side = y
                self.side_obs = obs
                self.lam = float(lam)
                self.n_side = int(n_side)
                self.side_prior = np.bincount(y[obs], minlength=self.n_side) / obs.sum()

    def _w(self):
        return np.ones(self.n) if self.weights is None else self.weights

    def centers_from_points(self, idx):
        C = self.X[idx].copy()
        if self.side is None:
            return C, None
        M = np.tile(self.side_prior, (len(idx), 1))
        for row, l in enumerate(idx):
            if self.side_obs[l]:
                M[row] = 0.0
                M[row, self.side[l]] = 1.0
        return C, M

    def fit_centers(self, labels, K):
        sums, mass = kernels.weighted_sums(self.X, self._w(), labels, K)
        C = sums / mass[:, None]
        if self.side is None:
            return C, None
        obs = self.side_obs
        M = np.zeros((K, self.n_side))
        np.add.at(M, (labels[obs], self.side[obs]), 1.0)
        cnt = M.sum(axis=1)
        M = np.where(cnt[:, None] > 0, M / np.maximum(cnt, 1)[:, None], self.side_prior[None, :])
        return C, M

    def costs(self, centers):
        C, M = centers
        D = kernels.sq_dists(self.X, np.ascontiguousarray(C))
        if M is not None:
            side = 1.0 - 2.0 * M[:, self.side].T + (M * M).sum(axis=1)[None, :]
            D = D + self.lam * np.where(self.side_obs[:, None], side, 0.0)
        if self.weights is not None:
            D = D * self.weights[:, None]
        return D


def block_sums(values, offsets):
    """Per-block sums along the last axis."""
    return np.add.reduceat(values, offsets, axis=-1)


class BlockModel:
    """K-means over a binary coding with a per-block distance table.

    ``table_fn(m, coding)`` turns per-block centroid distributions ``m``
    (``K x d``) into per-column costs: the cost of block ``i`` for a point
    whose 1 sits in column ``c`` is ``table[k, c]``.
    """

    def __init__(self, coding, table_fn, partition_weights=None):
        self.coding = coding
        self.cols = np.ascontiguousarray(coding.cols)
        self.n = coding.n
        self.d = coding.d
        self.table_fn = table_fn
        r = coding.r
        self.pw = np.ones(r) if partition_weights is None else np.asarray(partition_weights, dtype=np.float64)
        counts, cover = kernels.block_counts(self.cols, np.zeros(self.n, dtype=np.int64), 1, self.d)
        self.prior = (counts / cover[:, coding.block_of])[0]

    def _onehots(self, idx):
        m = np.tile(self.prior, (len(idx), 1))
        for row, l in enumerate(idx):
            for i, c in enumerate(self.cols[l]):
                if c >= 0:
                    lo = self.coding.offsets[i]
                    m[row, lo:lo + self.coding.widths[i]] = 0.0
                    m[row, c] = 1.0
        return m

    def centers_from_points(self, idx):
        return self._onehots(idx)

    def fit_centers(self, labels, K):
        counts, cover = kernels.block_counts(self.cols, labels, K, self.d)
        denom = cover[:, self.coding.block_of]
        with np.errstate(invalid="ignore", divide="ignore"):
            m = counts / denom
        return np.where(denom > 0, m, self.prior[None, :])

    def costs(self, m):
        table = np.ascontiguousarray(self.table_fn(m, self.coding))
        return kernels.block_gather(self.cols, table, self.pw)


class SecModel:
    """Weighted K-means on rows ``b_l / w_l`` with weights ``w_l``.

    Costs ``w_l * ||b_l / w_l - m_k||^2`` are expanded so only the ``r``
    nonzeros of each row are touched.
    """

    def __init__(self, coding, w):
        self.cols = np.ascontiguousarray(coding.cols)
        self.n = coding.n
        self.d = coding.d
        self.w = np.asarray(w, dtype=np.float64)
        self.seed_weights = self.w
        self.self_term = (self.cols >= 0).sum(axis=1) / self.w
        self._ones = np.ones(coding.r)

    def centers_from_points(self, idx):
        m = np.zeros((len(idx), self.d))
        for row, l in enumerate(idx):
            c = self.cols[l][self.cols[l] >= 0]
            m[row, c] = 1.0 / self.w[l]
        return m

    def fit_centers(self, labels, K):
        counts, _ = kernels.block_counts(self.cols, labels, K, self.d)
        mass = np.bincount(labels, weights=self.w, minlength=K)
        return counts / mass[:, None]

    def costs(self, m):
        G = kernels.block_gather(self.cols, np.ascontiguousarray(m), self._ones)
        D = self.self_term[:, None] - 2.0 * G + self.w[:, None] * (m * m).sum(axis=1)[None, :]
        return np.maximum(D, 0.0)
