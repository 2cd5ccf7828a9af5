"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names (``simplex_sq_distances``, ``lloyd``, ``cluster_medoids``)
dispatch to the numba versions unless ``PRIME_LDP_DISABLE_NUMBA`` is set.  Both
variants are importable under explicit ``*_numba`` / ``*_numpy`` names so the
test-suite and the benchmark can compare them directly.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# Barycentric coordinates above -FACE_TOL count as inside a face.
FACE_TOL = 1e-12


# ---------------------------------------------------------------------------
# squared distance from points to a simplex (face enumeration)
# ---------------------------------------------------------------------------

@njit(cache=True)
def simplex_sq_distances_numba(points, base, dirs, pinv, sizes, tol):
    m, d = points.shape
    n_faces = base.shape[0]
    out = np.empty(m)
    diff = np.empty(d)
    coef = np.empty(d)
    for i in range(m):
        best = np.inf
        for f in range(n_faces):
            k = sizes[f] - 1
            for a in range(d):
                diff[a] = points[i, a] - base[f, a]
            ok = True
            total = 0.0
            for r in range(k):
                acc = 0.0
                for a in range(d):
                    acc += pinv[f, r, a] * diff[a]
                coef[r] = acc
                total += acc
                if acc < -tol:
                    ok = False
            if not ok or 1.0 - total < -tol:
                continue
            dist = 0.0
            for a in range(d):
                pa = base[f, a]
                for r in range(k):
                    pa += dirs[f, a, r] * coef[r]
                t = pa - points[i, a]
                dist += t * t
            if dist < best:
                best = dist
        out[i] = best
    return out


def simplex_sq_distances_numpy(points, base, dirs, pinv, sizes, tol):
    m = points.shape[0]
    best = np.full(m, np.inf)
    for f in range(base.shape[0]):
        k = int(sizes[f]) - 1
        diff = points - base[f]
        coef = diff @ pinv[f].T
        valid = np.ones(m, dtype=bool)
        if k > 0:
            valid &= np.all(coef[:, :k] >= -tol, axis=1)
            valid &= (1.0 - coef[:, :k].sum(axis=1)) >= -tol
        proj = base[f] + coef @ dirs[f].T
        dist = ((proj - points) ** 2).sum(axis=1)
        best = np.where(valid & (dist < best), dist, best)
    return best


# ---------------------------------------------------------------------------
# Lloyd iterations for k-means
# ---------------------------------------------------------------------------

@njit(cache=True)
def lloyd_numba(points, centers, max_iter):
    m, d = points.shape
    k = centers.shape[0]
    centers = centers.copy()
    labels = np.full(m, -1, dtype=np.int64)
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for _ in range(max_iter):
        changed = False
        for i in range(m):
            best = np.inf
            arg = 0
            for c in range(k):
                dist = 0.0
                for a in range(d):
                    t = points[i, a] - centers[c, a]
                    dist += t * t
                if dist < best:
                    best = dist
                    arg = c
            if labels[i] != arg:
                labels[i] = arg
                changed = True
        if not changed:
            break
        sums[:, :] = 0.0
        counts[:] = 0
        for i in range(m):
            c = labels[i]
            counts[c] += 1
            for a in range(d):
                sums[c, a] += points[i, a]
        for c in range(k):
            if counts[c] > 0:
                for a in range(d):
                    centers[c, a] = sums[c, a] / counts[c]
    inertia = 0.0
    for i in range(m):
        c = labels[i]
        for a in range(d):
            t = points[i, a] - centers[c, a]
            inertia += t * t
    return centers, labels, inertia


def _sq_dists(points, centers):
    diff = points[:, None, :] - centers[None, :, :]
    return (diff * diff).sum(axis=2)


def lloyd_numpy(points, centers, max_iter):
    m, d = points.shape
    k = centers.shape[0]
    centers = centers.copy()
    labels = np.full(m, -1, dtype=np.int64)
    for _ in range(max_iter):
        new = np.argmin(_sq_dists(points, centers), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros((k, d))
        np.add.at(sums, labels, points)
        filled = counts > 0
        centers[filled] = sums[filled] / counts[filled, None]
    inertia = float(((points - centers[labels]) ** 2).sum())
    return centers, labels, inertia


# ---------------------------------------------------------------------------
# medoid of each cluster
# ---------------------------------------------------------------------------

@njit(cache=True)
def cluster_medoids_numba(points, labels, k):
    m, d = points.shape
    out = np.full(k, -1, dtype=np.int64)
    # bucket member indices by cluster (counting sort keeps index order)
    counts = np.zeros(k + 1, dtype=np.int64)
    for i in range(m):
        counts[labels[i] + 1] += 1
    starts = np.cumsum(counts)
    order = np.empty(m, dtype=np.int64)
    fill = starts[:-1].copy()
    for i in range(m):
        c = labels[i]
        order[fill[c]] = i
        fill[c] += 1
    for c in range(k):
        lo, hi = starts[c], starts[c + 1]
        best = np.inf
        for a in range(lo, hi):
            i = order[a]
            total = 0.0
            for b in range(lo, hi):
                j = order[b]
                s = 0.0
                for t in range(d):
                    diff = points[i, t] - points[j, t]
                    s += diff * diff
                total += np.sqrt(s)
            if total < best:
                best = total
                out[c] = i
    return out


def cluster_medoids_numpy(points, labels, k):
    out = np.full(k, -1, dtype=np.int64)
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        sub = points[members]
        dist = np.sqrt(_sq_dists(sub, sub))
        out[c] = members[int(np.argmin(dist.sum(axis=1)))]
    return out


if USE_NUMBA:
    simplex_sq_distances = simplex_sq_distances_numba
    lloyd = lloyd_numba
    cluster_medoids = cluster_medoids_numba
else:
    simplex_sq_distances = simplex_sq_distances_numpy
    lloyd = lloyd_numpy
    cluster_medoids = cluster_medoids_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
