"""Sketched vertex search over SCORE-ratio rows.

Stage one clusters the points with seeded k-means and represents each cluster
by its medoid.  Stage two scans K-subsets of the medoids for the simplex that
leaves the least squared mass outside it.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DegenerateGeometry, InvalidParametersError
from .streams import as_generator

MAX_CONDITION = 1e10


@dataclass(frozen=True)
class SimplexVertices:
    v: np.ndarray  # K x (K-1)
    fit: float = 0.0

    @property
    def K(self):
        return self.v.shape[0]


@dataclass(frozen=True)
class HuntConfig:
    n_centers: Optional[int] = None  # default max(K + 10, ceil(K log m))
    max_subsets: int = 20000
    kmeans_restarts: int = 5
    kmeans_iters: int = 100
    seed: int = 0
    max_condition: float = MAX_CONDITION

    def centers_for(self, K, m):
        if self.n_centers is not None:
            if self.n_centers < K:
                raise InvalidParametersError(f"n_centers={self.n_centers} < K={K}")
            return self.n_centers
        return max(K + 10, math.ceil(K * math.log(max(m, 2))))


def _affine_condition(v):
    K = v.shape[0]
    aug = np.hstack([v, np.ones((K, 1))])
    return np.linalg.cond(aug)


def face_tables(v):
    """Precomputed projections onto the affine hull of every face of the simplex.

    Returns (base, dirs, pinv, sizes) padded to the ambient dimension, in the
    layout consumed by ``kernels.simplex_sq_distances``.
    """
    v = np.asarray(v, dtype=float)
    K, d = v.shape
    faces = [f for r in range(1, K + 1) for f in itertools.combinations(range(K), r)]
    F = len(faces)
    base = np.empty((F, d))
    dirs = np.zeros((F, d, d))
    pinv = np.zeros((F, d, d))
    sizes = np.empty(F, dtype=np.int64)
    for i, face in enumerate(faces):
        b = v[face[0]]
        base[i] = b
        sizes[i] = len(face)
        if len(face) > 1:
            D = (v[list(face[1:])] - b).T
            dirs[i, :, : len(face) - 1] = D
            pinv[i, : len(face) - 1, :] = np.linalg.pinv(D)
    return base, dirs, pinv, sizes


def _vertex_array(vertices):
    v = vertices.v if isinstance(vertices, SimplexVertices) else vertices
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[1] != v.shape[0] - 1:
        raise ValueError(f"expected K x (K-1) vertices, got {v.shape}")
    return v


def simplex_sq_distances(points, vertices):
    """Squared Euclidean distance from each point to the simplex hull."""
    v = _vertex_array(vertices)
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    return kernels.simplex_sq_distances(pts, *face_tables(v), kernels.FACE_TOL)


def distance_to_simplex(point, vertices):
    """min over w >= 0, sum(w) = 1 of ||sum_k w_k v_k - point||.

    Solved exactly by enumerating faces: the projection lies in the relative
    interior of exactly one face, where it coincides with the affine projection.
    """
    point = np.asarray(point, dtype=float).reshape(1, -1)
    return float(np.sqrt(simplex_sq_distances(point, vertices)[0]))


def _kmeanspp(points, k, rng):
    m = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(m)]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(m)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, m - 1)
        centers[c] = points[idx]
        closest = np.minimum(closest, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def sketch(points, k, cfg):
    """k-means partition of ``points`` summarised by cluster medoids.

    Returns the medoid coordinates (lexicographically sorted, unique).  ``k``
    is capped at the number of distinct points.
    """
    points = np.asarray(points, dtype=float)
    distinct = np.unique(points, axis=0)
    if distinct.shape[0] <= k:
        return distinct
    # lexicographic row order makes the result independent of input order
    points = np.ascontiguousarray(_sort_rows(points))
    rng = as_generator(cfg.seed)
    best = None
    for _ in range(max(1, cfg.kmeans_restarts)):
        init = _kmeanspp(points, k, rng)
        centers, labels, inertia = kernels.lloyd(points, init, cfg.kmeans_iters)
        if best is None or inertia < best[0]:
            best = (inertia, labels)
    labels = np.ascontiguousarray(best[1], dtype=np.int64)
    med = kernels.cluster_medoids(points, labels, k)
    reps = points[med[med >= 0]]
    return np.unique(reps, axis=0)


def _candidate_subsets(reps, K, cap):
    L = reps.shape[0]
    total = math.comb(L, K)
    combos = np.array(list(itertools.combinations(range(L), K)), dtype=np.int64)
    if total <= cap:
        return combos
    # rank by total pairwise spread and keep the widest ones
    dist = np.sqrt(((reps[:, None, :] - reps[None, :, :]) ** 2).sum(axis=2))
    spread = np.zeros(len(combos))
    for a, b in itertools.combinations(range(K), 2):
        spread += dist[combos[:, a], combos[:, b]]
    keep = np.argsort(-spread, kind="stable")[:cap]
    return combos[np.sort(keep)]


def _sort_rows(v):
    order = np.lexsort(v.T[::-1])
    return v[order]


def sketched_vertex_search(points, K, cfg=None):
    """Approximate the K vertices of the simplex enclosing ``points``.

    Parameters
    ----------
    points : (m, K-1) array
        SCORE-ratio rows of the retained nodes.
    K : int
        Number of vertices.
    cfg : HuntConfig, optional

    Returns
    -------
    SimplexVertices
        Vertices sorted lexicographically; ``fit`` is the summed squared
        distance of the points to the chosen simplex.
    """
    cfg = cfg or HuntConfig()
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, K - 1))
    if pts.shape[0] < K:
        raise DegenerateGeometry(f"need at least K={K} points, got {pts.shape[0]}")
    reps = sketch(pts, cfg.centers_for(K, pts.shape[0]), cfg)
    if reps.shape[0] < K:
        raise DegenerateGeometry(f"only {reps.shape[0]} distinct points for K={K}")

    if K == 2:
        v = np.array([reps.min(axis=0), reps.max(axis=0)])
        if v[1, 0] - v[0, 0] <= 0:
            raise DegenerateGeometry("all points coincide")
        return SimplexVertices(v, float(simplex_sq_distances(pts, v).sum()))

    best_fit, best_v = np.inf, None
    for combo in _candidate_subsets(reps, K, cfg.max_subsets):
        v = _sort_rows(reps[combo])
        if _affine_condition(v) > cfg.max_condition:
            continue
        fit = float(simplex_sq_distances(pts, v).sum())
        tie = abs(fit - best_fit) <= 1e-12 * max(1.0, abs(best_fit))
        if best_v is None or (fit < best_fit and not tie):
            best_fit, best_v = fit, v
        elif tie and tuple(v.ravel()) < tuple(best_v.ravel()):
            best_fit, best_v = fit, v
    if best_v is None:
        raise DegenerateGeometry("every candidate vertex set is affinely degenerate")
    return SimplexVertices(best_v, best_fit)
