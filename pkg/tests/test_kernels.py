import os
import subprocess
import sys

import numpy as np
import pytest

from prime_ldp import kernels
from prime_ldp.vertex_hunting import face_tables


@pytest.fixture
def cloud(rng):
    return rng.standard_normal((300, 3))


@pytest.mark.parametrize("K", [2, 3, 4])
def test_simplex_distance_backends_agree(rng, K):
    v = rng.standard_normal((K, K - 1))
    pts = np.ascontiguousarray(rng.standard_normal((200, K - 1)) * 2)
    tables = face_tables(v)
    a = kernels.simplex_sq_distances_numba(pts, *tables, kernels.FACE_TOL)
    b = kernels.simplex_sq_distances_numpy(pts, *tables, kernels.FACE_TOL)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_lloyd_backends_agree(cloud):
    init = np.ascontiguousarray(cloud[:6].copy())
    ca, la, ia = kernels.lloyd_numba(cloud, init.copy(), 100)
    cb, lb, ib = kernels.lloyd_numpy(cloud, init.copy(), 100)
    np.testing.assert_array_equal(la, lb)
    np.testing.assert_allclose(ca, cb, rtol=1e-12)
    assert abs(ia - ib) <= 1e-10 * ia


def test_lloyd_is_a_fixed_point(cloud):
    centers, labels, _ = kernels.lloyd(cloud, np.ascontiguousarray(cloud[:5].copy()), 200)
    d = ((cloud[:, None, :] - centers[None]) ** 2).sum(2)
    np.testing.assert_array_equal(d.argmin(1), labels)


def test_medoid_backends_agree(cloud):
    labels = np.ascontiguousarray(np.arange(cloud.shape[0]) % 7, dtype=np.int64)
    np.testing.assert_array_equal(
        kernels.cluster_medoids_numba(cloud, labels, 8),
        kernels.cluster_medoids_numpy(cloud, labels, 8),
    )


def test_medoid_minimises_within_cluster_distance(cloud):
    labels = np.ascontiguousarray(np.arange(cloud.shape[0]) % 4, dtype=np.int64)
    med = kernels.cluster_medoids(cloud, labels, 4)
    for k in range(4):
        idx = np.flatnonzero(labels == k)
        pts = cloud[idx]
        cost = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(2)).sum(1)
        assert med[k] == idx[cost.argmin()]


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, PRIME_LDP_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "import prime_ldp; print(prime_ldp.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
