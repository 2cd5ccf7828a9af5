"""Regularized Laplacian, leading eigenstructure, truncation sets, SCORE ratios."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import NumericalFailure, RegularizationFailure, VertexHuntInfeasible

log = logging.getLogger(__name__)

# Xi[i, 0] must exceed this before it is used as a divisor.
RATIO_FLOOR = 1e-12
# Below this size a full dense decomposition is cheaper than ARPACK.
DENSE_EIGEN_MAX_N = 400
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class PseudoDegrees:
    d: np.ndarray
    d_bar: float


@dataclass(frozen=True)
class RegularizedLaplacian:
    l: np.ndarray
    tau: float
    h_diag: np.ndarray


@dataclass(frozen=True)
class SpectralState:
    lambdas: np.ndarray
    xi: np.ndarray
    delta_hat_sq: float
    s_hat: np.ndarray
    s_gamma: np.ndarray
    ratios: np.ndarray  # rows aligned with s_hat


def _matrix(m):
    return np.asarray(getattr(m, "m", m), dtype=float)


def pseudo_degrees(m):
    """Row sums excluding the diagonal, and their mean."""
    m = _matrix(m)
    d = m.sum(axis=1) - np.diag(m)
    return PseudoDegrees(d, float(d.mean()))


def build_laplacian(m, deg, tau=1.0):
    """H^{-1/2} M H^{-1/2} with H = diag(d) + tau * mean(d) * I.

    Raises RegularizationFailure if any H_ii <= 0.
    """
    m = _matrix(m)
    h = deg.d + tau * deg.d_bar
    if not np.all(h > 0):
        raise RegularizationFailure(h.min())
    s = 1.0 / np.sqrt(h)
    l = m * s[:, None] * s[None, :]
    l = 0.5 * (l + l.T)
    np.fill_diagonal(l, np.diag(m) * s * s)
    return RegularizedLaplacian(l, float(tau), h)


def _fix_signs(xi):
    xi = xi.copy()
    if xi[:, 0].sum() < 0:
        xi[:, 0] = -xi[:, 0]
    for k in range(1, xi.shape[1]):
        col = xi[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            xi[:, k] = -col
    return xi


def top_k_eigen(l, K):
    """K eigenpairs of largest |lambda|.

    The pair with the largest signed eigenvalue comes first, the rest follow by
    decreasing signed value.  The first eigenvector is flipped to a positive
    entry sum; every other column so that its largest-magnitude entry is
    positive.
    """
    l = _matrix(getattr(l, "l", l))
    n = l.shape[0]
    if K > n:
        raise ValueError(f"K={K} exceeds n={n}")
    if n <= DENSE_EIGEN_MAX_N or K >= n - 1:
        vals, vecs = np.linalg.eigh(l)
        pick = np.argsort(-np.abs(vals), kind="stable")[:K]
        vals, vecs = vals[pick], vecs[:, pick]
    else:
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            vals, vecs = eigsh(l, k=K, which="LM", v0=v0, tol=0)
        except ArpackNoConvergence as exc:
            raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    xi = _fix_signs(vecs)

    resid = np.linalg.norm(l @ xi - xi * vals, axis=0)
    if resid.max() > RESIDUAL_TOL * max(1.0, np.abs(vals).max()):
        raise NumericalFailure(f"eigenpair residual {resid.max():.3g} too large")
    return vals, xi


def compute_delta_hat(lambdas):
    """min{sqrt(K) (lambda_1 - lambda_2), sqrt(K) |lambda_K|}."""
    lambdas = np.asarray(lambdas, dtype=float)
    K = lambdas.size
    if K < 2:
        raise ValueError("need K >= 2 eigenvalues")
    rk = np.sqrt(K)
    return float(min(rk * (lambdas[0] - lambdas[1]), rk * abs(lambdas[-1])))


def select_nodes(deg, delta_hat_sq, c, gamma, K, n=None):
    """Truncation sets (S_hat, S_gamma) as sorted index arrays.

    S_hat keeps nodes with d_i * delta_hat_sq >= c K^3 log n (natural log);
    S_gamma further requires d_i >= gamma * mean(d).
    """
    d = deg.d
    n = d.size if n is None else n
    s_hat = np.flatnonzero(d * delta_hat_sq >= c * K**3 * np.log(n))
    s_gamma = s_hat[d[s_hat] >= gamma * deg.d_bar]
    if s_gamma.size == 0:
        raise VertexHuntInfeasible("no node survives both truncation rules")
    return s_hat, s_gamma


def score_ratios(xi, s_hat):
    """Xi[i, 1:] / Xi[i, 0] for i in S_hat.

    Nodes whose leading entry does not exceed RATIO_FLOOR are evicted; returns
    (ratios, kept) with ``ratios`` aligned to the surviving index array
    ``kept``.
    """
    s_hat = np.asarray(s_hat, dtype=np.int64)
    lead = xi[s_hat, 0]
    keep = lead > RATIO_FLOOR
    evicted = int((~keep).sum())
    if evicted:
        log.info("evicted %d node(s) with leading eigenvector entry <= %g", evicted, RATIO_FLOOR)
    kept = s_hat[keep]
    ratios = xi[kept, 1:] / xi[kept, :1]
    return ratios, kept
