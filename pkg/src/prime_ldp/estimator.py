"""End-to-end membership estimation from a debiased (or raw) adjacency matrix."""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateGeometry, InvalidParametersError, VertexHuntInfeasible
from .privacy import PrivacyParams
from .spectral import (
    PseudoDegrees,
    SpectralState,
    build_laplacian,
    compute_delta_hat,
    pseudo_degrees,
    score_ratios,
    select_nodes,
    top_k_eigen,
)
from .vertex_hunting import HuntConfig, SimplexVertices, sketched_vertex_search

log = logging.getLogger(__name__)

BARYCENTRIC_MAX_CONDITION = 1e10


class VertexHuntWarning(UserWarning):
    """Emitted when the estimator falls back to the uniform membership matrix."""


@dataclass(frozen=True)
class EstimatorConfig:
    K: int
    tau: float = 1.0
    c: float = 0.01
    gamma: float = 0.5
    privacy: Optional[PrivacyParams] = None
    hunt: HuntConfig = field(default_factory=HuntConfig)

    def __post_init__(self):
        if self.K < 2:
            raise InvalidParametersError(f"K must be >= 2, got {self.K}")
        if self.tau <= 0 or self.c <= 0 or self.gamma <= 0:
            raise InvalidParametersError("tau, c and gamma must be positive")


@dataclass(frozen=True)
class MembershipEstimate:
    pi_hat: np.ndarray
    default_row: np.ndarray
    spectral: Optional[SpectralState] = None
    vertices: Optional[SimplexVertices] = None
    v1: Optional[np.ndarray] = None
    warning: Optional[str] = None


def solve_barycentric(r, vertices):
    """Weights w with sum_k w_k v_k = r and sum_k w_k = 1 (entries may be negative)."""
    v = vertices.v if isinstance(vertices, SimplexVertices) else np.asarray(vertices, float)
    K = v.shape[0]
    a = np.vstack([v.T, np.ones((1, K))])
    rhs = np.append(np.asarray(r, dtype=float), 1.0)
    if np.linalg.cond(a) <= BARYCENTRIC_MAX_CONDITION:
        return np.linalg.solve(a, rhs)
    # least squares on v with the affine constraint eliminated: w = e_K + N c
    diff = (v[:-1] - v[-1]).T
    c, *_ = np.linalg.lstsq(diff, rhs[:-1] - v[-1], rcond=None)
    if not np.all(np.isfinite(c)) or np.linalg.matrix_rank(diff) == 0:
        raise DegenerateGeometry("barycentric system is singular")
    return np.append(c, 1.0 - c.sum())


def compute_v1(lambdas, vertices):
    """(lambda_1 + v_j' diag(lambda_2..lambda_K) v_j)^(-1/2) per vertex; NaN where
    the radicand is not positive."""
    v = vertices.v if isinstance(vertices, SimplexVertices) else np.asarray(vertices, float)
    lambdas = np.asarray(lambdas, dtype=float)
    rad = lambdas[0] + (v * v * lambdas[1:]).sum(axis=1)
    out = np.full(rad.shape, np.nan)
    ok = rad > 0
    out[ok] = rad[ok] ** -0.5
    return out


def reconstruct_pi_row(w, v1):
    """Clamp w_k / v1_k at zero and L1-normalize.

    Returns (row, is_default); the uniform row is returned when every entry
    clamps to zero or some v1 entry is not finite.
    """
    w = np.asarray(w, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    K = w.size
    uniform = np.full(K, 1.0 / K)
    if not np.all(np.isfinite(v1)):
        return uniform, True
    row = np.maximum(w / v1, 0.0)
    total = row.sum()
    if not total > 0 or not np.isfinite(total):
        return uniform, True
    return row / total, False


def _finalize(pi_hat):
    # exact row sums after floating normalisation
    pi_hat = np.maximum(pi_hat, 0.0)
    return pi_hat / pi_hat.sum(axis=1, keepdims=True)


def _fallback(n, K, message, spectral=None):
    warnings.warn(message, VertexHuntWarning, stacklevel=3)
    return MembershipEstimate(
        pi_hat=np.full((n, K), 1.0 / K),
        default_row=np.ones(n, dtype=bool),
        spectral=spectral,
        warning=message,
    )


def _run(numerator, deg, cfg):
    K = cfg.K
    n = numerator.shape[0]
    lap = build_laplacian(numerator, deg, cfg.tau)
    lambdas, xi = top_k_eigen(lap.l, K)
    dsq = compute_delta_hat(lambdas)
    try:
        s_hat, s_gamma = select_nodes(deg, dsq, cfg.c, cfg.gamma, K, n)
    except VertexHuntInfeasible as exc:
        state = SpectralState(lambdas, xi, dsq, np.zeros(0, int), np.zeros(0, int),
                              np.zeros((0, K - 1)))
        return _fallback(n, K, f"vertex hunt infeasible: {exc}", state)

    ratios, s_hat = score_ratios(xi, s_hat)
    s_gamma = np.intersect1d(s_gamma, s_hat)
    state = SpectralState(lambdas, xi, dsq, s_hat, s_gamma, ratios)
    if s_gamma.size < K:
        return _fallback(n, K, f"vertex hunt infeasible: {s_gamma.size} node(s) for K={K}", state)

    hunt_rows = ratios[np.searchsorted(s_hat, s_gamma)]
    vertices = sketched_vertex_search(hunt_rows, K, cfg.hunt)
    v1 = compute_v1(lambdas, vertices)

    pi_hat = np.full((n, K), 1.0 / K)
    default = np.ones(n, dtype=bool)
    for row, i in zip(ratios, s_hat):
        w = solve_barycentric(row, vertices)
        pi_hat[i], default[i] = reconstruct_pi_row(w, v1)
    if not np.all(np.isfinite(v1)):
        log.warning("non-finite vertex scaling; %d rows set to uniform", s_hat.size)
    return MembershipEstimate(_finalize(pi_hat), default, state, vertices, v1)


def estimate_memberships(m, cfg):
    """Estimate the n x K membership matrix from a debiased adjacency matrix.

    ``m`` may be a DebiasedMatrix or a plain symmetric array (non-private mode).
    Rows of nodes outside the truncation set are uniform and flagged in
    ``default_row``.  If too few nodes survive truncation the whole estimate is
    uniform and ``warning`` is set.
    """
    m = np.asarray(getattr(m, "m", m), dtype=float)
    return _run(m, pseudo_degrees(m), cfg)


def oracle_estimate(omega, cfg):
    """Run the pipeline on the population matrix instead of a sampled graph.

    Degrees come from Omega without its diagonal, while the Laplacian is built
    from the full rank-K matrix Omega, so its eigenvectors are exactly those of
    the population Laplacian.
    """
    omega = np.asarray(omega, dtype=float)
    off = omega - np.diag(np.diag(omega))
    d = off.sum(axis=1)
    return _run(omega, PseudoDegrees(d, float(d.mean())), cfg)
