"""Degree-corrected mixed-membership block model: parameters, sampling, audit."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParametersError
from .streams import as_generator

ROW_SUM_TOL = 1e-12
PROB_TOL = 1e-12


@dataclass(frozen=True)
class DcmmParams:
    """Generative triple (theta, Pi, B).

    ``theta`` has length n, ``pi`` is n x K and row-stochastic, ``b`` is a
    symmetric K x K matrix with entries in [0, 1].  ``theta_max`` is the uniform
    bound on the degree parameters.
    """

    theta: np.ndarray
    pi: np.ndarray
    b: np.ndarray
    theta_max: float = 10.0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        pi = np.atleast_2d(np.asarray(self.pi, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "b", b)

        n, K = pi.shape
        if theta.shape[0] != n:
            raise InvalidParametersError(f"theta has length {theta.shape[0]}, expected {n}")
        if K < 1 or K > n:
            raise InvalidParametersError(f"need 1 <= K <= n, got K={K}, n={n}")
        if b.shape != (K, K):
            raise InvalidParametersError(f"B must be {K}x{K}, got {b.shape}")
        if not np.allclose(b, b.T, rtol=0, atol=1e-12):
            raise InvalidParametersError("B must be symmetric")
        if np.any(b < 0) or np.any(b > 1):
            raise InvalidParametersError("B entries must lie in [0, 1]")
        if np.any(pi < 0):
            raise InvalidParametersError("Pi entries must be nonnegative")
        bad = np.flatnonzero(np.abs(pi.sum(axis=1) - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise InvalidParametersError(f"row {bad[0]} of Pi does not sum to 1")
        if np.any(theta <= 0):
            raise InvalidParametersError("theta entries must be strictly positive")
        if np.any(theta > self.theta_max):
            raise InvalidParametersError(f"theta exceeds the bound {self.theta_max}")

    @property
    def n(self):
        return self.pi.shape[0]

    @property
    def K(self):
        return self.pi.shape[1]

    @property
    def theta_bar(self):
        return float(self.theta.mean())

    @property
    def b_n(self):
        """sqrt(n * theta_bar^2)."""
        return float(np.sqrt(self.n) * self.theta_bar)


def build_omega(params):
    """Edge probability matrix Theta Pi B Pi' Theta.

    Raises InvalidParametersError naming the first off-diagonal (i, j) whose
    probability falls outside [0, 1].  The diagonal is returned unclipped: no
    self-loop is ever sampled from it.
    """
    tp = params.theta[:, None] * params.pi
    omega = tp @ params.b @ tp.T
    omega = 0.5 * (omega + omega.T)
    off = ~np.eye(omega.shape[0], dtype=bool)
    bad = np.argwhere(((omega < -PROB_TOL) | (omega > 1.0 + PROB_TOL)) & off)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise InvalidParametersError(
            f"edge probability Omega[{i},{j}] = {omega[i, j]:.6g} is outside [0, 1]"
        )
    diag = np.diag(omega).copy()
    omega = np.clip(omega, 0.0, 1.0)
    np.fill_diagonal(omega, diag)
    return omega


def sample_adjacency(omega, rng=None):
    """Bernoulli draw of each pair i<j with probability ``omega[i, j]``.

    One uniform is consumed per pair in row-major upper-triangular order, so the
    result is bit-reproducible for a given stream.
    """
    rng = as_generator(rng)
    n = omega.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    u = rng.random(iu.size)
    a = np.zeros((n, n), dtype=np.uint8)
    hit = u < omega[iu, ju]
    a[iu[hit], ju[hit]] = 1
    a[ju[hit], iu[hit]] = 1
    return a


def sample_graph(params, rng=None):
    return sample_adjacency(build_omega(params), rng)


def gen_theta(n, b_n, lo=0.3, hi=5.0, rng=None):
    """Uniform[lo, hi] degree parameters rescaled so sqrt(n * theta_bar^2) = b_n."""
    if b_n <= 0:
        raise InvalidParametersError(f"b_n must be positive, got {b_n}")
    if n < 1:
        raise InvalidParametersError(f"n must be >= 1, got {n}")
    if not 0 < lo <= hi:
        raise InvalidParametersError(f"need 0 < lo <= hi, got [{lo}, {hi}]")
    raw = as_generator(rng).uniform(lo, hi, size=n)
    return np.sqrt(n) * b_n * raw / raw.sum()


def make_planted_b(K, beta_n):
    """beta_n * I + (1 - beta_n) * 11'."""
    if not 0 < beta_n < 1:
        raise InvalidParametersError(f"beta_n must lie in (0, 1), got {beta_n}")
    return beta_n * np.eye(K) + (1.0 - beta_n) * np.ones((K, K))


def make_pi(n, K, pure_frac=0.5, rng=None):
    """Membership matrix with a balanced pure block followed by Dirichlet(1) rows.

    The first ``round(pure_frac * n)`` nodes are pure, cycling through the K
    communities; the remaining rows are uniform on the simplex.
    """
    if not 0 <= pure_frac <= 1:
        raise InvalidParametersError(f"pure_frac must lie in [0, 1], got {pure_frac}")
    rng = as_generator(rng)
    n_pure = int(round(pure_frac * n))
    pi = np.zeros((n, K))
    pi[np.arange(n_pure), np.arange(n_pure) % K] = 1.0
    if n_pure < n:
        mixed = rng.dirichlet(np.ones(K), size=n - n_pure)
        pi[n_pure:] = mixed / mixed.sum(axis=1, keepdims=True)
    return pi


# ---------------------------------------------------------------------------
# assumption audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditConfig:
    """Constants for the regularity conditions.

    ``degree_mode`` selects the diagonal of D_theta: ``"literal"`` uses
    E(d_i - mean(d)), ``"expected"`` uses E(d_i).
    """

    c1: float = 10.0
    c2: float = 0.05
    c3: float = 0.05
    c4: float = 0.1
    degree_mode: str = "literal"
    zero_tol: float = 1e-12


@dataclass(frozen=True)
class AssumptionReport:
    community_mass_ok: bool
    community_mass_margin: float
    g_computable: bool
    g_norm_ok: bool
    g_inv_norm_ok: bool
    alpha_ok: bool
    beta_ok: bool
    gap_ok: bool
    perron_positive_ok: bool
    perron_ratio_ok: bool
    pure_node_ok: bool
    d_theta: np.ndarray
    g: Optional[np.ndarray] = None
    g_norm: float = np.nan
    g_inv_norm: float = np.nan
    bg_spectrum: Optional[np.ndarray] = None
    alpha_n: float = np.nan
    beta_n: float = np.nan
    gap_margin: float = np.nan
    eta1: Optional[np.ndarray] = None
    perron_ratio: float = np.nan
    pure_nodes_per_community: np.ndarray = field(default_factory=lambda: np.zeros(0, int))

    @property
    def checks(self):
        return {
            "community_mass": self.community_mass_ok,
            "g_norm": self.g_norm_ok,
            "g_inv_norm": self.g_inv_norm_ok,
            "alpha": self.alpha_ok,
            "beta": self.beta_ok,
            "spectral_gap": self.gap_ok,
            "perron_positive": self.perron_positive_ok,
            "perron_ratio": self.perron_ratio_ok,
            "pure_nodes": self.pure_node_ok,
        }

    @property
    def all_ok(self):
        return all(self.checks.values())

    def to_dict(self):
        out = {f"{k}_ok": bool(v) for k, v in self.checks.items()}
        out.update(
            g_computable=self.g_computable,
            community_mass_margin=self.community_mass_margin,
            g_norm=self.g_norm,
            g_inv_norm=self.g_inv_norm,
            alpha_n=self.alpha_n,
            beta_n=self.beta_n,
            gap_margin=self.gap_margin,
            perron_ratio=self.perron_ratio,
            bg_spectrum=None if self.bg_spectrum is None else self.bg_spectrum.tolist(),
            eta1=None if self.eta1 is None else self.eta1.tolist(),
            pure_nodes_per_community=self.pure_nodes_per_community.tolist(),
        )
        return out


def audit_assumptions(params, cfg=None):
    """Evaluate the regularity conditions on (theta, Pi, B).

    A D_theta with a nonpositive diagonal entry is reported through
    ``g_computable=False`` and every G-dependent check fails; nothing is raised.
    """
    cfg = cfg or AuditConfig()
    if cfg.degree_mode not in ("literal", "expected"):
        raise InvalidParametersError(f"unknown degree_mode {cfg.degree_mode!r}")
    theta, pi, b, K = params.theta, params.pi, params.b, params.K
    omega = build_omega(params)
    exp_deg = omega.sum(axis=1) - np.diag(omega)
    d_theta = exp_deg - exp_deg.mean() if cfg.degree_mode == "literal" else exp_deg

    mass = (theta[:, None] * pi).sum(axis=0)
    mass_margin = float(mass.min() - theta.sum() / cfg.c1)

    pure = (np.abs(pi - 1.0) <= cfg.zero_tol) & (theta[:, None] >= cfg.c4 * theta.mean())
    pure_counts = pure.sum(axis=0)

    common = dict(
        community_mass_ok=mass_margin >= 0,
        community_mass_margin=mass_margin,
        pure_node_ok=bool(np.all(pure_counts > 0)),
        pure_nodes_per_community=pure_counts,
        d_theta=d_theta,
    )
    if np.any(d_theta <= 0):
        return AssumptionReport(
            g_computable=False, g_norm_ok=False, g_inv_norm_ok=False, alpha_ok=False,
            beta_ok=False, gap_ok=False, perron_positive_ok=False, perron_ratio_ok=False,
            **common,
        )

    tp = theta[:, None] * pi
    g = K * tp.T @ (tp / d_theta[:, None])
    g = 0.5 * (g + g.T)
    g_norm = float(np.linalg.norm(g, 2))
    sv = np.linalg.svd(g, compute_uv=False)
    g_inv_norm = float(1.0 / sv[-1]) if sv[-1] > 0 else np.inf

    vals, vecs = np.linalg.eig(b @ g)
    vals, vecs = vals.real, vecs.real
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    lam1, lamK = float(vals[0]), float(vals[-1])
    eta1 = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    if eta1.sum() < 0:
        eta1 = -eta1
    scale = max(abs(lam1), 1.0)
    rest_max = float(vals[1:].max()) if K > 1 else -np.inf
    gap_margin = min((1 - cfg.c2) * lam1, np.sqrt(K) / cfg.c2) - rest_max
    perron_ratio = float(eta1.min() / eta1.max()) if eta1.max() > 0 else -np.inf

    return AssumptionReport(
        g_computable=True,
        g=g,
        g_norm=g_norm,
        g_inv_norm=g_inv_norm,
        g_norm_ok=g_norm <= cfg.c1,
        g_inv_norm_ok=g_inv_norm <= cfg.c1,
        bg_spectrum=vals,
        alpha_n=lam1,
        beta_n=abs(lamK),
        alpha_ok=lam1 >= 1.0,
        beta_ok=abs(lamK) > cfg.zero_tol * scale,
        gap_ok=gap_margin >= 0,
        gap_margin=float(gap_margin),
        eta1=eta1,
        perron_positive_ok=bool(eta1.min() > 0),
        perron_ratio=perron_ratio,
        perron_ratio_ok=perron_ratio >= cfg.c3,
        **common,
    )
