"""Permutation-minimised L1 loss, theoretical rates and risk integrals."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidParametersError


@dataclass(frozen=True)
class LossReport:
    loss: float
    best_permutation: np.ndarray  # pi_hat[:, best_permutation] aligns with pi
    per_node_l1: np.ndarray


def _check_pair(pi_hat, pi):
    pi_hat = np.asarray(pi_hat, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if pi_hat.shape != pi.shape or pi.ndim != 2:
        raise ValueError(f"shape mismatch: {pi_hat.shape} vs {pi.shape}")
    return pi_hat, pi


def _report(pi_hat, pi, perm):
    per_node = np.abs(pi_hat[:, perm] - pi).sum(axis=1)
    return LossReport(float(per_node.mean()), np.asarray(perm, dtype=np.int64), per_node)


def permutation_loss(pi_hat, pi, method="assignment"):
    """min over column relabelings T of mean_i ||(T pi_hat)_i - pi_i||_1.

    ``method="assignment"`` solves the K x K linear assignment on the cost
    C[a, b] = sum_i |pi_hat[i, a] - pi[i, b]|; ``method="brute"`` enumerates
    all K! permutations.
    """
    pi_hat, pi = _check_pair(pi_hat, pi)
    K = pi.shape[1]
    if method == "assignment":
        cost = np.abs(pi_hat[:, :, None] - pi[:, None, :]).sum(axis=0)
        rows, cols = linear_sum_assignment(cost)
        perm = np.empty(K, dtype=np.int64)
        perm[cols] = rows
        return _report(pi_hat, pi, perm)
    if method == "brute":
        best = None
        for perm in itertools.permutations(range(K)):
            val = np.abs(pi_hat[:, list(perm)] - pi).sum(axis=1).mean()
            if best is None or val < best[0]:
                best = (val, perm)
        return _report(pi_hat, pi, list(best[1]))
    raise ValueError(f"unknown method {method!r}")


def coth_factor(epsilon):
    """(e^eps + 1) / (e^eps - 1); 1 in the non-private limit."""
    if np.isinf(epsilon):
        return 1.0
    if epsilon <= 0:
        raise InvalidParametersError(f"epsilon must be > 0, got {epsilon}")
    return float(1.0 / np.tanh(epsilon / 2.0))


def compute_err_n(K, delta_n, n, theta_bar, epsilon):
    """K^{3/2} coth(eps/2) / (delta_n sqrt(n theta_bar^2))."""
    if delta_n <= 0 or n < 1 or theta_bar <= 0 or epsilon <= 0:
        raise InvalidParametersError("delta_n, n, theta_bar and epsilon must be positive")
    return float(K**1.5 / (delta_n * np.sqrt(n) * theta_bar) * coth_factor(epsilon))


def compute_delta_n(alpha_n, beta_n, K):
    """min{beta_n, alpha_n / sqrt(K)}."""
    return float(min(beta_n, alpha_n / np.sqrt(K)))


def _relative_degrees(theta, relative=False):
    theta = np.asarray(theta, dtype=float)
    return theta if relative else theta / theta.mean()


def risk_bound_integral(err_n, theta, relative=False):
    """Integral of min{err_n / (t ^ 1), 1} against the empirical law of theta/mean(theta).

    With ``relative=True`` the values t are passed directly.
    """
    t = np.minimum(_relative_degrees(theta, relative), 1.0)
    return float(np.minimum(err_n / t, 1.0).mean())


def lower_bound_integral(err_n, theta, relative=False):
    """Integral of min{err_n / sqrt(t ^ 1), 1} against the same law."""
    t = np.minimum(_relative_degrees(theta, relative), 1.0)
    return float(np.minimum(err_n / np.sqrt(t), 1.0).mean())


@dataclass(frozen=True)
class TheoryDiagnostics:
    err_n: float
    delta_n: float
    alpha_n: float
    beta_n: float
    coth_factor: float
    f_n: np.ndarray
    risk_integral: float
    lower_integral: float
    log_n_err_sq: float

    @property
    def gap_ratio(self):
        """Upper over lower integral; absorbs the sqrt(log n) and constant factors."""
        return self.risk_integral / self.lower_integral if self.lower_integral > 0 else np.inf

    def to_dict(self):
        return {
            "err_n": self.err_n,
            "delta_n": self.delta_n,
            "alpha_n": self.alpha_n,
            "beta_n": self.beta_n,
            "coth_factor": self.coth_factor,
            "risk_integral": self.risk_integral,
            "lower_integral": self.lower_integral,
            "gap_ratio": self.gap_ratio,
            "log_n_err_sq": self.log_n_err_sq,
            "symbolic_factors": "upper bound carries C0*sqrt(log n); lower bound carries C0'",
        }


def theory_diagnostics(theta, K, epsilon, alpha_n, beta_n):
    """Rates and risk integrals for degree parameters ``theta``.

    ``epsilon=inf`` gives the non-private rate.  alpha_n and beta_n are usually
    lambda_1(BG) and |lambda_K(BG)| from the assumption audit.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    delta_n = compute_delta_n(alpha_n, beta_n, K)
    cf = coth_factor(epsilon)
    if np.isinf(epsilon):
        err = float(K**1.5 / (delta_n * np.sqrt(n) * theta.mean()))
    else:
        err = compute_err_n(K, delta_n, n, theta.mean(), epsilon)
    return TheoryDiagnostics(
        err_n=err,
        delta_n=delta_n,
        alpha_n=float(alpha_n),
        beta_n=float(beta_n),
        coth_factor=cf,
        f_n=np.sort(_relative_degrees(theta)),
        risk_integral=risk_bound_integral(err, theta),
        lower_integral=lower_bound_integral(err, theta),
        log_n_err_sq=float(np.log(n) * err**2),
    )
