"""Symmetric edge-flip (randomized response) mechanism and its debiasing."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidPrivacyBudgetError
from .streams import as_generator


def flip_probability(epsilon):
    """p_eps = 1 / (1 + e^eps)."""
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise InvalidPrivacyBudgetError(f"epsilon must be > 0, got {epsilon}")
    # expit(-eps), written to avoid overflow for large eps
    return float(np.exp(-np.logaddexp(0.0, epsilon)))


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    p_eps: float

    @classmethod
    def from_epsilon(cls, epsilon):
        return cls(float(epsilon), flip_probability(epsilon))

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidPrivacyBudgetError(f"epsilon must be > 0, got {self.epsilon}")
        if abs(self.p_eps - flip_probability(self.epsilon)) > 1e-15:
            raise InvalidPrivacyBudgetError("p_eps inconsistent with epsilon")


@dataclass(frozen=True)
class PrivatizedGraph:
    m: np.ndarray
    privacy: PrivacyParams


@dataclass(frozen=True)
class DebiasedMatrix:
    m: np.ndarray
    privacy: PrivacyParams = None

    @classmethod
    def nonprivate(cls, a):
        """Use a raw adjacency matrix directly (no mechanism applied)."""
        m = np.asarray(a, dtype=float).copy()
        np.fill_diagonal(m, 0.0)
        return cls(m, None)


def _as_privacy(privacy):
    if isinstance(privacy, PrivacyParams):
        return privacy
    return PrivacyParams.from_epsilon(privacy)


def symmetric_edge_flip(a, privacy, rng=None):
    """Release an eps-edge-LDP copy of the adjacency matrix ``a``.

    Each upper-triangular bit is flipped independently with probability p_eps
    (one uniform per pair, row-major order) and mirrored to the lower triangle.
    """
    privacy = _as_privacy(privacy)
    rng = as_generator(rng)
    a = np.asarray(a)
    n = a.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    flip = rng.random(iu.size) < privacy.p_eps
    bits = (a[iu, ju] != 0) ^ flip
    m = np.zeros((n, n), dtype=np.uint8)
    m[iu[bits], ju[bits]] = 1
    m[ju[bits], iu[bits]] = 1
    return PrivatizedGraph(m, privacy)


def debias(p):
    """(M - p_eps (11' - I)) / (1 - 2 p_eps) with the diagonal forced to zero."""
    p_eps = p.privacy.p_eps
    m = (p.m.astype(float) - p_eps) / (1.0 - 2.0 * p_eps)
    np.fill_diagonal(m, 0.0)
    return DebiasedMatrix(m, p.privacy)


@dataclass(frozen=True)
class LdpCertificate:
    epsilon: float
    p_keep: float
    p_flip: float
    # P(out | in) for (in, out) in {(1,1), (0,1), (1,0), (0,0)}
    p_one_given_one: float
    p_one_given_zero: float
    p_zero_given_one: float
    p_zero_given_zero: float
    max_ratio: float

    @property
    def relative_error(self):
        return abs(self.max_ratio - np.exp(self.epsilon)) / np.exp(self.epsilon)


def ldp_certificate(privacy, rtol=1e-12):
    """Per-entry channel probabilities and their worst-case likelihood ratio."""
    privacy = _as_privacy(privacy)
    p = privacy.p_eps
    # 1 - p computed as expit(eps) directly for accuracy
    q = float(np.exp(-np.logaddexp(0.0, -privacy.epsilon)))
    ratios = [q / p, p / q]
    cert = LdpCertificate(
        epsilon=privacy.epsilon,
        p_keep=q,
        p_flip=p,
        p_one_given_one=q,
        p_one_given_zero=p,
        p_zero_given_one=p,
        p_zero_given_zero=q,
        max_ratio=max(ratios),
    )
    if cert.relative_error > rtol:
        raise AssertionError(
            f"likelihood ratio {cert.max_ratio!r} differs from e^eps by "
            f"{cert.relative_error:.3g} (relative)"
        )
    return cert
