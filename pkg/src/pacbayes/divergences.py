"""Divergence computations and inversions.

Everything downstream (the bound catalog, the Gibbs-posterior machinery and
the oracle laboratory) is built on the handful of divergences collected here:
the binary KL divergence ``kl(p|q)`` and its upper inverse, discrete KL and
chi-square divergences, the closed-form KL between isotropic Gaussians, the
KL between nested uniform balls, and the Donsker-Varadhan gap that certifies
Gibbs optimality.

All logarithms are natural (nats).  All functions are pure: they never
mutate their inputs and hold no state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "DiscreteDistribution",
    "DiagonalGaussian",
    "kl_bernoulli",
    "kl_inverse_upper",
    "kl_discrete",
    "chi2_discrete",
    "kl_gaussian_diag",
    "kl_uniform_ball",
    "dv_gap",
    "gibbs_reweight",
]

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability mass vector over a finite hypothesis index set {0..M-1}.

    Weights must be nonnegative and sum to 1 within 1e-12.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1 within {_WEIGHT_SUM_TOL}, got {w.sum()!r}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, m: int) -> "DiscreteDistribution":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def dirac(cls, m: int, index: int) -> "DiscreteDistribution":
        w = np.zeros(m)
        w[index] = 1.0
        return cls(w)

    @classmethod
    def from_weights(cls, weights) -> "DiscreteDistribution":
        """Normalize an arbitrary nonnegative weight vector."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not np.isfinite(total) or total <= 0:
            raise ValueError("weights must have a positive finite sum")
        return cls(w / total)


@dataclass(frozen=True)
class DiagonalGaussian:
    """Isotropic Gaussian N(mean, std^2 I_d) used as a variational posterior.

    ``d = 0`` is tolerated as a degenerate point mass with no parameters
    (it arises in the variational optimizer's trivial edge case).
    """

    mean: np.ndarray = field()
    std: float = 1.0

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if m.ndim != 1:
            raise ValueError("mean must be a vector")
        if not np.all(np.isfinite(m)):
            raise ValueError("mean must be finite")
        if not (self.std > 0):
            raise ValueError("std must be positive")
        m.flags.writeable = False
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "std", float(self.std))

    @property
    def dim(self) -> int:
        return int(self.mean.size)


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if math.isnan(value) or value < 0.0 or value > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), in nats.

    Uses the 0*log(0) = 0 convention at p in {0, 1}.  Returns ``math.inf``
    when q in {0, 1} and p != q, so downstream bounds saturate cleanly
    instead of overflowing.
    """
    p = _check_probability("p", p)
    q = _check_probability("q", q)
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    # Tiny negative values can appear from rounding when p ~ q.
    return max(out, 0.0)


def kl_inverse_upper(q: float, b: float, tol: float = 1e-9) -> float:
    """Largest p in [q, 1] with kl(q|p) <= b, by bisection.

    This is the inversion used to turn Seeger-style statements
    kl(emp | true) <= b into explicit risk bounds.  kl(q|.) is continuous
    and increasing on [q, 1), which makes bisection exact up to ``tol``.
    """
    q = _check_probability("q", q)
    b = float(b)
    if b < 0:
        raise ValueError(f"budget b must be nonnegative, got {b!r}")
    if b == 0.0 or q == 1.0:
        return q if q < 1.0 else 1.0
    if kl_bernoulli(q, 1.0) <= b:  # only possible when q == 1, kept for safety
        return 1.0
    lo, hi = q, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kl_bernoulli(q, mid) <= b:
            lo = mid
        else:
            hi = mid
    return lo


def _check_same_support(rho: DiscreteDistribution, pi: DiscreteDistribution) -> None:
    if rho.size != pi.size:
        raise ValueError(f"support sizes differ: {rho.size} vs {pi.size}")


def _safe_log(w: np.ndarray) -> np.ndarray:
    """Elementwise log with log(0) = -inf and no runtime warnings."""
    out = np.full(w.shape, -np.inf)
    np.log(w, out=out, where=w > 0)
    return out


def kl_discrete(rho: DiscreteDistribution, pi: DiscreteDistribution) -> float:
    """KL(rho || pi) = sum_theta rho(theta) log(rho(theta)/pi(theta)).

    Terms with rho(theta) = 0 contribute nothing; returns ``math.inf`` as
    soon as rho charges an index where pi vanishes.
    """
    _check_same_support(rho, pi)
    r, p = rho.weights, pi.weights
    mask = r > 0
    if np.any(p[mask] == 0):
        return math.inf
    # clamp float noise on near-degenerate weights; the divergence is >= 0
    return max(float(np.sum(r[mask] * np.log(r[mask] / p[mask]))), 0.0)


def chi2_discrete(rho: DiscreteDistribution, pi: DiscreteDistribution) -> float:
    """Chi-square divergence chi^2(rho || pi) = sum pi [(rho/pi)^2 - 1]."""
    _check_same_support(rho, pi)
    r, p = rho.weights, pi.weights
    if np.any(r[p == 0] > 0):
        return math.inf
    mask = p > 0
    return max(float(np.sum(r[mask] ** 2 / p[mask]) - np.sum(p[mask])), 0.0)


def kl_gaussian_diag(rho: DiagonalGaussian, prior_std: float) -> float:
    """KL( N(m, s^2 I_d) || N(0, sigma^2 I_d) ), closed form.

    Equals ||m||^2 / (2 sigma^2) + (d/2) [s^2/sigma^2 + log(sigma^2/s^2) - 1].
    """
    if not (prior_std > 0):
        raise ValueError("prior_std must be positive")
    s, sigma = rho.std, float(prior_std)
    d = rho.dim
    ratio = (s / sigma) ** 2
    return float(
        np.dot(rho.mean, rho.mean) / (2.0 * sigma**2)
        + 0.5 * d * (ratio - math.log(ratio) - 1.0)
    )


def kl_uniform_ball(d: int, big_radius: float, small_radius: float) -> float:
    """KL between uniform laws on nested d-balls: d * log(B/s).

    The small ball of radius ``small_radius`` must sit inside the big one;
    the divergence is the log volume ratio.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not (0 < small_radius <= big_radius):
        raise ValueError("radii must satisfy 0 < s <= B")
    return d * math.log(big_radius / small_radius)


def gibbs_reweight(pi: DiscreteDistribution, h) -> DiscreteDistribution:
    """The Gibbs measure pi_h with weights proportional to pi(theta) e^{h(theta)}.

    Computed in the log domain (log-sum-exp with max subtraction), so |h|
    up to ~1e6 is safe.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != pi.weights.shape:
        raise ValueError("h must match the support size")
    if not np.all(np.isfinite(h)):
        raise ValueError("h must be finite")
    logw = _safe_log(pi.weights) + h
    logw -= logsumexp(logw)
    w = np.exp(logw)
    return DiscreteDistribution(w / w.sum())


def dv_gap(h, rho: DiscreteDistribution, pi: DiscreteDistribution) -> float:
    """Gap in the Donsker-Varadhan variational formula.

    Returns log E_pi[e^h] - (E_rho[h] - KL(rho||pi)).  The gap is always
    >= 0 and vanishes exactly when rho is the Gibbs measure pi_h; it equals
    KL(rho || pi_h).  A +inf KL propagates to a +inf gap.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != rho.weights.shape:
        raise ValueError("h must match the support size")
    _check_same_support(rho, pi)
    if not np.all(np.isfinite(h)):
        raise ValueError("h must be finite")
    kl = kl_discrete(rho, pi)
    if math.isinf(kl):
        return math.inf
    lhs = float(logsumexp(_safe_log(pi.weights) + h))
    rhs = float(np.dot(rho.weights, h)) - kl
    return lhs - rhs
