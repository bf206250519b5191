"""Oracle-inequality laboratory.

Synthetic tasks with analytically known true risks, exact Bernstein-constant
computation, oracle right-hand-side evaluators (plain, probability,
fast-rate, dimension-based, localized), Monte Carlo violation testing of
the probability statements behind every empirical bound, convergence-rate
measurement, and direct checks of the exponential-moment inequalities.

Every experiment derives per-trial RNG streams deterministically from
(seed, trial index), so runs are bit-reproducible and trial order (serial
or parallel, capped by PACBAYES_THREADS) never changes a report.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import bounds
from .bounds import BoundInput, bernstein_g
from .divergences import (
    DiscreteDistribution,
    chi2_discrete,
    gibbs_reweight,
    kl_discrete,
    _safe_log,
)
from .posteriors import gibbs_posterior
from ._util import child_rng, run_trials

__all__ = [
    "SyntheticTask",
    "RiskTableTask",
    "ThresholdMarginTask",
    "HeavyTailTask",
    "make_synthetic_task",
    "BernsteinEstimate",
    "estimate_bernstein_constant",
    "oracle_bound_rhs",
    "pi_dimension",
    "LocalizedOracle",
    "localized_oracle_rhs",
    "ExperimentReport",
    "violation_experiment",
    "rate_experiment",
    "verify_exponential_moment",
    "MomentReport",
]

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Synthetic tasks
# ---------------------------------------------------------------------------


class SyntheticTask:
    """A generative task whose true risks are known in closed form.

    Subclasses expose: ``true_risk`` (vector R(theta)), ``theta_star``
    (unique argmin index), ``C`` (loss range), samplers for loss matrices
    and for the empirical-risk sufficient statistic, and the exact second
    moments E[(loss(theta) - loss(theta*))^2] behind Bernstein's condition.
    """

    kind: str = "abstract"
    C: float = 1.0
    seed: int = 0

    true_risk: np.ndarray
    theta_star: int

    @property
    def m(self) -> int:
        return int(self.true_risk.size)

    @property
    def risk_star(self) -> float:
        return float(self.true_risk[self.theta_star])

    @property
    def gaps(self) -> np.ndarray:
        return self.true_risk - self.risk_star

    def sample_losses(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def sample_emp_risk(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Column means of a fresh n-example loss matrix.

        Subclasses may sample the sufficient statistic directly instead of
        materializing the matrix; the distribution is identical.
        """
        return self.sample_losses(n, rng).mean(axis=0)

    def second_moments_vs_star(self) -> np.ndarray:
        raise NotImplementedError

    def bernstein_constant_known(self) -> Optional[float]:
        """Closed-form Bernstein constant, when the construction pins one."""
        return None


def _check_unique_argmin(values: np.ndarray) -> int:
    star = int(np.argmin(values))
    if np.sum(values == values[star]) != 1:
        raise ValueError("the true-risk minimizer must be unique")
    return star


class RiskTableTask(SyntheticTask):
    """Per-hypothesis Bernoulli losses with error rates p_j (0-1 loss, C=1).

    Losses are independent across hypotheses by default; with
    ``shared_noise=True`` they are coupled through a common uniform field
    loss_i(theta_j) = 1{U_i < p_j}, the realistic correlated case.  Both
    satisfy every theorem (they are distribution-free over the data law).
    """

    kind = "risk_table"
    C = 1.0

    def __init__(self, p, shared_noise: bool = False, seed: int = 0):
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("p must be a nonempty vector")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("error rates must lie in [0, 1]")
        self.p = p
        self.true_risk = p.copy()
        self.theta_star = _check_unique_argmin(p)
        self.shared_noise = bool(shared_noise)
        self.seed = seed

    def sample_losses(self, n, rng):
        if self.shared_noise:
            u = rng.random(n)
            return (u[:, None] < self.p[None, :]).astype(float)
        return (rng.random((n, self.m)) < self.p[None, :]).astype(float)

    def sample_emp_risk(self, n, rng):
        if self.shared_noise:
            u = rng.random(n)
            return (u[:, None] < self.p[None, :]).mean(axis=0)
        return rng.binomial(n, self.p) / n

    def second_moments_vs_star(self):
        ps = self.p[self.theta_star]
        if self.shared_noise:
            return np.abs(self.p - ps)
        out = self.p + ps - 2.0 * self.p * ps
        out[self.theta_star] = 0.0  # same variable, not an independent copy
        return out

    def bernstein_constant_known(self):
        if self.p[self.theta_star] == 0.0:
            return 1.0  # noiseless classification
        return None


class ThresholdMarginTask(SyntheticTask):
    """Threshold classifiers on uniform inputs under a margin condition.

    Inputs X ~ U[0,1]; labels follow the best threshold theta* and are
    flipped with probability 1/2 - tau, so |P(Y=1|x) - 1/2| = tau
    everywhere.  Then R(theta) - R(theta*) = 2 tau |theta - theta*| and
    Bernstein's condition holds with K = 1/(2 tau) exactly.
    """

    kind = "threshold_margin"
    C = 1.0

    def __init__(self, tau: float, thresholds, star_index: Optional[int] = None, seed: int = 0):
        if not (0 < tau <= 0.5):
            raise ValueError("tau must lie in (0, 1/2]")
        thr = np.asarray(thresholds, dtype=float)
        if thr.ndim != 1 or thr.size == 0:
            raise ValueError("thresholds must be a nonempty vector")
        if np.unique(thr).size != thr.size:
            raise ValueError("thresholds must be distinct")
        self.tau = float(tau)
        self.thresholds = thr
        self.star_index = thr.size // 2 if star_index is None else int(star_index)
        self.seed = seed
        dist = np.abs(thr - thr[self.star_index])
        self.true_risk = (0.5 - tau) + 2.0 * tau * dist
        self.theta_star = _check_unique_argmin(self.true_risk)

    def _sample_xy(self, n, rng):
        x = rng.random(n)
        flip = rng.random(n) < (0.5 - self.tau)
        y = (x >= self.thresholds[self.star_index]) ^ flip
        return x, y

    def sample_losses(self, n, rng):
        x, y = self._sample_xy(n, rng)
        pred = x[:, None] >= self.thresholds[None, :]
        return (pred != y[:, None]).astype(float)

    def sample_emp_risk(self, n, rng):
        x, y = self._sample_xy(n, rng)
        pred = x[:, None] >= self.thresholds[None, :]
        return (pred != y[:, None]).mean(axis=0)

    def second_moments_vs_star(self):
        # losses differ exactly on the disagreement region of the two thresholds
        return np.abs(self.thresholds - self.thresholds[self.star_index])

    def bernstein_constant_known(self):
        return 1.0 / (2.0 * self.tau)


class HeavyTailTask(SyntheticTask):
    """Unbounded losses driven by a shared Pareto shock with known variance.

    loss_i(theta_j) = mean_j + scale_j * (W_i - E[W]) where W is a standard
    Pareto with shape alpha > 2, so every loss has exact mean ``means[j]``
    and exact standard deviation ``sds[j]``; kappa = max sds^2 bounds all
    variances.  The loss range C is infinite: only moment-based bounds
    (chi-square) apply.
    """

    kind = "heavy_tail"
    C = math.inf

    def __init__(self, means, sds, tail_shape: float = 2.5, seed: int = 0):
        means = np.asarray(means, dtype=float)
        sds = np.broadcast_to(np.asarray(sds, dtype=float), means.shape).copy()
        if means.ndim != 1 or means.size == 0:
            raise ValueError("means must be a nonempty vector")
        if np.any(sds < 0):
            raise ValueError("sds must be nonnegative")
        if not (tail_shape > 2):
            raise ValueError("tail_shape must exceed 2 so the variance exists")
        self.means = means
        self.sds = sds
        self.alpha = float(tail_shape)
        self.seed = seed
        self.true_risk = means.copy()
        self.theta_star = _check_unique_argmin(means)
        a = self.alpha
        self._w_mean = a / (a - 1.0)
        self._w_sd = math.sqrt(a / ((a - 1.0) ** 2 * (a - 2.0)))

    @property
    def kappa(self) -> float:
        return float(np.max(self.sds) ** 2)

    def _shocks(self, n, rng):
        return (1.0 + rng.pareto(self.alpha, size=n) - self._w_mean) / self._w_sd

    def sample_losses(self, n, rng):
        z = self._shocks(n, rng)
        return self.means[None, :] + z[:, None] * self.sds[None, :]

    def sample_emp_risk(self, n, rng):
        return self.means + self._shocks(n, rng).mean() * self.sds

    def second_moments_vs_star(self):
        dm = self.means - self.means[self.theta_star]
        ds = self.sds - self.sds[self.theta_star]
        return dm**2 + ds**2


def make_synthetic_task(kind: str, params: dict, seed: int = 0) -> SyntheticTask:
    """Build a synthetic task from a JSON-friendly parameter dict.

    kinds and parameters:
      risk_table       {"p": [...], "shared_noise": bool?}
      threshold_margin {"tau": float, "grid_size": int} or {"tau", "thresholds": [...]}
      heavy_tail       {"means": [...], "sds": [...] or float, "tail_shape": float?}
    """
    params = dict(params)
    if kind == "risk_table":
        return RiskTableTask(params["p"], shared_noise=params.get("shared_noise", False), seed=seed)
    if kind == "threshold_margin":
        if "thresholds" in params:
            thr = params["thresholds"]
        else:
            thr = np.linspace(0.0, 1.0, int(params["grid_size"]))
        return ThresholdMarginTask(
            params["tau"], thr, star_index=params.get("star_index"), seed=seed
        )
    if kind == "heavy_tail":
        return HeavyTailTask(
            params["means"],
            params.get("sds", params.get("sd", 1.0)),
            tail_shape=params.get("tail_shape", 2.5),
            seed=seed,
        )
    raise ValueError(f"unknown task kind {kind!r}")


# ---------------------------------------------------------------------------
# Bernstein constant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BernsteinEstimate:
    """The smallest K with E[(loss(theta)-loss(theta*))^2] <= K (R(theta)-R(theta*)).

    ``ratios`` holds the per-hypothesis diagnostics (NaN at theta* and at
    skipped zero/zero entries); K = +inf flags a hypothesis with matching
    risk but mismatched losses, where the condition fails outright.
    """

    K: float
    ratios: np.ndarray
    kappa_exponent: int = 1


def estimate_bernstein_constant(
    task: SyntheticTask,
    mode: str = "exact",
    samples: int = 100_000,
    seed: int = 0,
) -> BernsteinEstimate:
    """Bernstein constant of a task, exactly or by Monte Carlo.

    ``mode="exact"`` uses the task's closed-form second moments (available
    because the outcome spaces are enumerable), so the result is not
    statistical.  ``mode="statistical"`` replaces the second moments with
    a seeded sample average; the risk gaps stay exact.
    """
    if mode == "exact":
        second = task.second_moments_vs_star()
    elif mode == "statistical":
        rng = child_rng(seed, 0)
        losses = task.sample_losses(samples, rng)
        diff = losses - losses[:, [task.theta_star]]
        second = (diff**2).mean(axis=0)
    else:
        raise ValueError("mode must be 'exact' or 'statistical'")
    gaps = task.gaps
    ratios = np.full(task.m, math.nan)
    K = 0.0
    for j in range(task.m):
        if j == task.theta_star:
            continue
        if gaps[j] <= 0:
            if second[j] > 1e-12:
                ratios[j] = math.inf
                K = math.inf
            continue  # zero numerator over zero denominator: skipped
        ratios[j] = second[j] / gaps[j]
        K = max(K, ratios[j])
    return BernsteinEstimate(K=float(K), ratios=ratios)


# ---------------------------------------------------------------------------
# Oracle right-hand sides
# ---------------------------------------------------------------------------


def _rho_family(pi: DiscreteDistribution, R: np.ndarray, extra_betas=()):
    """Gibbs reweightings of pi by the true risk, plus all Dirac masses.

    The Gibbs family {pi_{-beta R}} contains the exact minimizer of
    E_rho[R] + c KL(rho||pi) for every c > 0, so an infimum over this
    family (with the matching beta included) is exact, not a heuristic.
    """
    betas = np.concatenate(
        [np.array([0.0]), np.geomspace(1e-6, 1e8, 141), np.asarray(extra_betas, dtype=float)]
    )
    for beta in betas:
        yield gibbs_reweight(pi, -beta * R)
    for j in range(pi.size):
        if pi.weights[j] > 0:
            yield DiscreteDistribution.dirac(pi.size, j)


def oracle_bound_rhs(
    task: SyntheticTask,
    pi: DiscreteDistribution,
    lam: Optional[float],
    variant: str,
    *,
    n: int,
    eps: Optional[float] = None,
    K: Optional[float] = None,
) -> float:
    """Right-hand side of an oracle inequality, with an exact infimum over rho.

    variants:
      "expectation"  inf_rho E_rho[R] + lam C^2/(8n) + KL(rho||pi)/lam
      "probability"  inf_rho E_rho[R] + lam C^2/(4n) + 2 (KL + log(2/eps))/lam
      "fast"         2 inf_rho {E_rho[R] - R* + max(2K, C) KL(rho||pi)/n},
                     the excess-risk form at the prescribed lam = n/max(2K, C)
    """
    R = task.true_risk
    C = task.C
    if variant == "fast":
        if K is None:
            K = estimate_bernstein_constant(task).K
        scale = max(2.0 * K, C)
        lam_star = n / scale
        best = math.inf
        for rho in _rho_family(pi, R, extra_betas=(lam_star,)):
            kl = kl_discrete(rho, pi)
            if math.isinf(kl):
                continue
            excess = max(float(np.dot(rho.weights, R)) - task.risk_star, 0.0)
            best = min(best, excess + scale * kl / n)
        return 2.0 * best
    if lam is None or not (lam > 0):
        raise ValueError("lam must be positive for this variant")
    if variant == "expectation":
        const = lam * C**2 / (8.0 * n)
        kl_coef, kl_shift = 1.0 / lam, 0.0
        beta_opt = lam
    elif variant == "probability":
        if eps is None or not (0 < eps < 1):
            raise ValueError("the probability variant needs eps in (0, 1)")
        const = lam * C**2 / (4.0 * n)
        kl_coef, kl_shift = 2.0 / lam, 2.0 * math.log(2.0 / eps) / lam
        beta_opt = lam / 2.0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    best = math.inf
    for rho in _rho_family(pi, R, extra_betas=(beta_opt,)):
        kl = kl_discrete(rho, pi)
        if math.isinf(kl):
            continue
        val = float(np.dot(rho.weights, R)) + const + kl_coef * kl + kl_shift
        best = min(best, val)
    return best


def _golden_max(fn, lo: float, hi: float, rel_tol: float = 1e-6) -> tuple[float, float]:
    """Golden-section maximization of fn over log-spaced [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(math.exp(c)), fn(math.exp(d))
    while (b - a) > rel_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(math.exp(d))
    x = math.exp(0.5 * (a + b))
    return x, fn(x)


def pi_dimension(
    pi: DiscreteDistribution, true_risk, C: float
) -> tuple[float, float]:
    """Catoni's pi-dimension: sup_beta beta * E_{pi_{-beta R}}[R - R*].

    Maximized by golden-section search on log(beta) over [1e-6, 1e8] to
    relative tolerance 1e-6, guarded by a 1000-point log-grid scan; a
    disagreement beyond 1e-6 is logged and resolved in favor of the grid.
    Returns (d_pi, beta_star); all-equal risks give (0, NaN).
    """
    R = np.asarray(true_risk, dtype=float)
    if R.shape != pi.weights.shape:
        raise ValueError("true_risk must match the prior support")
    gaps = R - R.min()
    if np.all(gaps == 0):
        return 0.0, math.nan
    logpi = _safe_log(pi.weights)

    def objective(beta: float) -> float:
        logw = logpi - beta * gaps
        logw = logw - logsumexp(logw)
        return beta * float(np.dot(np.exp(logw), gaps))

    beta_g, val_g = _golden_max(objective, 1e-6, 1e8)
    grid = np.geomspace(1e-6, 1e8, 1000)
    grid_vals = np.array([objective(b) for b in grid])
    k = int(np.argmax(grid_vals))
    if grid_vals[k] > val_g + 1e-6:
        logger.warning(
            "pi_dimension: golden-section (%.6g at beta=%.3g) disagrees with grid scan "
            "(%.6g at beta=%.3g); refining around the grid optimum",
            val_g, beta_g, grid_vals[k], grid[k],
        )
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, grid.size - 1)]
        beta_g, val_g = _golden_max(objective, lo, hi)
    if grid_vals[k] > val_g:
        beta_g, val_g = float(grid[k]), float(grid_vals[k])
    return float(val_g), float(beta_g)


@dataclass(frozen=True)
class LocalizedOracle:
    """Result of the localized oracle evaluation.

    value              inf over rho of 3 (E_rho R - R*) + 4 max(2K,C) KL(rho||pi_{-lam/4 R})/n
    closed_form        the delta_{theta*} choice, 4 max(2K,C) log(sum_theta e^{-n gap/(4 max(2K,C))})/n
                       (the displayed finite-case sum when pi is uniform)
    split_displayed    the m_tau split exactly as displayed, m_tau + e^{-n tau/(4c)} (M - m_tau)
    split_consistent   the split consistent with m_tau counting gaps >= tau
    """

    value: float
    closed_form: float
    lam: float
    scale: float
    tau: float
    m_tau: int
    split_displayed: float
    split_consistent: float


def localized_oracle_rhs(
    task: SyntheticTask,
    pi: DiscreteDistribution,
    K: float,
    n: int,
    tau: Optional[float] = None,
) -> LocalizedOracle:
    """Localized oracle right-hand side at the fast-rate temperature.

    Localization replaces the prior with its Gibbs reweighting by the true
    risk, pi_{-(lam/4) R} with lam = n/max(2K, C); choosing rho in the same
    Gibbs family makes the KL term collapse and removes the log(M) factor.
    Both m_tau split conventions are reported as diagnostics because the
    source display pairs the decayed exponential with the wrong count.
    """
    R = task.true_risk
    C = task.C
    scale = max(2.0 * K, C)
    lam = n / scale
    beta = lam / 4.0
    local_prior = gibbs_reweight(pi, -beta * R)
    best = math.inf
    for rho in _rho_family(pi, R, extra_betas=(beta, lam)):
        kl = kl_discrete(rho, local_prior)
        if math.isinf(kl):
            continue
        excess = max(float(np.dot(rho.weights, R)) - task.risk_star, 0.0)
        best = min(best, 3.0 * excess + 4.0 * scale * kl / n)

    gaps = task.gaps
    kl_star = kl_discrete(DiscreteDistribution.dirac(task.m, task.theta_star), local_prior)
    closed_form = 4.0 * scale * kl_star / n

    if tau is None:
        positive = gaps[gaps > 0]
        tau = float(positive.min()) if positive.size else 0.0
    m_tau = int(np.sum(gaps >= tau)) if tau > 0 else task.m
    decay = math.exp(-n * tau / (4.0 * scale)) if tau > 0 else 1.0
    coef = 4.0 * scale / n
    split_displayed = coef * math.log(m_tau + decay * (task.m - m_tau)) if tau > 0 else math.nan
    split_consistent = coef * math.log((task.m - m_tau) + decay * m_tau) if tau > 0 else math.nan
    return LocalizedOracle(
        value=float(best),
        closed_form=float(closed_form),
        lam=lam,
        scale=scale,
        tau=tau,
        m_tau=m_tau,
        split_displayed=split_displayed,
        split_consistent=split_consistent,
    )


# ---------------------------------------------------------------------------
# Violation and rate experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentReport:
    """Summary of a seeded Monte Carlo experiment.

    ``rows`` holds one record per trial (or per grid point for rate
    experiments) with keys n, seed, excess_risk, bound_value, violated.
    ``se`` is the binomial standard error of the observed violation rate.
    """

    trials: int
    violations: int
    violation_rate: float
    se: float
    mean_bound: float
    mean_true_risk: float
    rows: list = field(default_factory=list)
    slope: Optional[float] = None
    details: dict = field(default_factory=dict)


def _resolve_lambda(lam, m: int, n: int, eps: float, C: float) -> float:
    """Turn a lambda spec into a number.

    "closed_form" uses the data-independent pick sqrt(8 n log(M/eps))/C,
    i.e. the closed-form minimizer at the Dirac complexity log M under a
    uniform prior.  Keeping the choice data-free is what preserves the
    fixed-lambda theorems' validity inside the violation harness.
    """
    if lam == "closed_form" or lam is None:
        return bounds.select_lambda_closed_form(math.log(m), n, eps, C)
    lam = float(lam)
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    return lam


def _build_posterior(rule: str, pi, r, lam_value, fixed_rho):
    if rule == "gibbs":
        return gibbs_posterior(pi, r, lam_value)
    if rule == "erm_dirac":
        return DiscreteDistribution.dirac(r.size, int(np.argmin(r)))
    if rule == "fixed_rho":
        return fixed_rho if fixed_rho is not None else pi
    raise ValueError(f"unknown posterior rule {rule!r}")


def violation_experiment(
    task: SyntheticTask,
    bound_id: str,
    posterior_rule: str,
    n: int,
    eps: float,
    trials: int,
    seed: int,
    *,
    lam="closed_form",
    xi: float = 0.0,
    grid_kind: str = "geometric",
    pi: Optional[DiscreteDistribution] = None,
    fixed_rho: Optional[DiscreteDistribution] = None,
    corruption: float = 1.0,
) -> ExperimentReport:
    """Estimate how often a bound's probability statement fails.

    Each trial samples a fresh empirical-risk realization, forms the
    posterior per ``posterior_rule`` ("gibbs", "erm_dirac", "fixed_rho"),
    evaluates the bound, and compares against the exact E_rho[R] from the
    task's closed form; a violation is E_rho[R] > corruption * bound.
    ``corruption`` < 1 deliberately falsifies the certificate and serves as
    a sensitivity control for the harness itself.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if bound_id == "chi_square" and not isinstance(task, HeavyTailTask):
        if getattr(task, "kappa", None) is None:
            raise ValueError("chi_square bound needs a task with a variance bound kappa")
    pi = pi or DiscreteDistribution.uniform(task.m)
    C = task.C if math.isfinite(task.C) else 1.0
    R = task.true_risk
    lam_value = None
    if bound_id in ("catoni_linear", "catoni_phi", "subgaussian", "localized_empirical") or (
        posterior_rule == "gibbs" and bound_id != "lambda_grid"
    ):
        lam_value = _resolve_lambda(lam, task.m, n, eps, C)
    if bound_id == "thiemann":
        lam_thiemann = 1.0 if lam in (None, "closed_form") else float(lam)
    oracle_value = None
    if bound_id == "oracle_probability":
        lam_value = _resolve_lambda(lam, task.m, n, eps, C)
        oracle_value = oracle_bound_rhs(
            task, pi, lam_value, "probability", n=n, eps=eps
        )
    if bound_id == "lambda_grid":
        grid = (
            bounds.lambda_grid_geometric(n)
            if grid_kind == "geometric"
            else bounds.lambda_grid_arithmetic(n)
        )

    def one_trial(t: int):
        rng = child_rng(seed, t)
        r = task.sample_emp_risk(n, rng)
        if bound_id == "lambda_grid":
            entries = []
            rhos = []
            for g in grid:
                rho_g = gibbs_posterior(pi, r, g)
                rhos.append(rho_g)
                entries.append((float(g), float(np.dot(rho_g.weights, r)), kl_discrete(rho_g, pi)))
            cert = bounds.bound_lambda_grid(entries, n, eps, C)
            rho = rhos[next(i for i, e in enumerate(entries) if e[0] == cert.lam)]
            value = cert.value
        else:
            rho = _build_posterior(posterior_rule, pi, r, lam_value, fixed_rho)
            emp = float(np.dot(rho.weights, r))
            kl = kl_discrete(rho, pi)
            if bound_id == "union_finite":
                value = bounds.bound_union_finite(float(r.min()), n, eps, C, M=task.m).value
            elif bound_id == "catoni_linear":
                value = bounds.bound_catoni_linear(
                    BoundInput(emp, kl, n, eps, C), lam_value
                ).value
            elif bound_id == "mcallester":
                value = bounds.bound_mcallester_maurer(BoundInput(emp, kl, n, eps, C)).value
            elif bound_id == "seeger":
                value = bounds.bound_seeger_maurer(BoundInput(emp, kl, n, eps, C)).value
            elif bound_id == "tolstikhin_seldin":
                value = bounds.bound_tolstikhin_seldin(BoundInput(emp, kl, n, eps, C)).value
            elif bound_id == "thiemann":
                value = bounds.bound_thiemann(BoundInput(emp, kl, n, eps, C), lam_thiemann).value
            elif bound_id == "catoni_phi":
                value = bounds.bound_catoni_phi(BoundInput(emp, kl, n, eps, C), lam_value).value
            elif bound_id == "subgaussian":
                value = bounds.bound_subgaussian(BoundInput(emp, kl, n, eps, C), lam_value).value
            elif bound_id == "chi_square":
                inp = BoundInput(
                    emp, kl, n, eps, C=math.inf,
                    chi2=chi2_discrete(rho, pi), kappa=task.kappa,
                )
                value = bounds.bound_chi_square(inp).value
            elif bound_id == "localized_empirical":
                value = bounds.bound_localized_empirical(
                    r, rho, pi, n, eps, lam_value, xi
                ).value
            elif bound_id == "oracle_probability":
                value = oracle_value
            else:
                raise ValueError(f"unknown bound id {bound_id!r}")
        true = float(np.dot(rho.weights, R))
        corrupted = corruption * value
        return {
            "n": n,
            "seed": seed,
            "excess_risk": true - task.risk_star,
            "bound_value": corrupted,
            "violated": bool(true > corrupted),
        }

    rows = run_trials(trials, one_trial)
    violations = sum(row["violated"] for row in rows)
    rate = violations / trials
    return ExperimentReport(
        trials=trials,
        violations=violations,
        violation_rate=rate,
        se=math.sqrt(rate * (1.0 - rate) / trials),
        mean_bound=float(np.mean([row["bound_value"] for row in rows])),
        mean_true_risk=float(np.mean([row["excess_risk"] + task.risk_star for row in rows])),
        rows=rows,
        details={"bound_id": bound_id, "posterior_rule": posterior_rule, "eps": eps,
                 "lambda": lam_value, "corruption": corruption},
    )


def rate_experiment(
    task: SyntheticTask,
    n_grid,
    reps: int,
    seed: int,
    *,
    rule: str = "fast",
    eps: float = 0.05,
    K: Optional[float] = None,
    pi: Optional[DiscreteDistribution] = None,
) -> ExperimentReport:
    """Measure the convergence rate of the Gibbs posterior's excess risk.

    For each n in the (geometric, >= 5 point) grid, averages the exact
    excess risk E_{rho_lam}[R] - R* over ``reps`` fresh samples, with
    lam = n/max(2K, C) under the fast rule or the closed-form slow lambda
    (at the a-priori complexity log M) under the slow rule.  Returns the
    least-squares slope of log(mean excess) against log(n); excess risks
    are accumulated in the log domain, so exponentially small values do
    not underflow.  A task with no excess risk anywhere yields the NaN
    sentinel slope.
    """
    n_grid = [int(v) for v in n_grid]
    validate_geometric_grid(n_grid)
    if rule not in ("fast", "slow"):
        raise ValueError("rule must be 'fast' or 'slow'")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    pi = pi or DiscreteDistribution.uniform(task.m)
    C = task.C
    if rule == "fast" and K is None:
        K = estimate_bernstein_constant(task).K
    logpi = _safe_log(pi.weights)
    gaps = task.gaps
    others = np.flatnonzero(np.arange(task.m) != task.theta_star)
    log_gaps = _safe_log(gaps[others]) if others.size else None

    rows = []
    log_means = []
    for i, n in enumerate(n_grid):
        lam = (
            n / max(2.0 * K, C)
            if rule == "fast"
            else bounds.select_lambda_closed_form(math.log(task.m), n, eps, C)
        )

        def one_rep(rep: int, i=i, n=n, lam=lam):
            rng = child_rng(seed, i, rep)
            r = task.sample_emp_risk(n, rng)
            logw = logpi - lam * r
            logw = logw - logsumexp(logw)
            if log_gaps is None:
                return -math.inf
            return float(logsumexp(logw[others] + log_gaps))

        log_excess = run_trials(reps, one_rep)
        if all(math.isinf(v) for v in log_excess):
            log_mean = -math.inf
        else:
            log_mean = float(logsumexp(log_excess) - math.log(reps))
        log_means.append(log_mean)
        rows.append(
            {
                "n": n,
                "seed": seed,
                "excess_risk": math.exp(log_mean) if math.isfinite(log_mean) else 0.0,
                "bound_value": math.nan,
                "violated": math.nan,
            }
        )

    if any(not math.isfinite(v) for v in log_means):
        slope = math.nan
    else:
        slope = float(np.polyfit(np.log(np.asarray(n_grid, dtype=float)), log_means, 1)[0])
    return ExperimentReport(
        trials=len(n_grid) * reps,
        violations=0,
        violation_rate=0.0,
        se=0.0,
        mean_bound=math.nan,
        mean_true_risk=float(np.mean([row["excess_risk"] for row in rows]) + task.risk_star),
        rows=rows,
        slope=slope,
        details={"rule": rule, "log_mean_excess": log_means, "eps": eps},
    )


def validate_geometric_grid(n_grid) -> None:
    """A usable n-grid has >= 5 strictly increasing, geometric entries."""
    if len(n_grid) < 5:
        raise ValueError("n_grid must have at least 5 points")
    arr = np.asarray(n_grid, dtype=float)
    if np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
        raise ValueError("n_grid must be positive and strictly increasing")
    ratios = np.log(arr[1:] / arr[:-1])
    if np.max(np.abs(ratios - ratios.mean())) > 0.1:
        raise ValueError("n_grid must be geometric (constant ratio)")


# ---------------------------------------------------------------------------
# Exponential moment checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    """Per-t verification rows for the exponential-moment inequalities."""

    rows: list
    hoeffding_ok: bool
    bernstein_ok: bool


def _dist_info(dist_spec: dict):
    kind = dist_spec["kind"]
    if kind == "bernoulli":
        p = float(dist_spec["p"])
        if not (0 <= p <= 1):
            raise ValueError("p must lie in [0, 1]")
        return {"low": 0.0, "high": 1.0, "mean": p, "var": p * (1 - p)}
    if kind == "uniform":
        low, high = float(dist_spec["low"]), float(dist_spec["high"])
        if not (high >= low):
            raise ValueError("need high >= low")
        return {
            "low": low,
            "high": high,
            "mean": 0.5 * (low + high),
            "var": (high - low) ** 2 / 12.0,
        }
    if kind == "constant":
        v = float(dist_spec["value"])
        return {"low": v, "high": v, "mean": v, "var": 0.0}
    raise ValueError(
        f"unsupported (or unbounded) distribution kind {dist_spec.get('kind')!r}"
    )


def _dist_mgf(dist_spec: dict, t: float, n: int) -> Optional[float]:
    """Closed-form E[e^{t sum (U_i - EU_i)}] where available."""
    kind = dist_spec["kind"]
    if t == 0.0:
        return 1.0
    if kind == "bernoulli":
        p = float(dist_spec["p"])
        return ((1 - p) + p * math.exp(t)) ** n * math.exp(-t * n * p)
    if kind == "uniform":
        low, high = float(dist_spec["low"]), float(dist_spec["high"])
        if high == low:
            return 1.0
        single = (math.exp(t * high) - math.exp(t * low)) / (t * (high - low))
        return single**n * math.exp(-t * n * 0.5 * (low + high))
    if kind == "constant":
        return 1.0
    return None


def verify_exponential_moment(
    dist_spec: dict,
    t_grid,
    samples: int,
    seed: int,
) -> MomentReport:
    """Monte Carlo check of the Hoeffding and Bernstein MGF inequalities.

    ``dist_spec`` describes n i.i.d. bounded summands, e.g.
    {"kind": "bernoulli", "p": 0.3, "n": 10}.  For each t, the empirical
    estimate of E[e^{t sum(U_i - EU_i)}] must stay below the Hoeffding
    right-hand side e^{n t^2 (b-a)^2/8} and the Bernstein right-hand side
    e^{g((b-a) t) n t^2 Var}, each inflated by five relative standard
    errors of the Monte Carlo estimate.
    """
    n = int(dist_spec["n"])
    if n < 1:
        raise ValueError("dist_spec must set n >= 1")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    info = _dist_info(dist_spec)
    span = info["high"] - info["low"]
    kind = dist_spec["kind"]
    rng = child_rng(seed, 0)

    # Accumulate the centered sums once, in chunks, then reuse across t.
    sums = np.empty(samples)
    chunk = 200_000
    pos = 0
    while pos < samples:
        k = min(chunk, samples - pos)
        if kind == "bernoulli":
            draws = (rng.random((k, n)) < dist_spec["p"]).astype(float)
        elif kind == "uniform":
            draws = info["low"] + span * rng.random((k, n))
        else:
            draws = np.full((k, n), info["mean"])
        sums[pos : pos + k] = draws.sum(axis=1) - n * info["mean"]
        pos += k

    rows = []
    hoeffding_ok = True
    bernstein_ok = True
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        vals = np.exp(t * sums)
        mgf_hat = float(vals.mean())
        rel_se = float(vals.std(ddof=1) / math.sqrt(samples) / mgf_hat) if t != 0 else 0.0
        hoeffding_rhs = math.exp(n * t**2 * span**2 / 8.0)
        bernstein_rhs = math.exp(bernstein_g(span * t) * n * t**2 * info["var"])
        slack = 1.0 + 5.0 * rel_se
        h_ok = mgf_hat <= hoeffding_rhs * slack
        b_ok = mgf_hat <= bernstein_rhs * slack
        hoeffding_ok &= h_ok
        bernstein_ok &= b_ok
        rows.append(
            {
                "t": float(t),
                "mgf_hat": mgf_hat,
                "rel_se": rel_se,
                "hoeffding_rhs": hoeffding_rhs,
                "bernstein_rhs": bernstein_rhs,
                "closed_form": _dist_mgf(dist_spec, float(t), n),
                "hoeffding_ok": h_ok,
                "bernstein_ok": b_ok,
            }
        )
    return MomentReport(rows=rows, hoeffding_ok=hoeffding_ok, bernstein_ok=bernstein_ok)
