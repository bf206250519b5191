"""The empirical PAC-Bayes bound catalog.

Each ``bound_*`` function evaluates one theorem's right-hand side exactly as
displayed and returns a :class:`Certificate` carrying the value, the term
decomposition, and a vacuousness flag.  Complexity inputs are taken in the
log domain (log M, KL in nats) so that instances with astronomically many
hypotheses evaluate without overflow.

Conventions
-----------
* All logs are natural.
* kl-form bounds (Seeger, Tolstikhin-Seldin, Thiemann, Catoni-Phi) are
  stated for losses in [0, 1]; callers with range-C losses pass risk/C and
  rescale the certificate value by C.
* ``terms`` always sums exactly to ``value``; intermediate quantities that
  do not sum (budgets, Phi arguments) live in ``details``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .divergences import (
    DiscreteDistribution,
    gibbs_reweight,
    kl_discrete,
    kl_inverse_upper,
)

__all__ = [
    "BoundInput",
    "Certificate",
    "bernstein_g",
    "bound_union_finite",
    "bound_catoni_linear",
    "select_lambda_closed_form",
    "bound_lambda_grid",
    "lambda_grid_arithmetic",
    "lambda_grid_geometric",
    "bound_mcallester_maurer",
    "bound_seeger_maurer",
    "bound_tolstikhin_seldin",
    "bound_thiemann",
    "bound_catoni_phi",
    "bound_germain_generic",
    "bound_subgaussian",
    "bound_chi_square",
    "bound_truncated",
    "bound_localized_empirical",
    "BOUND_IDS",
]

#: Catalog identifiers accepted by the CLI and the violation harness.
BOUND_IDS = (
    "union_finite",
    "catoni_linear",
    "lambda_grid",
    "mcallester",
    "seeger",
    "tolstikhin_seldin",
    "thiemann",
    "catoni_phi",
    "germain_generic",
    "subgaussian",
    "chi_square",
    "truncated",
    "localized_empirical",
)


@dataclass(frozen=True)
class BoundInput:
    """Sufficient statistics consumed by the bound catalog.

    emp_risk   E_rho[r] in [0, C]
    kl         KL(rho || pi) in nats, >= 0 (may be +inf)
    n          sample size >= 1
    eps        confidence parameter in (0, 1)
    C          loss range upper bound > 0
    chi2       optional chi-square divergence, >= 0
    kappa      optional variance bound > 0
    delta_tail optional truncation tail term E_rho[Delta_{n,lambda}] >= 0
    """

    emp_risk: float
    kl: float
    n: int
    eps: float
    C: float = 1.0
    chi2: Optional[float] = None
    kappa: Optional[float] = None
    delta_tail: Optional[float] = None

    def __post_init__(self):
        if not (self.n >= 1):
            raise ValueError("n must be >= 1")
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if not (self.C > 0):
            raise ValueError("C must be positive")
        if math.isnan(self.emp_risk) or not (0 <= self.emp_risk <= self.C):
            raise ValueError(f"emp_risk must lie in [0, C], got {self.emp_risk!r}")
        if self.kl < 0:
            raise ValueError("kl must be nonnegative")
        if self.chi2 is not None and self.chi2 < 0:
            raise ValueError("chi2 must be nonnegative")
        if self.kappa is not None and not (self.kappa > 0):
            raise ValueError("kappa must be positive")
        if self.delta_tail is not None and self.delta_tail < 0:
            raise ValueError("delta_tail must be nonnegative")

    @property
    def log_inv_eps(self) -> float:
        return math.log(1.0 / self.eps)


@dataclass(frozen=True)
class Certificate:
    """A numeric risk certificate with its decomposition.

    ``terms`` is an additive decomposition: the values sum to ``value``
    exactly (within 1e-12).  ``details`` carries non-additive intermediates
    such as kl-inversion budgets.  ``vacuous`` flags value >= C for losses
    bounded by C.
    """

    bound_id: str
    value: float
    lam: Optional[float] = None
    terms: dict = field(default_factory=dict)
    vacuous: bool = False
    details: dict = field(default_factory=dict)


def _certificate(bound_id, value, C, lam=None, terms=None, details=None) -> Certificate:
    return Certificate(
        bound_id=bound_id,
        value=float(value),
        lam=None if lam is None else float(lam),
        terms=dict(terms or {}),
        vacuous=bool(value >= C),
        details=dict(details or {}),
    )


def bernstein_g(x: float) -> float:
    """Bernstein's MGF function g(x) = (e^x - 1 - x) / x^2, with g(0) = 1.

    The g(0) = 1 convention matches how the bounds below are stated, even
    though the continuous limit is 1/2; in practice the function is only
    ever called with x > 0.  A series expansion avoids cancellation for
    small |x|.
    """
    if x == 0.0:
        return 1.0
    if abs(x) < 1e-4:
        return 0.5 + x / 6.0 + x * x / 24.0
    return (math.expm1(x) - x) / (x * x)


def bound_union_finite(
    r_min: float,
    n: int,
    eps: float,
    C: float = 1.0,
    M: Optional[float] = None,
    log_M: Optional[float] = None,
) -> Certificate:
    """Finite-class Hoeffding union bound: r_min + C sqrt(log(M/eps)/(2n)).

    Exactly one of ``M`` and ``log_M`` must be given; supplying log M keeps
    instances like M = 2^1000100 finite in float arithmetic.
    """
    if (M is None) == (log_M is None):
        raise ValueError("supply exactly one of M and log_M")
    if log_M is None:
        if M < 1:
            raise ValueError("M must be >= 1")
        log_M = math.log(M)
    if not (n >= 1):
        raise ValueError("n must be >= 1")
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    slack = C * math.sqrt((log_M + math.log(1.0 / eps)) / (2.0 * n))
    value = r_min + slack
    return _certificate(
        "union_finite",
        value,
        C,
        terms={"empirical": r_min, "complexity": slack, "slack": 0.0},
        details={"log_M": log_M},
    )


def bound_catoni_linear(inp: BoundInput, lam: float) -> Certificate:
    """Linear-in-lambda bound: emp + lam C^2/(8n) + (KL + log(1/eps))/lam."""
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    slack = lam * inp.C**2 / (8.0 * inp.n)
    complexity = (inp.kl + inp.log_inv_eps) / lam
    value = inp.emp_risk + slack + complexity
    return _certificate(
        "catoni_linear",
        value,
        inp.C,
        lam=lam,
        terms={"empirical": inp.emp_risk, "complexity": complexity, "slack": slack},
    )


def select_lambda_closed_form(kl: float, n: int, eps: float, C: float = 1.0) -> float:
    """Exact minimizer lambda* = sqrt(8 n (KL + log(1/eps))) / C.

    Minimizes lam C^2/(8n) + (KL + log(1/eps))/lam; the two terms are equal
    at the optimum (AM-GM stationarity).
    """
    numer = kl + math.log(1.0 / eps)
    if not (numer > 0):
        raise ValueError("kl + log(1/eps) must be positive")
    return math.sqrt(8.0 * n * numer) / C


def lambda_grid_arithmetic(n: int) -> np.ndarray:
    """The arithmetic grid {1, 2, ..., n}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.arange(1, n + 1, dtype=float)


def lambda_grid_geometric(n: int) -> np.ndarray:
    """The geometric grid {e^k : k in N} intersected with [1, n]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kmax = int(math.floor(math.log(n))) if n > 1 else 0
    return np.exp(np.arange(0, kmax + 1, dtype=float))


def bound_lambda_grid(
    entries: Sequence[tuple], n: int, eps: float, C: float = 1.0
) -> Certificate:
    """Union bound over a finite lambda grid.

    ``entries`` holds one (lambda, emp_risk, kl) triple per grid point; the
    posterior (and hence emp_risk and kl) may differ across lambdas.  The
    certificate is the grid minimum of

        emp_risk(lam) + lam C^2/(8n) + (kl(lam) + log(card/eps)) / lam.
    """
    if len(entries) == 0:
        raise ValueError("grid must be nonempty")
    log_card = math.log(len(entries))
    best = None
    for lam, emp, kl in entries:
        if not (lam > 0):
            raise ValueError("grid lambdas must be positive")
        slack = lam * C**2 / (8.0 * n)
        complexity = (kl + log_card + math.log(1.0 / eps)) / lam
        value = emp + slack + complexity
        if best is None or value < best[0]:
            best = (value, lam, emp, slack, complexity)
    value, lam, emp, slack, complexity = best
    return _certificate(
        "lambda_grid",
        value,
        C,
        lam=lam,
        terms={"empirical": emp, "complexity": complexity, "slack": slack},
        details={"grid_size": len(entries), "log_card": log_card},
    )


def bound_mcallester_maurer(inp: BoundInput) -> Certificate:
    """McAllester-Maurer bound with the 5/2 log(n) + 8 complexity numerator."""
    rad = math.sqrt(
        (inp.kl + inp.log_inv_eps + 2.5 * math.log(inp.n) + 8.0) / (2.0 * inp.n - 1.0)
    )
    value = inp.emp_risk + rad
    return _certificate(
        "mcallester",
        value,
        inp.C,
        terms={"empirical": inp.emp_risk, "complexity": rad, "slack": 0.0},
    )


def _seeger_budget(inp: BoundInput) -> float:
    return (inp.kl + math.log(2.0 * math.sqrt(inp.n) / inp.eps)) / inp.n


def bound_seeger_maurer(inp: BoundInput) -> Certificate:
    """Seeger-Maurer bound: invert the binary kl at budget (KL + log(2 sqrt(n)/eps))/n.

    Requires the 0-1 loss scale emp_risk in [0, 1]; range-C callers rescale.
    """
    if not (0 <= inp.emp_risk <= 1):
        raise ValueError("seeger bound requires emp_risk in [0, 1]")
    budget = _seeger_budget(inp)
    value = kl_inverse_upper(inp.emp_risk, budget)
    return _certificate(
        "seeger",
        value,
        inp.C,
        terms={"empirical": inp.emp_risk, "complexity": value - inp.emp_risk, "slack": 0.0},
        details={"budget": budget},
    )


def bound_tolstikhin_seldin(inp: BoundInput) -> Certificate:
    """Tolstikhin-Seldin relaxation kl^{-1}(q|b) <= q + sqrt(2qb) + 2b.

    The budget is (KL + log(2 sqrt(n)/eps)) / (2n), exactly as displayed;
    at q = 0 the sqrt term vanishes and the bound is in 1/n.
    """
    if not (0 <= inp.emp_risk <= 1):
        raise ValueError("tolstikhin_seldin bound requires emp_risk in [0, 1]")
    half_budget = (inp.kl + math.log(2.0 * math.sqrt(inp.n) / inp.eps)) / (2.0 * inp.n)
    sqrt_term = math.sqrt(2.0 * inp.emp_risk * half_budget)
    lin_term = 2.0 * half_budget
    value = inp.emp_risk + sqrt_term + lin_term
    return _certificate(
        "tolstikhin_seldin",
        value,
        inp.C,
        terms={"empirical": inp.emp_risk, "complexity": sqrt_term, "slack": lin_term},
        details={"half_budget": half_budget},
    )


def bound_thiemann(inp: BoundInput, lam: float) -> Certificate:
    """Thiemann et al. bound, valid for any fixed lambda in (0, 2)."""
    if not (0 < lam < 2):
        raise ValueError("lambda must lie in (0, 2)")
    if not (0 <= inp.emp_risk <= 1):
        raise ValueError("thiemann bound requires emp_risk in [0, 1]")
    shrink = 1.0 - lam / 2.0
    emp_term = inp.emp_risk / shrink
    complexity = (inp.kl + math.log(2.0 * math.sqrt(inp.n) / inp.eps)) / (inp.n * lam * shrink)
    value = emp_term + complexity
    return _certificate(
        "thiemann",
        value,
        inp.C,
        lam=lam,
        terms={"empirical": emp_term, "complexity": complexity, "slack": 0.0},
    )


def _phi_inverse(a: float, q: float) -> float:
    """Phi_a^{-1}(q) = (1 - e^{-a q}) / (1 - e^{-a}), continuous at a -> 0."""
    if a == 0.0:
        return q
    return -math.expm1(-a * q) / -math.expm1(-a)


def bound_catoni_phi(inp: BoundInput, lam: float) -> Certificate:
    """Catoni's Phi-form bound: Phi_{lam/n}^{-1}(emp + (KL + log(1/eps))/lam).

    The Phi^{-1} argument may exceed 1; the displayed formula then saturates
    on its own.
    """
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    if not (0 <= inp.emp_risk <= 1):
        raise ValueError("catoni_phi bound requires emp_risk in [0, 1]")
    a = lam / inp.n
    arg = inp.emp_risk + (inp.kl + inp.log_inv_eps) / lam
    value = _phi_inverse(a, arg)
    return _certificate(
        "catoni_phi",
        value,
        inp.C,
        lam=lam,
        terms={"empirical": inp.emp_risk, "complexity": value - inp.emp_risk, "slack": 0.0},
        details={"a": a, "phi_arg": arg},
    )


def bound_germain_generic(
    p: float,
    kl: float,
    n: int,
    eps: float,
    log_moment: float,
    D: Callable[[float, float], float],
    tol: float = 1e-12,
) -> Certificate:
    """Generic convex-function bound: invert D(p, .) at the moment budget.

    Returns sup{q in [p, 1] : D(p, q) <= (KL + log_moment + log(1/eps))/n},
    found by bisection.  ``log_moment`` is the caller-supplied value (or an
    upper bound) of log E_S E_pi e^{n D(r, R)}.  D(p, .) must be
    nondecreasing on [p, 1]; a starting point already over budget means the
    bracketing assumption fails and is reported as an error.
    """
    if not (0 <= p <= 1):
        raise ValueError("p must lie in [0, 1]")
    if not (n >= 1):
        raise ValueError("n must be >= 1")
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    budget = (kl + log_moment + math.log(1.0 / eps)) / n
    if D(p, p) > budget:
        raise ValueError("bracketing failure: D(p, p) exceeds the budget "
                         "(D is not a nonnegative nondecreasing divergence on [p, 1])")
    if D(p, 1.0) <= budget:
        value = 1.0
    else:
        lo, hi = p, 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if D(p, mid) <= budget:
                lo = mid
            else:
                hi = mid
        value = lo
    return _certificate(
        "germain_generic",
        value,
        1.0,
        terms={"empirical": p, "complexity": value - p, "slack": 0.0},
        details={"budget": budget},
    )


def bound_subgaussian(inp: BoundInput, lam: float) -> Certificate:
    """Sub-Gaussian-loss bound: emp + lam C^2/n + (KL + log(1/eps))/lam.

    Here ``inp.C`` plays the role of the sub-Gaussian constant; the penalty
    is 8x the bounded-loss lam C^2/(8n) term.
    """
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    slack = lam * inp.C**2 / inp.n
    complexity = (inp.kl + inp.log_inv_eps) / lam
    value = inp.emp_risk + slack + complexity
    return _certificate(
        "subgaussian",
        value,
        inp.C,
        lam=lam,
        terms={"empirical": inp.emp_risk, "complexity": complexity, "slack": slack},
    )


def bound_chi_square(inp: BoundInput) -> Certificate:
    """Heavy-tail bound emp + sqrt(kappa (1 + chi^2) / (n eps)).

    Only needs a variance bound kappa; note the polynomial (not log)
    dependence on 1/eps.
    """
    if inp.kappa is None or inp.chi2 is None:
        raise ValueError("chi_square bound needs both kappa and chi2")
    slack = math.sqrt(inp.kappa * (1.0 + inp.chi2) / (inp.n * inp.eps))
    value = inp.emp_risk + slack
    return _certificate(
        "chi_square",
        value,
        inp.C,
        terms={"empirical": inp.emp_risk, "complexity": slack, "slack": 0.0},
    )


def psi_transform(alpha: float, u: float) -> float:
    """Psi_alpha(u) = -log(1 - u alpha)/alpha, the truncation transform."""
    if alpha == 0.0:
        return u
    return -math.log1p(-u * alpha) / alpha


def psi_inverse(alpha: float, v: float) -> float:
    """Psi_alpha^{-1}(v) = (1 - e^{-alpha v})/alpha, continuous at alpha -> 0."""
    if alpha == 0.0:
        return v
    return -math.expm1(-alpha * v) / alpha


def truncated_empirical_risk(losses: np.ndarray, n: int, lam: float) -> float:
    """Average of Psi_{lam/n}(min(loss, n/lam)) over the loss sample."""
    alpha = lam / n
    clipped = np.minimum(np.asarray(losses, dtype=float), n / lam)
    with np.errstate(divide="ignore"):
        vals = -np.log1p(-clipped * alpha) / alpha
    return float(np.mean(vals))


def bound_truncated(
    inp: BoundInput, lam: float, trunc_emp_risk: float, delta_tail: float
) -> Certificate:
    """Truncation bound for heavy-tailed losses.

    value = Psi^{-1}_{lam/n}(trunc_emp_risk + (KL + log(1/eps))/lam) + delta_tail.
    The caller computes trunc_emp_risk via :func:`truncated_empirical_risk`
    and the tail term E_rho[Delta_{n,lam}]; for a bounded loss with
    n/lam >= C both truncation and the tail term are inactive.
    """
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    if delta_tail < 0:
        raise ValueError("delta_tail must be nonnegative")
    alpha = lam / inp.n
    arg = trunc_emp_risk + (inp.kl + inp.log_inv_eps) / lam
    main = psi_inverse(alpha, arg)
    value = main + delta_tail
    return _certificate(
        "truncated",
        value,
        inp.C,
        lam=lam,
        terms={
            "empirical": trunc_emp_risk,
            "complexity": main - trunc_emp_risk,
            "slack": delta_tail,
        },
        details={"alpha": alpha, "psi_arg": arg},
    )


def bound_localized_empirical(
    emp_risk_vector,
    rho: DiscreteDistribution,
    pi: DiscreteDistribution,
    n: int,
    eps: float,
    lam: float,
    xi: float,
) -> Certificate:
    """Localized empirical bound with the data-dependent prior pi_{-xi r}.

    The prior is reweighted by the empirical risks, pi_{-xi r} proportional
    to pi(theta) e^{-xi r(theta)}, and the certificate is

        [(1-xi) E_rho[r] + KL(rho || pi_{-xi r}) + (1+xi) log(2/eps)]
        / [(1-xi) lam + (1+xi) g(lam/n) lam^2 / n]

    with g the Bernstein function.  The displayed denominator grows
    superlinearly in lambda, so the bound is only trustworthy on the lambda
    range validated by the violation harness (see oracle_lab).
    """
    if not (0 <= xi < 1):
        raise ValueError("xi must lie in [0, 1)")
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    r = np.asarray(emp_risk_vector, dtype=float)
    if r.shape != pi.weights.shape:
        raise ValueError("emp_risk_vector must match the prior support")
    local_prior = gibbs_reweight(pi, -xi * r)
    kl_local = kl_discrete(rho, local_prior)
    emp = float(np.dot(rho.weights, r))
    denom = (1.0 - xi) * lam + (1.0 + xi) * bernstein_g(lam / n) * lam**2 / n
    conf = (1.0 + xi) * math.log(2.0 / eps)
    value = ((1.0 - xi) * emp + kl_local + conf) / denom
    return _certificate(
        "localized_empirical",
        value,
        1.0,
        lam=lam,
        terms={
            "empirical": (1.0 - xi) * emp / denom,
            "complexity": kl_local / denom,
            "slack": conf / denom,
        },
        details={"xi": xi, "kl_localized": kl_local, "denominator": denom},
    )
