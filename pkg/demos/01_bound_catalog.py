"""Walk through the empirical bound catalog on one classification instance.

A hundred classifiers, a thousand test points, best empirical risk 0.26:
every certificate in the catalog is evaluated for the Dirac posterior on
the best classifier and for the bound-minimizing Gibbs posterior, showing
how the theorems trade empirical fit against complexity.
"""

import math

import numpy as np

from pacbayes.bounds import (
    BoundInput,
    bound_catoni_linear,
    bound_catoni_phi,
    bound_mcallester_maurer,
    bound_seeger_maurer,
    bound_thiemann,
    bound_tolstikhin_seldin,
    bound_union_finite,
    lambda_grid_geometric,
    select_lambda_closed_form,
)
from pacbayes.divergences import DiscreteDistribution, kl_discrete
from pacbayes.posteriors import RiskTable, gibbs_posterior, minimize_bound_grid

M, N, EPS = 100, 1000, 0.05
emp_risk = np.linspace(0.26, 0.80, M)
pi = DiscreteDistribution.uniform(M)

print(f"instance: M={M} hypotheses, n={N}, eps={EPS}, best emp risk {emp_risk.min():.2f}")
print()

# --- the classical finite-class union bound -------------------------------
union = bound_union_finite(float(emp_risk.min()), N, EPS, 1.0, M=M)
print(f"union bound          {union.value:.4f}  (slack {union.terms['complexity']:.4f})")

# --- Dirac posterior on the best classifier -------------------------------
kl = math.log(M)
lam = select_lambda_closed_form(kl, N, EPS, 1.0)
inp = BoundInput(emp_risk=0.26, kl=kl, n=N, eps=EPS)
print(f"linear @ lambda*={lam:6.1f} {bound_catoni_linear(inp, lam).value:.4f}")
print(f"mcallester           {bound_mcallester_maurer(inp).value:.4f}")
print(f"seeger               {bound_seeger_maurer(inp).value:.4f}")
print(f"tolstikhin-seldin    {bound_tolstikhin_seldin(inp).value:.4f}")
print(f"thiemann @ lam=1     {bound_thiemann(inp, 1.0).value:.4f}")
print(f"catoni-phi @ lambda* {bound_catoni_phi(inp, lam).value:.4f}")
print()

# --- Gibbs posterior chosen by the lambda-grid certificate ----------------
table = RiskTable(emp_risk=emp_risk, n=N, C=1.0)
rho, cert = minimize_bound_grid(pi, table, lambda_grid_geometric(N), EPS)
print(f"lambda-grid Gibbs posterior: lambda_hat={cert.lam:.1f}, "
      f"certificate {cert.value:.4f}")
print(f"  posterior mass on best 5 hypotheses: "
      f"{np.sort(rho.weights)[-5:][::-1].round(3)}")
print(f"  E_rho[r] = {float(rho.weights @ emp_risk):.4f}, "
      f"KL = {kl_discrete(rho, pi):.3f}")

# --- a vacuous certificate, kept finite in the log domain -----------------
huge = bound_union_finite(0.0, 10_000, EPS, 1.0, log_M=1_000_100 * math.log(2))
print()
print(f"binary-network instance (log M = 1,000,100 log 2): value {huge.value:.3f} "
      f"-> vacuous={huge.vacuous}")
