"""The exponentially weighted average forecaster and its regret guarantee.

EWA is the online twin of the Gibbs posterior: after t rounds its weights
equal the Gibbs reweighting of the prior at temperature eta*t on the
cumulative-mean losses.  Against an adversarial loss sequence the regret
stays below C sqrt(T log(M)/2) at the horizon-tuned learning rate.
"""

import math

import numpy as np

from pacbayes.divergences import DiscreteDistribution
from pacbayes.posteriors import ewa_eta_theorem, ewa_run, gibbs_posterior

rng = np.random.default_rng(3)
M, T = 5, 400
pi = DiscreteDistribution.uniform(M)

# drifting experts: expert quality changes halfway through
losses = np.empty((T, M))
losses[: T // 2] = rng.random((T // 2, M)) * np.linspace(0.2, 1.0, M)[None, :]
losses[T // 2:] = rng.random((T - T // 2, M)) * np.linspace(1.0, 0.2, M)[None, :]

eta = ewa_eta_theorem(M, T)
state, regret = ewa_run(losses, eta, pi, record_weights=True)
bound = math.sqrt(T * math.log(M) / 2)

print(f"M={M} experts, T={T} rounds, eta={eta:.4f}")
print(f"forecaster loss {state.cum_loss:.1f}, best expert "
      f"{state.cum_best.min():.1f}, regret {regret:.2f} <= {bound:.2f}")
print(f"final weights: {state.weights.weights.round(3)}")
print()

# online weights == batch Gibbs posterior, exactly
t = 250
batch = gibbs_posterior(pi, losses[:t].mean(axis=0), eta * t)
drift = np.max(np.abs(state.weight_history[t].weights - batch.weights))
print(f"weights after {t} rounds vs batch Gibbs at lambda = eta*t: "
      f"max difference {drift:.2e}")
