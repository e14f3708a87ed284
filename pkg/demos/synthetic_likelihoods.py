"""
Synthetic likelihoods against a conjugate posterior
===================================================

Normal data with known variance and a flat prior on the mean: the exact
posterior is a truncated normal. BSL with the sample mean and the pooled
KDE likelihood should both land on it.
"""

import numpy as np

from fullabc.core import BoxPrior, SeedSpec
from fullabc.harness.calibration import loglik_sd
from fullabc.likelihoods import BslLikelihood, KdeLikelihood
from fullabc.models import toy
from fullabc.sampler import run_with_pilot

n = 20
y = np.random.default_rng(1).normal(0.7, 1.0, n)
prior = BoxPrior(("mu",), [-10.0], [10.0])
mean, sd = toy.gaussian_mean_posterior(y, -10, 10)
print(f"exact  mean {mean:.4f} sd {sd:.4f}")

stat = lambda th, rng, m: toy.gaussian_mean_simulate(th, rng, n, size=m).mean(axis=1)[:, None]
bsl = BslLikelihood(stat, np.array([y.mean()]), 100)
kde = KdeLikelihood(lambda th, rng, m: toy.gaussian_mean_simulate(th, rng, n, size=m), y, 50)

for name, lik in (("BSL", bsl), ("KDE", kde)):
    chain = run_with_pilot(prior, lik, [0.0], 5000, SeedSpec(3))
    post = chain.post_burn_in()[:, 0]
    print(f"{name:5s}  mean {post.mean():.4f} sd {post.std():.4f}  "
          f"acceptance {chain.acceptance_rate:.2f}")

# BSL log-likelihood noise falls as m grows; the tuning rule picks the
# smallest m whose sd sits in [1, 2]
for m in (10, 50, 250):
    make = lambda k: BslLikelihood(stat, np.array([y.mean()]), k)
    print("m", m, "loglik sd", round(loglik_sd(make, [0.7], m, SeedSpec(4)), 3))
