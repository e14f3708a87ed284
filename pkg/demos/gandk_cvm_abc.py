"""
ABC-MCMC on the g-and-k distribution with the CvM distance
==========================================================

One observed dataset, a tolerance calibrated from simulations at the true
parameter, then a pilot-tuned pseudo-marginal chain.
"""

import numpy as np

from fullabc.core import SeedSpec
from fullabc.distances import cvm_distance
from fullabc.harness import epsilon_from_pool
from fullabc.likelihoods import AbcLikelihood
from fullabc.models import get_model
from fullabc.sampler import ess, run_with_pilot

model = get_model("gandk")
theta = np.array(model.true_theta)
y = model.simulate(theta, np.random.default_rng(0), 100)

# tolerance: 5% quantile of distances to datasets simulated at theta
rng = np.random.default_rng(1)
pool = [cvm_distance(y, model.simulate(theta, rng, 100)) for _ in range(5000)]
eps = epsilon_from_pool(pool, 0.05)
print("epsilon", eps)

lik = AbcLikelihood(lambda th, r: model.simulate(th, r, 100), lambda z: cvm_distance(y, z), eps)
chain = run_with_pilot(model.prior(y), lik, theta, 20_000, SeedSpec(7), early_reject=True)
post = chain.post_burn_in()

print("acceptance", round(chain.acceptance_rate, 3), "simulations", chain.n_sims)
for j, name in enumerate(chain.names):
    lo, hi = np.quantile(post[:, j], [0.1, 0.9])
    print(f"{name}: mean {post[:, j].mean():.3f}  80% [{lo:.3f}, {hi:.3f}]  "
          f"ess {ess(post[:, j]):.0f}  (true {theta[j]})")
