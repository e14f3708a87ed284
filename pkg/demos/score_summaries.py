"""
Score summaries from a fitted Gaussian mixture
==============================================

Fit a mixture to the observed data, then summarise any dataset by the
mixture's score at the fitted parameters. At the observed data the score
is zero, and the distance is Mahalanobis in the observed information.
"""

import numpy as np

from fullabc.core import SeedSpec
from fullabc.models.gandk import gandk_simulate
from fullabc.summaries import fit_score_summary

y = gandk_simulate(100, (3, 1, 2, 0.5), np.random.default_rng(0))
ss = fit_score_summary(y, K=3, seed=SeedSpec(0))
gm = ss.fitted
print("components", gm.K)
print("weights", np.round(gm.weights, 3))
print("means  ", np.round(gm.means, 3))
print("score at observed data:", np.round(ss(y), 6))

rng = np.random.default_rng(1)
for theta in [(3, 1, 2, 0.5), (3.5, 1, 2, 0.5), (3, 1, 4, 0.5)]:
    d = [ss.distance(ss(gandk_simulate(100, theta, rng))) for _ in range(200)]
    print(theta, "median distance %.2f" % np.median(d))
