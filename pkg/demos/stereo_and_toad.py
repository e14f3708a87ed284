"""
Two structured models: stereological inclusions and toad movement
=================================================================

Inclusions: a Poisson count of sizes above a 5 micron threshold, following
a generalised Pareto law. Toads: 66 animals over 63 days, each moving a
symmetric stable step per night and sometimes returning to an old refuge.
"""

import numpy as np

from fullabc.models.stereo import stereo_simple_summaries, stereo_simulate
from fullabc.models.toad import toad_quantile_summaries, toad_simulate, toad_summarize

rng = np.random.default_rng(0)
data = stereo_simulate((100.0, 2.0, -0.1), rng)
print("inclusions", data.count, "largest %.2f" % data.sizes.max())
print("count, log min, log mean, log max:", np.round(stereo_simple_summaries(data), 3))

Y = toad_simulate((1.7, 35.0, 0.6), rng)
s = toad_summarize(Y)
for lag, ret, moved in zip(s.lags, s.returns, s.non_returns):
    print(f"lag {lag}: {ret:4d} returns, {moved.size:4d} moves, median move {np.median(moved):7.1f} m")
print("quantile summaries for lag 1 (10 log gaps, median, returns):", np.round(toad_quantile_summaries(s)[:12], 2))

# degenerate corners
print("always return -> all zero:", np.all(toad_simulate((1.7, 35.0, 1.0), rng) == 0))
