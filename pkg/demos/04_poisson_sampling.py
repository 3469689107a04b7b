"""Sampling the Poisson process and checking it by Monte Carlo.

Samples are reproducible: the same seed and replica index always give the
same configurations. Every estimate comes with its standard error.
"""

# %%
import math

import numpy as np

from confspace import ContinuousSpace, ProcessSampler, consistency_check, finite_mass_trend, laplace_estimate
from confspace.process import laplace_closed_form

line = ContinuousSpace([0.0], [2.0])
sampler = ProcessSampler(line.window(), seed=42)
batch = sampler.sample(20_000)
print("mean number of points:", batch.counts.mean(), "(expected 2)")

# %% Laplace functional E exp<gamma, f> against exp(int (e^f - 1) dsigma).
f = line.function(lambda x: 0.4 * np.sin(np.pi * x[:, 0]))
est, se = laplace_estimate(sampler, f, 100_000)
print(f"Laplace estimate {est:.5f} +- {se:.5f}, closed form {laplace_closed_form(f):.5f}")

# %% Restricting samples from a larger window reproduces the smaller window's law.
rep = consistency_check(line.window(), line.window([0.5], [1.0]), 100_000, seed=3)
print("projected mean", rep.projected_mean, "direct mean", rep.direct_mean, "passed", rep.passed)

# %% The chance of no points outside [0, 1] decays like exp(-(sigma(Y_n) - 1)).
big = ContinuousSpace([0.0], [5.0])
trend = finite_mass_trend([big.window([0.0], [float(n)]) for n in range(1, 6)], 100_000, seed=5)
for s, frac, pred in zip(trend.intensities, trend.fractions, trend.predicted):
    print(f"sigma={s:.0f}: observed {frac:.4f}  predicted {pred:.4f}")
print(f"fitted log-slope {trend.fitted_slope:.4f}, predicted {trend.predicted_slope:.4f}, exp(-4) = {math.exp(-4):.4f}")
