"""The Lebesgue-Poisson measure and its total masses.

On an atom set the measure gives each configuration the product of its
atom weights. On a continuous window it is the sum over levels of
``sigma^n / n!``, so its total mass is ``exp(sigma(Y))``.
"""

# %%
import math

from confspace import ConfigFunction, ContinuousSpace, ExactSpace, character, lambda_total, lp_integral
from confspace.lebesgue_poisson import level_masses

# %% Two atoms with weights 1/2 and 1/4: the four configurations weigh 1, 1/2, 1/4, 1/8.
ab = ExactSpace(("a", "b"), (0.5, 0.25))
ones = ConfigFunction(ab, {0: 1, 1: 1, 2: 1, 3: 1})
print("integral of 1 over all configurations:", lp_integral(ones))
print("total (atomic)", lambda_total(ab.window()))

# %% Continuous windows of growing intensity.
line = ContinuousSpace([0.0], [2.0])
for sigma in (0.5, 1.0, 2.0):
    win = line.window([0.0], [sigma])
    print(f"sigma={sigma}: total={lambda_total(win).value:.15f}  exp={math.exp(sigma):.15f}")

# %% Integrating a character gives exp of the integral of phi.
phi = line.function(lambda x: 0.5 * x[:, 0])
print("integral of chi_phi:", lp_integral(character(phi)), " exp(1) =", math.e)

# %% Level masses on an atom set are elementary symmetric polynomials of the weights.
print("level masses:", level_masses(ab.window()))
