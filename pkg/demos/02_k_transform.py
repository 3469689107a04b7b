"""The K-transform and its Moebius inverse.

``(Kf)(gamma)`` sums ``f`` over every finite sub-configuration of ``gamma``.
It turns the star product into pointwise multiplication, and an
alternating subset sum undoes it.
"""

# %%
import numpy as np

from confspace import ContinuousSpace, ExactSpace, configuration, k_apply, k_inverse, random_function, star
from confspace.ktransform import KernelFunction

rng = np.random.default_rng(7)
space = ExactSpace.random(5, rng)
f, g = random_function(space, 3, rng), random_function(space, 3, rng)

# %% Homomorphism: K(f * g) = Kf . Kg on every configuration.
lhs = k_apply(star(f, g)).table()
rhs = k_apply(f).table() * k_apply(g).table()
print("homomorphism residual:", np.max(np.abs(lhs - rhs)))

# %% Round trip through the inverse.
print("round-trip residual:", k_inverse(k_apply(f), space.size).max_abs_diff(f))

# %% On a continuous window the transform is evaluated lazily from kernels.
line = ContinuousSpace([0.0], [1.0])
kern = KernelFunction(line, [0.5, lambda p: float(p[0, 0]), lambda p: float(p[0, 0] * p[1, 0])])
gamma = configuration(line, [[0.2], [0.5], [0.9]])
print("(Kf)(gamma) =", k_apply(kern)(gamma))
