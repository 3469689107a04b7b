"""Functions on finite configurations and their star product.

A function on finite configurations of a small atom set is stored sparsely,
one value per configuration. The star product multiplies two of them by
summing over every way of covering a configuration with the supports of
the two factors.
"""

# %%
import numpy as np

from confspace import ExactSpace, character, indicator, involution, random_function, star, unit

space = ExactSpace(("a", "b", "c"), (0.5, 0.25, 0.4))

# %% Indicators multiply by union: 1_{a} * 1_{b} = 1_{ab}, and 1_{a} * 1_{a} = 1_{a}.
a, b = indicator(space, ["a"]), indicator(space, ["b"])
print("1_a * 1_b  ->", {" ".join(space.labels_of(m)): v for m, v in star(a, b).items()})
print("1_a * 1_a  ->", {" ".join(space.labels_of(m)): v for m, v in star(a, a).items()})

# %% The unit is the indicator of the empty configuration.
rng = np.random.default_rng(1)
f = random_function(space, 2, rng)
print("e * f == f:", star(unit(space), f) == f)

# %% Characters turn the star product into the law phi + psi + phi psi.
phi = space.function([0.3, -0.7, 1.1])
psi = space.function([0.5, 0.2, -0.4])
lhs = star(character(phi), character(psi))
rhs = character(phi + psi + phi * psi)
print("character law residual:", lhs.max_abs_diff(rhs))

# %% Rational arithmetic gives exact identities.
g = random_function(space, 2, rng, exact=True)
h = random_function(space, 2, rng, exact=True)
print("exact commutativity:", star(g, h) == star(h, g))
print("involution reverses products:", involution(star(g, h)) == star(involution(h), involution(g)))
