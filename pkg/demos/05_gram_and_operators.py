"""The moment inner product, its Gram matrix and the operator family.

``(f, g) = s(f * conj g)`` with ``s`` the Lebesgue-Poisson integral. In the
basis of configuration indicators the Gram matrix entry for ``xi, eta`` is
the product of the weights over ``xi | eta``. Star multiplication by a
level-one function is symmetric for this inner product, and any two such
operators commute.
"""

# %%
import numpy as np

from confspace import ExactSpace, gram_matrix, operator_matrix
from confspace.moments import character_norm_bound, commutator_residual, subcharacter_tails, symmetry_residual

single = ExactSpace(("a",), (0.5,))
bundle = gram_matrix(single)
print("Gram matrix of one atom:\n", bundle.gram)
print("A(delta_a):\n", operator_matrix(single.delta("a"), bundle))

# %% Four atoms: positivity, symmetry and commutation.
rng = np.random.default_rng(11)
space = ExactSpace.random(4, rng)
bundle = gram_matrix(space)
print(f"dim={bundle.dim}, min eigenvalue={bundle.min_eigenvalue:.3e}, condition={bundle.condition:.1f}")
phi, psi = space.function(rng.normal(size=4)), space.function(rng.normal(size=4))
print("symmetry residual:", symmetry_residual(operator_matrix(phi, bundle), bundle))
print("commutator residual:", commutator_residual(phi, psi, bundle))

# %% Character norms and how fast truncations converge.
phi = space.function([0.2, 0.9, 1.3, 0.5])
print("||chi||^2 and bound:", character_norm_bound(phi))
print("tails by truncation level:", np.round(subcharacter_tails(phi), 6))
