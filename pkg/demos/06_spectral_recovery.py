"""Recovering the spectral measure from the commuting operators.

Joint diagonalisation of the operator family labels each eigenvector by a
configuration. The squared overlap of the unit with each eigenvector is the
spectral weight, and it matches the Bernoulli law with inclusion
probabilities equal to the atom weights.
"""

# %%
import numpy as np

from confspace import ExactSpace, gram_matrix, joint_diagonalize
from confspace.spectral import laplace_of_rho

space = ExactSpace(("a", "b", "c"), (0.5, 0.25, 0.8))
report = joint_diagonalize(gram_matrix(space), seed=0)
print(report.to_csv())
print("sum of weights:", report.weights.sum())

# %% Laplace transform of the recovered weights.
psi = space.function(np.log([3.0, 2.0, 0.5]))
lhs, rhs = laplace_of_rho(psi, report)
print(f"sum exp<gamma, psi> rho(gamma) = {lhs:.12f}; s(chi_(e^psi - 1)) = {rhs:.12f}")
