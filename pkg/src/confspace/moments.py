"""Moment functional, Gram structure and the operator family ``A(phi) f = phi * f``.

Everything here works on an ``ExactSpace``. The Hilbert-space inner product
is ``(f, g) = s(f * conj g)`` with ``s`` the Lebesgue-Poisson integral. In the
basis of configuration indicators ``1_xi`` it has the closed form

    G[xi, eta] = prod_{x in xi | eta} w_x,

because ``1_xi * 1_eta = 1_{xi | eta}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .algebra import ConfigFunction, character, involution, masks_up_to_level, popcount, star
from .ground import ExactSpace, TestFunction, Window
from .lebesgue_poisson import config_mass, level_masses, lp_integral, mass_table


class PositivityError(ArithmeticError):
    """The Gram matrix failed to be positive definite."""


def s_apply(f):
    """Moment functional ``s(f) = integral f d lambda``."""
    return lp_integral(f)


def inner_product(f: ConfigFunction, g: ConfigFunction):
    """``(f, g) = s(f * conj g)``; linear in ``f``, conjugate-linear in ``g``."""
    return s_apply(star(f, involution(g)))


def norm(f: ConfigFunction) -> float:
    return float(np.sqrt(max(complex(inner_product(f, f)).real, 0.0)))


@dataclass
class GramOperatorBundle:
    """Gram matrix of the indicator basis plus assembled operator matrices.

    ``basis`` lists configuration masks ordered by (level, mask). Column ``j``
    of an operator matrix holds the coefficients of ``A(phi) 1_{basis[j]}``.
    """

    space: ExactSpace
    basis: list
    gram: np.ndarray
    min_eigenvalue: float
    condition: float
    operators: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def complete(self) -> bool:
        return self.dim == 1 << self.space.size

    def coefficients(self, f: ConfigFunction) -> np.ndarray:
        pos = {m: j for j, m in enumerate(self.basis)}
        vec = np.zeros(self.dim, dtype=complex)
        for m, v in f.items():
            if m not in pos:
                raise ValueError(f"configuration {m} is outside the truncated basis")
            vec[pos[m]] = complex(v)
        return vec

    def function(self, coeffs) -> ConfigFunction:
        return ConfigFunction(self.space, {m: complex(c) for m, c in zip(self.basis, coeffs)}, None)

    def atom_operators(self) -> list:
        return [operator_matrix(self.space.delta(lab), self) for lab in self.space.labels]

    def to_json(self) -> dict:
        return {
            "labels": list(self.space.labels),
            "weights": [float(w) for w in self.space.weights],
            "basis": [self.space.labels_of(m) for m in self.basis],
            "gram": self.gram.tolist(),
            "operators": {name: mat.tolist() for name, mat in self.operators.items()},
            "diagnostics": {"min_eigenvalue": self.min_eigenvalue, "condition": self.condition},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def gram_matrix(space: ExactSpace, level_max: int | None = None, cap: int = 12) -> GramOperatorBundle:
    """Assemble the Gram matrix on all configurations with at most ``level_max`` points.

    Raises ``PositivityError`` if the smallest eigenvalue is not positive.
    """
    if space.size > cap:
        raise ValueError(f"ground set of {space.size} atoms exceeds the cap of {cap}")
    level = space.size if level_max is None else level_max
    basis = masks_up_to_level(space.size, level)
    b = np.array(basis)
    gram = mass_table(space)[b[:, None] | b[None, :]]
    eig = np.linalg.eigvalsh(gram)
    lo, hi = float(eig[0]), float(eig[-1])
    if not lo > 0:
        raise PositivityError(f"Gram matrix has minimum eigenvalue {lo:.3e}")
    return GramOperatorBundle(space, basis, gram, lo, hi / lo)


def exact_gram(space: ExactSpace, level_max: int | None = None) -> list:
    """Gram matrix as nested lists in the weights' own (possibly rational) type."""
    level = space.size if level_max is None else level_max
    basis = masks_up_to_level(space.size, level)
    return [[config_mass(space, a | b) for b in basis] for a in basis]


def ldl_pivots(matrix) -> list:
    """Pivots of the symmetric Gaussian elimination; all positive iff positive definite.

    Works with ``Fraction`` entries, giving an exact positivity certificate.
    """
    a = [list(row) for row in matrix]
    n = len(a)
    pivots = []
    for k in range(n):
        piv = a[k][k]
        pivots.append(piv)
        if piv == 0:
            return pivots
        for i in range(k + 1, n):
            factor = a[i][k] / piv
            if factor:
                for j in range(k + 1, n):
                    a[i][j] -= factor * a[k][j]
    return pivots


def operator_matrix(phi: TestFunction, bundle: GramOperatorBundle, name: str | None = None) -> np.ndarray:
    """Matrix of ``A(phi)`` in the bundle's indicator basis.

    ``A(phi) 1_eta = sum_{i not in eta} phi_i 1_{eta + i} + (sum_{i in eta} phi_i) 1_eta``.
    Components leaving a truncated basis are dropped.
    """
    pos = {m: j for j, m in enumerate(bundle.basis)}
    vals = phi.values
    mat = np.zeros((bundle.dim, bundle.dim))
    for j, eta in enumerate(bundle.basis):
        diag = 0.0
        for i in range(bundle.space.size):
            bit = 1 << i
            if eta & bit:
                diag += vals[i]
            elif vals[i] != 0 and (eta | bit) in pos:
                mat[pos[eta | bit], j] += vals[i]
        mat[j, j] += diag
    if name is not None:
        bundle.operators[name] = mat
    return mat


def symmetry_residual(mat: np.ndarray, bundle: GramOperatorBundle) -> float:
    """``max |A^T G - G A|``: zero iff ``A`` is symmetric for the Gram inner product."""
    return float(np.max(np.abs(mat.T @ bundle.gram - bundle.gram @ mat)))


def commutator_residual(phi: TestFunction, psi: TestFunction, bundle: GramOperatorBundle) -> float:
    a = operator_matrix(phi, bundle)
    b = operator_matrix(psi, bundle)
    return float(np.max(np.abs(a @ b - b @ a)))


def character_norm_bound(phi: TestFunction) -> tuple[float, float]:
    """``(||chi_phi||^2, bound)`` with ``theta = 2 phi + phi^2``.

    ``||chi_phi||^2 = s(chi_theta) = prod (1 + w_i theta_i)`` and the bound is
    ``prod exp(w_i |theta_i|)``.
    """
    w = phi.space.w
    theta = 2 * phi.values + phi.values**2
    norm_sq = float(np.prod(1.0 + w * theta))
    bound = float(np.exp(np.sum(w * np.abs(theta))))
    if norm_sq > bound * (1 + 1e-12):
        raise ArithmeticError(f"character norm {norm_sq} exceeds its bound {bound}")
    return norm_sq, bound


def subcharacter_tails(phi: TestFunction) -> list[float]:
    """``||chi_phi - chi_phi^{(k)}||^2`` for ``k = 0..M``."""
    full = character(phi)
    out = []
    for k in range(phi.space.size + 1):
        tail = full - character(phi, k)
        out.append(float(complex(inner_product(tail, tail)).real))
    return out


def growth_constant(window: Window) -> float:
    """``C = 1 + sum_{i in window} w_i`` bounding ``lambda(Gamma^{(n)}) <= C^n``."""
    space = window.space
    return 1.0 + float(sum(space.w[i] for i in range(space.size) if window.mask >> i & 1))


def growth_check(window: Window) -> tuple[np.ndarray, np.ndarray]:
    """Level masses and the bounds ``C^n``."""
    masses = level_masses(window)
    return masses, growth_constant(window) ** np.arange(len(masses))


def exact_weights(weights: Mapping | list) -> ExactSpace:
    """Exact space with ``Fraction`` weights (for rational cross-checks)."""
    if isinstance(weights, Mapping):
        return ExactSpace(tuple(weights), tuple(Fraction(v) for v in weights.values()))
    return ExactSpace.from_weights([Fraction(v) for v in weights])


def gram_oracle_entry(space: ExactSpace, a: int, b: int):
    """Gram entry through the algebra: ``s(1_a * conj 1_b)``."""
    fa = ConfigFunction(space, {a: 1}, popcount(a))
    fb = ConfigFunction(space, {b: 1}, popcount(b))
    return inner_product(fa, fb)
