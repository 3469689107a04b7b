"""Joint spectral decomposition of the commuting family ``A(phi)``.

The operators are symmetric for the Gram inner product, so with the Cholesky
factor ``G = L L^T`` the matrices ``L^T A L^{-T}`` are ordinary symmetric
matrices that commute. One generic combination ``A(phi*)`` has simple
spectrum (its eigenvalues are the subset sums ``<gamma, phi*>``), so its
eigenvectors diagonalise the whole family. Each eigenvector is labelled by
the configuration ``gamma`` read off from the 0/1 eigenvalues of the atom
operators ``A(delta_i)``, and its spectral weight is the squared overlap with
the unit ``e``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import Character, ConfigFunction, as_configuration, character
from .ground import TestFunction, pairing
from .ktransform import k_apply
from .moments import GramOperatorBundle, operator_matrix, s_apply


class DegeneracyError(ArithmeticError):
    """A joint eigenvalue could not be resolved to a 0/1 configuration label."""


@dataclass
class SpectralReport:
    space: object
    configs: np.ndarray  # decoded configuration mask per eigenvector
    weights: np.ndarray  # recovered rho(gamma)
    predicted: np.ndarray  # Bernoulli product prod w^[i in gamma] (1 - w)^[i not in gamma]
    atom_eigenvalues: np.ndarray  # (n_vectors, M) Rayleigh quotients of A(delta_i)
    vectors: np.ndarray  # Gram-orthonormal eigenvectors, one column per configuration
    generic_phi: np.ndarray
    attempts: int
    max_label_error: float
    laplace_checks: list = field(default_factory=list)

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(self.weights - self.predicted)

    def weight_of(self, mask: int) -> float:
        return float(self.weights[list(self.configs).index(mask)])

    def as_dict(self) -> dict:
        return {m: float(w) for m, w in zip(self.configs.tolist(), self.weights)}

    def rows(self) -> list[dict]:
        order = np.argsort(self.configs)
        return [
            {
                "mask": int(self.configs[j]),
                "config": " ".join(self.space.labels_of(int(self.configs[j]))),
                "recovered": float(self.weights[j]),
                "predicted": float(self.predicted[j]),
                "residual": float(self.residuals[j]),
            }
            for j in order
        ]

    def to_json(self) -> dict:
        return {
            "labels": list(self.space.labels),
            "weights": [float(w) for w in self.space.weights],
            "rows": self.rows(),
            "max_residual": float(self.residuals.max()),
            "weight_sum": float(self.weights.sum()),
            "attempts": self.attempts,
            "max_label_error": self.max_label_error,
            "laplace_checks": self.laplace_checks,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["mask", "config", "recovered", "predicted", "residual"], lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def bernoulli_weights(space, masks) -> np.ndarray:
    w = space.w
    out = []
    for m in masks:
        bits = (int(m) >> np.arange(space.size)) & 1
        out.append(float(np.prod(np.where(bits, w, 1.0 - w))))
    return np.array(out)


def joint_diagonalize(
    bundle: GramOperatorBundle,
    seed: int = 0,
    tol: float = 1e-8,
    gap_tol: float = 1e-6,
    max_attempts: int = 5,
) -> SpectralReport:
    """Simultaneously diagonalise every ``A(phi)`` on the full indicator basis."""
    if not bundle.complete:
        raise ValueError("joint diagonalisation needs the full basis of all configurations")
    space = bundle.space
    chol = np.linalg.cholesky(bundle.gram)

    def to_symmetric(mat):
        # L^T A L^{-T}
        return scipy.linalg.solve_triangular(chol, (chol.T @ mat).T, lower=True).T

    atoms = [to_symmetric(a) for a in bundle.atom_operators()]
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        generic = rng.uniform(0.1, 1.0, space.size)
        sym = to_symmetric(operator_matrix(TestFunction(space, values=generic), bundle))
        sym = 0.5 * (sym + sym.T)
        evals, evecs = np.linalg.eigh(sym)
        if np.min(np.diff(evals)) > gap_tol:
            break
    else:
        raise DegeneracyError(f"no generic direction separated the spectrum in {max_attempts} attempts")

    atom_vals = np.stack([np.einsum("ij,ik,kj->j", evecs, a, evecs) for a in atoms], axis=1)
    rounded = np.rint(atom_vals)
    err = np.abs(atom_vals - rounded)
    bad = np.unravel_index(np.argmax(err), err.shape)
    if err[bad] > tol or np.any((rounded != 0) & (rounded != 1)):
        raise DegeneracyError(
            f"atom {space.labels[bad[1]]!r} has eigenvalue {atom_vals[bad]:.12g}, not within {tol} of 0 or 1"
        )
    configs = rounded.astype(np.int64) @ (np.int64(1) << np.arange(space.size, dtype=np.int64))
    if len(set(configs.tolist())) != len(configs):
        raise DegeneracyError("decoded configurations are not distinct")

    # Gram-orthonormal vectors v = L^{-T} u; overlap with e is (G v)[0] = (L u)[0]
    vectors = scipy.linalg.solve_triangular(chol.T, evecs, lower=False)
    unit_index = bundle.basis.index(0)
    overlaps = (chol @ evecs)[unit_index]
    weights = overlaps**2
    return SpectralReport(
        space=space,
        configs=configs,
        weights=weights,
        predicted=bernoulli_weights(space, configs),
        atom_eigenvalues=atom_vals,
        vectors=vectors,
        generic_phi=generic,
        attempts=attempt,
        max_label_error=float(err.max()),
    )


def bernoulli_residual(report: SpectralReport) -> float:
    """``max_gamma |rho(gamma) - prod w^[i in gamma] (1 - w)^[i not in gamma]|``."""
    return float(report.residuals.max())


def eigenvalue_residual(phi: TestFunction, report: SpectralReport, bundle: GramOperatorBundle) -> float:
    """Largest ``|v^T G A(phi) v - <gamma, phi>|`` over the joint eigenvectors."""
    mat = operator_matrix(phi, bundle)
    rayleigh = np.einsum("ij,ik,kj->j", report.vectors, bundle.gram @ mat, report.vectors)
    expected = np.array([pairing(int(m), phi) for m in report.configs])
    return float(np.max(np.abs(rayleigh - expected)))


def spectral_moment_residual(f: ConfigFunction, report: SpectralReport) -> float:
    """``|sum_gamma rho(gamma) (Kf)(gamma) - s(f)|``."""
    table = k_apply(f).table().astype(complex)
    lhs = complex(np.dot(report.weights, table[report.configs]))
    return abs(lhs - complex(s_apply(f)))


def laplace_of_rho(psi: TestFunction, report: SpectralReport) -> tuple[float, float]:
    """``(sum_gamma exp(<gamma, psi>) rho(gamma), s(chi_{e^psi - 1}))``."""
    pair = np.array([pairing(int(m), psi) for m in report.configs])
    lhs = float(np.dot(np.exp(pair), report.weights))
    rhs = complex(s_apply(character(psi.apply(np.expm1))))
    report.laplace_checks.append({"psi": psi.values.tolist(), "lhs": lhs, "rhs": rhs.real})
    return lhs, rhs.real


def exp_series_identity(psi: TestFunction, gamma, k: int) -> tuple[float, float]:
    """``((K chi^{(k)}_{e^psi - 1})(gamma), exp(<gamma, psi>))``.

    The two agree exactly once ``k >= |gamma|``.
    """
    gamma = as_configuration(psi.space, gamma)
    partial = k_apply(Character(psi.apply(np.expm1), k))(gamma)
    return float(np.real(partial)), float(np.exp(pairing(gamma, psi)))


__all__ = [
    "DegeneracyError",
    "SpectralReport",
    "bernoulli_residual",
    "bernoulli_weights",
    "eigenvalue_residual",
    "exp_series_identity",
    "joint_diagonalize",
    "laplace_of_rho",
    "spectral_moment_residual",
]
