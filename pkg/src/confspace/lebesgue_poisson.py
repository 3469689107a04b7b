"""Lebesgue-Poisson measure on finite configurations.

For a non-atomic intensity the level-n part is ``sigma^{(n)} / n!`` and the
total mass over a window is ``exp(sigma(Y))``. On an exact space the
diagonal is excluded, so a single configuration carries mass
``prod_{x in xi} w_x`` and every integral is a finite subset sum.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np

from .algebra import Character, ConfigFunction, FiniteConfiguration, as_configuration
from .ground import ExactSpace, Window, integrate, intensity_of
from .ktransform import KernelFunction, elementary_symmetric


class UnsupportedKernelError(TypeError):
    """The integrand has no quadrature-feasible form in continuous mode."""


class TotalMass(NamedTuple):
    value: float
    atomic: bool  # True when the exact-mode product replaces exp(sigma(Y))


def config_mass(space: ExactSpace, mask: int):
    """``lambda({xi}) = prod_{x in xi} w_x``, in the weights' own number type."""
    out = 1
    for i in range(space.size):
        if mask >> i & 1:
            out = out * space.weights[i]
    return out


def mass_table(space: ExactSpace) -> np.ndarray:
    """Float array ``out[mask] = prod_{i in mask} w_i``."""
    out = np.ones(1)
    for w in space.w:
        out = np.concatenate([out, out * w])
    return out


def exp_series(c, k: int | None = None, rtol: float = 1e-17) -> float:
    """``sum_{n <= k} c^n / n!``; with ``k=None`` the series is summed until terms vanish."""
    total, term, n = 1.0, 1.0, 0
    while True:
        n += 1
        if k is not None and n > k:
            return total
        term *= c / n
        total += term
        if k is None and n > abs(c) and abs(term) <= rtol * abs(total):
            return total


def lp_integral(f, window: Window | None = None):
    """``integral f d lambda`` over ``Gamma_0(Y)`` (``Y`` defaults to the whole space).

    Exact spaces accept ``ConfigFunction`` and ``Character``. Continuous spaces
    accept characters and subcharacters, whose integral is
    ``sum_{n <= k} (integral phi d sigma)^n / n!``.
    """
    if isinstance(f, ConfigFunction):
        space = f.space
        mask = space.full_mask if window is None else window.mask
        total = 0
        for m, v in f.items():
            if m & ~mask == 0:
                total = total + v * config_mass(space, m)
        return total
    if isinstance(f, Character):
        if f.space.is_exact:
            return lp_integral(f.to_function(), window)
        c = integrate(f.phi, window)
        return exp_series(c, f.k)
    if isinstance(f, KernelFunction):
        raise UnsupportedKernelError("general n-point kernels are not integrated in continuous mode")
    raise UnsupportedKernelError(f"cannot integrate {type(f).__name__}")


def lambda_total(window: Window) -> TotalMass:
    """Total mass ``lambda(Gamma_0(Y))``.

    Continuous mode returns ``exp(sigma(Y))``. Exact mode returns
    ``prod_{i in Y} (1 + w_i)`` and sets ``atomic=True``: the atoms break
    non-atomicity and the exponential formula does not apply there.
    """
    space = window.space
    if space.is_exact:
        w = space.w
        value = float(np.prod([1.0 + w[i] for i in range(space.size) if window.mask >> i & 1]))
        return TotalMass(value, True)
    return TotalMass(math.exp(intensity_of(window)), False)


def project(gamma, window: Window) -> FiniteConfiguration:
    """Restriction ``gamma intersect Y``."""
    space = window.space
    gamma = as_configuration(space, gamma)
    if space.is_exact:
        return FiniteConfiguration(space, mask=gamma.mask & window.mask)
    return FiniteConfiguration(space, points=gamma.points[window.contains_points(gamma.points)])


def level_masses(window: Window) -> np.ndarray:
    """``lambda(Gamma^{(n)}(Y))`` for ``n = 0..|Y|`` on an exact space."""
    space = window.space
    w = np.array([space.w[i] for i in range(space.size) if window.mask >> i & 1])
    return elementary_symmetric(w[None, :], len(w))[0]


def lp_mass(event: Iterable[int], window: Window) -> float:
    """``lambda`` of a set of configurations (masks) inside ``window``."""
    space = window.space
    total = 0.0
    for m in set(event):
        if m & ~window.mask:
            raise ValueError(f"configuration {m} leaves the window")
        total += float(config_mass(space, m))
    return total


def cylinder_consistency_residual(base_event: Iterable[int], outer: Window, inner: Window) -> float:
    """Normalised masses of a cylinder event agree across nested windows.

    ``base_event`` is a set of configurations inside ``inner``; its cylinder in
    ``outer`` is every configuration whose restriction to ``inner`` lies in it.
    Returns ``|lambda(cyl)/lambda_total(outer) - lambda(base)/lambda_total(inner)|``.
    """
    if not outer.contains(inner):
        raise ValueError("inner window must be contained in the outer window")
    base = set(base_event)
    cylinder = []
    sub = outer.mask
    while True:
        if sub & inner.mask in base:
            cylinder.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & outer.mask
    lhs = lp_mass(cylinder, outer) / lambda_total(outer).value
    rhs = lp_mass(base, inner) / lambda_total(inner).value
    return abs(lhs - rhs)
