"""The K-transform ``(Kf)(gamma) = sum_{xi subset gamma} f(xi)`` and its inverse.

On an exact space K is the zeta transform of the subset lattice and its
inverse is Moebius inversion. Observables are evaluated lazily so that they
also make sense for continuous configurations.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from .algebra import (
    Character,
    ConfigFunction,
    FiniteConfiguration,
    as_configuration,
    masks_up_to_level,
    popcount,
    star,
    submasks,
)
from .ground import ExactSpace, GroundSpace


def zeta_transform(arr) -> np.ndarray:
    """Subset-sum transform: ``out[m] = sum_{s subset m} arr[s]``. Works on object arrays."""
    out = np.array(arr, copy=True)
    n = out.size.bit_length() - 1
    if out.size != 1 << n:
        raise ValueError("array length must be a power of two")
    view = out.reshape((2,) * n) if n else out
    for ax in range(n):
        hi = [slice(None)] * n
        lo = [slice(None)] * n
        hi[ax], lo[ax] = 1, 0
        view[tuple(hi)] = view[tuple(hi)] + view[tuple(lo)]
    return out


def mobius_transform(arr) -> np.ndarray:
    """Inverse of ``zeta_transform``: ``out[m] = sum_{s subset m} (-1)^{|m - s|} arr[s]``."""
    out = np.array(arr, copy=True)
    n = out.size.bit_length() - 1
    if out.size != 1 << n:
        raise ValueError("array length must be a power of two")
    view = out.reshape((2,) * n) if n else out
    for ax in range(n):
        hi = [slice(None)] * n
        lo = [slice(None)] * n
        hi[ax], lo[ax] = 1, 0
        view[tuple(hi)] = view[tuple(hi)] - view[tuple(lo)]
    return out


def elementary_symmetric(values: np.ndarray, k: int) -> np.ndarray:
    """Elementary symmetric polynomials ``e_0..e_k`` of each row of ``values``.

    ``values`` has shape ``(N, m)``; padding with zeros is harmless.
    """
    values = np.atleast_2d(values)
    out = np.zeros((values.shape[0], k + 1), dtype=values.dtype if values.dtype.kind == "c" else float)
    out[:, 0] = 1.0
    for j in range(values.shape[1]):
        v = values[:, j]
        for n in range(min(j + 1, k), 0, -1):
            out[:, n] = out[:, n] + v * out[:, n - 1]
    return out


class KernelFunction:
    """Continuous-mode configuration function given by symmetric level kernels.

    ``kernels[n]`` maps an ``(n, d)`` array of points to a scalar; ``kernels[0]``
    is the value on the empty configuration (a number).
    """

    def __init__(self, space: GroundSpace, kernels):
        self.space = space
        self.kernels = list(kernels)

    @property
    def level_max(self) -> int:
        return len(self.kernels) - 1

    def __call__(self, xi):
        xi = as_configuration(self.space, xi)
        n = len(xi)
        if n > self.level_max:
            return 0.0
        if n == 0:
            k0 = self.kernels[0]
            return k0(np.empty((0, self.space.dim))) if callable(k0) else k0
        return self.kernels[n](xi.points)

    def symmetry_defect(self, rng: np.random.Generator, probes: int = 8) -> float:
        """Largest change of any kernel under random permutations of random arguments."""
        sp = self.space
        worst = 0.0
        for n in range(2, self.level_max + 1):
            for _ in range(probes):
                pts = rng.uniform(sp.low, sp.high, size=(n, sp.dim))
                perm = rng.permutation(n)
                worst = max(worst, abs(self.kernels[n](pts) - self.kernels[n](pts[perm])))
        return worst


class ConfigObservable:
    """A function ``F(gamma)`` on finite configurations, evaluated lazily."""

    def __init__(self, space: GroundSpace, func: Callable[[FiniteConfiguration], object], table=None):
        self.space = space
        self._func = func
        self._table = table

    def __call__(self, gamma):
        if self._table is not None and isinstance(gamma, (int, np.integer)):
            return self._table[int(gamma)]
        gamma = as_configuration(self.space, gamma)
        if self._table is not None:
            return self._table[gamma.mask]
        return self._func(gamma)

    def table(self) -> np.ndarray:
        """Values on every configuration of an exact space, indexed by mask."""
        if not self.space.is_exact:
            raise TypeError("tables exist only for exact spaces")
        if self._table is None:
            sp = self.space
            self._table = np.array(
                [self._func(FiniteConfiguration(sp, mask=m)) for m in range(1 << sp.size)]
            )
        return self._table

    def __mul__(self, other: "ConfigObservable") -> "ConfigObservable":
        if self.space.is_exact:
            return ConfigObservable(self.space, None, self.table() * other.table())
        return ConfigObservable(self.space, lambda g: self(g) * other(g))

    def __add__(self, other: "ConfigObservable") -> "ConfigObservable":
        if self.space.is_exact:
            return ConfigObservable(self.space, None, self.table() + other.table())
        return ConfigObservable(self.space, lambda g: self(g) + other(g))


def _dense(f: ConfigFunction) -> np.ndarray:
    size = 1 << f.space.size
    if any(not isinstance(v, (complex, float, int)) or isinstance(v, bool) for _, v in f.items()):
        arr = np.zeros(size, dtype=object)
        arr[:] = 0
    else:
        arr = np.zeros(size, dtype=complex)
    for m, v in f.items():
        arr[m] = v
    return arr


def k_apply(f) -> ConfigObservable:
    """K-transform of ``f``.

    ``f`` may be an exact ``ConfigFunction``, a ``Character`` (evaluated as the
    product ``prod (1 + phi(x))``, or its truncation to ``e_0 + ... + e_k`` of
    the values ``phi(x)``), or a continuous ``KernelFunction``.
    """
    if isinstance(f, ConfigFunction):
        items = list(f.items())

        def evaluate(gamma):
            g = gamma.mask
            return sum((v for m, v in items if m & ~g == 0), 0)

        space = f.space
        if space.size <= 16:
            return ConfigObservable(space, evaluate, zeta_transform(_dense(f)))
        return ConfigObservable(space, evaluate)

    if isinstance(f, Character):
        phi, k = f.phi, f.k

        def evaluate(gamma):
            vals = phi.values[gamma.indices()] if gamma.space.is_exact else phi(gamma.points)
            if k is None or k >= len(vals):
                return float(np.prod(1.0 + vals))
            return float(elementary_symmetric(vals[None, :], k)[0].sum())

        return ConfigObservable(f.space, evaluate)

    if isinstance(f, KernelFunction):
        def evaluate(gamma):
            return sum(f(sub) for sub in gamma.subsets(f.level_max))

        return ConfigObservable(f.space, evaluate)

    raise TypeError(f"cannot K-transform {type(f).__name__}")


def k_inverse(F, level_max: int, space: GroundSpace | None = None):
    """Moebius inversion ``(K^{-1}F)(xi) = sum_{eta subset xi} (-1)^{|xi - eta|} F(eta)``.

    ``F`` is a ``ConfigObservable`` or any callable on configurations. Exact
    spaces give a ``ConfigFunction`` on levels ``<= level_max``; continuous
    spaces give a ``KernelFunction`` whose kernels evaluate the alternating sum
    on demand.
    """
    space = space if space is not None else F.space
    if space.is_exact:
        values = {}
        for mask in masks_up_to_level(space.size, level_max):
            n = popcount(mask)
            total = 0
            for sub in submasks(mask):
                term = F(FiniteConfiguration(space, mask=sub))
                total = total + term if (n - popcount(sub)) % 2 == 0 else total - term
            values[mask] = total
        return ConfigFunction(space, values, level_max)

    def make_kernel(n):
        def kernel(pts):
            total = 0.0
            for k in range(n + 1):
                sign = -1.0 if (n - k) % 2 else 1.0
                for idx in itertools.combinations(range(n), k):
                    total += sign * F(FiniteConfiguration(space, points=pts[list(idx)]))
            return total

        return kernel

    empty = F(FiniteConfiguration(space, points=np.empty((0, space.dim))))
    return KernelFunction(space, [empty] + [make_kernel(n) for n in range(1, level_max + 1)])


def homomorphism_residual(f: ConfigFunction, g: ConfigFunction) -> float:
    """``max_gamma |K(f*g)(gamma) - (Kf)(gamma) (Kg)(gamma)|`` over all configurations."""
    if not isinstance(f.space, ExactSpace):
        raise TypeError("homomorphism residual is computed on exact spaces")
    lhs = k_apply(star(f, g)).table()
    rhs = (k_apply(f) * k_apply(g)).table()
    diff = lhs - rhs
    return float(max(abs(complex(d)) for d in diff))
