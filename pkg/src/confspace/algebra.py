"""Finite configurations and the star-convolution algebra of functions on them.

In exact mode a finite configuration is a bitmask over the atoms and a
``ConfigFunction`` is a sparse map ``mask -> value``. The convolution

    (f * g)(xi) = sum over ordered partitions xi = xi1 + xi2 + xi3 of
                  f(xi1 | xi2) g(xi2 | xi3)

is evaluated through the equivalent covering form: a triple partition is
fixed by the pair ``A = xi1 | xi2``, ``B = xi2 | xi3`` because disjointness of
``xi1`` and ``xi3`` forces ``xi2 = A & B``. Hence ``(f * g)(xi)`` is the sum of
``f(A) g(B)`` over all ``A | B == xi``.

Continuous mode only supports characters, whose products have a closed form.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .ground import ContinuousSpace, ExactSpace, GroundSpace, TestFunction
from .scalars import GaussianRational


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def submasks(mask: int):
    """Yield every submask of ``mask``, including ``mask`` and 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def masks_up_to_level(size: int, level: int) -> list[int]:
    """All masks over ``size`` atoms with at most ``level`` bits, ordered by (level, mask)."""
    out = []
    for n in range(min(level, size) + 1):
        out.extend(sorted(sum(1 << i for i in c) for c in itertools.combinations(range(size), n)))
    return out


@dataclass(frozen=True, eq=False)
class FiniteConfiguration:
    """A finite set of distinct points.

    Exact mode stores a bitmask; continuous mode stores an ``(n, d)`` array of
    points in lexicographic order.
    """

    space: GroundSpace
    mask: int | None = None
    points: np.ndarray | None = None

    def __post_init__(self):
        if self.space.is_exact:
            if self.mask is None or self.mask < 0 or self.mask & ~self.space.full_mask:
                raise ValueError("mask outside the atom set")
            return
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.space.dim)
        if len(pts):
            order = np.lexsort(pts.T[::-1])
            pts = pts[order]
            if np.any(np.all(np.diff(pts, axis=0) == 0, axis=1)):
                raise ValueError("configuration points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        if self.space.is_exact:
            return popcount(self.mask)
        return len(self.points)

    def indices(self) -> list[int]:
        return [i for i in range(self.space.size) if self.mask >> i & 1]

    def __eq__(self, other):
        if not isinstance(other, FiniteConfiguration):
            return NotImplemented
        if self.space.is_exact:
            return self.mask == other.mask
        return self.points.shape == other.points.shape and bool(np.all(self.points == other.points))

    def __hash__(self):
        if self.space.is_exact:
            return hash(self.mask)
        return hash(self.points.tobytes())

    def labels(self):
        return self.space.labels_of(self.mask)

    def subsets(self, max_size: int | None = None):
        """Yield every sub-configuration with at most ``max_size`` points."""
        n = len(self)
        top = n if max_size is None else min(n, max_size)
        if self.space.is_exact:
            for sub in submasks(self.mask):
                if popcount(sub) <= top:
                    yield FiniteConfiguration(self.space, mask=sub)
            return
        for k in range(top + 1):
            for idx in itertools.combinations(range(n), k):
                yield FiniteConfiguration(self.space, points=self.points[list(idx)])


def configuration(space: GroundSpace, items=()) -> FiniteConfiguration:
    """Build a configuration from atom labels (exact) or point coordinates (continuous)."""
    if space.is_exact:
        return FiniteConfiguration(space, mask=space.mask_of(items))
    return FiniteConfiguration(space, points=np.asarray(items, dtype=float))


def as_configuration(space: GroundSpace, gamma) -> FiniteConfiguration:
    if isinstance(gamma, FiniteConfiguration):
        return gamma
    if space.is_exact and isinstance(gamma, (int, np.integer)):
        return FiniteConfiguration(space, mask=int(gamma))
    return configuration(space, gamma)


def _mask(space, xi) -> int:
    if isinstance(xi, (int, np.integer)):
        return int(xi)
    return as_configuration(space, xi).mask


class ConfigFunction:
    """A finitely supported function on finite configurations of an ``ExactSpace``.

    Values are stored sparsely as ``{mask: value}``; any number type closed
    under ``+``, ``*`` and ``conjugate`` works (``complex``, ``Fraction``,
    ``GaussianRational``). ``level_max`` bounds the configuration size of the
    support.
    """

    def __init__(self, space: ExactSpace, values: Mapping[int, object] | None = None, level_max=None):
        if not isinstance(space, ExactSpace):
            raise TypeError("ConfigFunction requires an ExactSpace; use Character in continuous mode")
        self.space = space
        data = {}
        top = 0
        for key, val in (values or {}).items():
            mask = _mask(space, key)
            if mask & ~space.full_mask:
                raise ValueError(f"mask {mask} outside the atom set")
            if val != 0:
                data[mask] = val
                top = max(top, popcount(mask))
        if level_max is None:
            level_max = top
        if top > level_max:
            raise ValueError(f"value at level {top} exceeds level_max={level_max}")
        self.level_max = min(int(level_max), space.size)
        self._data = data

    def __call__(self, xi):
        return self._data.get(_mask(self.space, xi), 0)

    def items(self):
        return self._data.items()

    @property
    def support(self) -> list[int]:
        return sorted(self._data)

    def __len__(self):
        return len(self._data)

    def _check(self, other):
        if not isinstance(other, ConfigFunction):
            raise TypeError("expected a ConfigFunction")
        if self.space is not other.space and self.space != other.space:
            raise ValueError("functions live on different ground spaces")

    def __add__(self, other):
        self._check(other)
        out = dict(self._data)
        for k, v in other._data.items():
            out[k] = out.get(k, 0) + v
        return ConfigFunction(self.space, out, max(self.level_max, other.level_max))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ConfigFunction(self.space, {k: -v for k, v in self._data.items()}, self.level_max)

    def __mul__(self, scalar):
        if isinstance(scalar, ConfigFunction):
            raise TypeError("use star() for the algebra product")
        return ConfigFunction(self.space, {k: scalar * v for k, v in self._data.items()}, self.level_max)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ConfigFunction):
            return NotImplemented
        return self.space == other.space and self._data == other._data

    __hash__ = None

    def conjugate(self) -> "ConfigFunction":
        return involution(self)

    def max_abs_diff(self, other: "ConfigFunction") -> float:
        self._check(other)
        keys = set(self._data) | set(other._data)
        return max((abs(complex(self(k) - other(k))) for k in keys), default=0.0)

    def to_array(self) -> np.ndarray:
        """Dense complex array indexed by mask."""
        arr = np.zeros(1 << self.space.size, dtype=complex)
        for k, v in self._data.items():
            arr[k] = complex(v)
        return arr

    @classmethod
    def from_array(cls, space: ExactSpace, arr, level_max=None) -> "ConfigFunction":
        values = {m: arr[m] for m in range(len(arr)) if arr[m] != 0}
        if level_max is not None:
            values = {m: v for m, v in values.items() if popcount(m) <= level_max}
        return cls(space, values, level_max)

    def to_json(self) -> dict:
        entries = []
        for mask in sorted(self._data, key=lambda m: (popcount(m), m)):
            val = complex(self._data[mask])
            entries.append({"config": self.space.labels_of(mask), "re": val.real, "im": val.imag})
        return {"level_max": self.level_max, "entries": entries}

    @classmethod
    def from_json(cls, space: ExactSpace, obj) -> "ConfigFunction":
        if isinstance(obj, str):
            obj = json.loads(obj)
        values = {}
        for entry in obj["entries"]:
            values[space.mask_of(entry["config"])] = complex(entry["re"], entry.get("im", 0.0))
        return cls(space, values, obj["level_max"])

    def __repr__(self):
        return f"ConfigFunction(level_max={self.level_max}, nnz={len(self._data)})"


def unit(space: ExactSpace) -> ConfigFunction:
    """The algebra identity ``e``: 1 on the empty configuration, 0 elsewhere."""
    return ConfigFunction(space, {0: 1}, level_max=0)


def indicator(space: ExactSpace, xi, value=1) -> ConfigFunction:
    """``value`` times the indicator of the single configuration ``xi``."""
    mask = _mask(space, xi)
    return ConfigFunction(space, {mask: value}, level_max=popcount(mask))


def involution(f: ConfigFunction) -> ConfigFunction:
    return ConfigFunction(f.space, {k: v.conjugate() for k, v in f.items()}, f.level_max)


@dataclass(frozen=True)
class Character:
    """The multiplicative function ``xi -> prod_{x in xi} phi(x)``.

    With ``k`` set, the character is truncated to configurations of at most
    ``k`` points (a subcharacter).
    """

    phi: TestFunction
    k: int | None = None

    def __post_init__(self):
        if self.k is not None and self.k < 0:
            raise ValueError("truncation level must be non-negative")

    @property
    def space(self):
        return self.phi.space

    def __call__(self, xi):
        xi = as_configuration(self.space, xi)
        if self.k is not None and len(xi) > self.k:
            return 0.0
        if self.space.is_exact:
            return float(np.prod(self.phi.values[xi.indices()]))
        return float(np.prod(self.phi(xi.points))) if len(xi) else 1.0

    def kernel(self, n: int):
        """Symmetric level-``n`` kernel ``(n, d) -> value`` (0 above the truncation)."""
        if self.k is not None and n > self.k:
            return lambda pts: 0.0
        phi = self.phi
        return lambda pts: float(np.prod(phi(pts))) if len(pts) else 1.0

    def to_function(self) -> ConfigFunction:
        if not self.space.is_exact:
            raise TypeError("only exact-mode characters are finitely supported")
        space = self.space
        vals = _product_table(self.phi.values)
        level = space.size if self.k is None else min(self.k, space.size)
        return ConfigFunction(
            space,
            {m: complex(vals[m]) for m in range(len(vals)) if popcount(m) <= level},
            level_max=level,
        )


def _product_table(values: np.ndarray) -> np.ndarray:
    """``out[mask] = prod_{i in mask} values[i]`` for all masks."""
    out = np.ones(1, dtype=complex)
    for v in values:
        out = np.concatenate([out, out * v])
    return out


def character(phi: TestFunction, k: int | None = None):
    """Character of ``phi``, truncated to levels ``<= k`` when ``k`` is given.

    On an ``ExactSpace`` the result is a ``ConfigFunction``; on a continuous
    space it is a ``Character`` (not finitely supported when ``k`` is None).
    """
    chi = Character(phi, k)
    if phi.space.is_exact:
        return chi.to_function()
    return chi


def star(f, g):
    """Star-convolution of two configuration functions.

    Exact mode accepts any two ``ConfigFunction``s. In continuous mode only
    untruncated characters are supported, via
    ``chi_phi * chi_psi = chi_{phi + psi + phi psi}``.
    """
    if isinstance(f, Character) and isinstance(g, Character):
        if f.k is not None or g.k is not None:
            raise ValueError("continuous star is only defined for untruncated characters")
        return Character(f.phi + g.phi + f.phi * g.phi)
    if not (isinstance(f, ConfigFunction) and isinstance(g, ConfigFunction)):
        raise TypeError("star needs two ConfigFunctions or two Characters")
    f._check(g)
    acc: dict[int, object] = {}
    g_items = list(g.items())
    for a, fa in f.items():
        for b, gb in g_items:
            u = a | b
            acc[u] = acc.get(u, 0) + fa * gb
    return ConfigFunction(f.space, acc, min(f.level_max + g.level_max, f.space.size))


def random_function(
    space: ExactSpace,
    level_max: int,
    rng: np.random.Generator,
    *,
    exact: bool = False,
    complex_values: bool = True,
    density: float = 1.0,
) -> ConfigFunction:
    """Random function supported on levels ``<= level_max``.

    ``exact=True`` draws ``GaussianRational`` values with small numerators and
    denominators; otherwise values are complex (or real) floats in [-1, 1].
    """
    values = {}
    for mask in masks_up_to_level(space.size, level_max):
        if density < 1.0 and rng.random() > density:
            continue
        if exact:
            re = int(rng.integers(-9, 10)), int(rng.integers(1, 8))
            im = (int(rng.integers(-9, 10)), int(rng.integers(1, 8))) if complex_values else (0, 1)
            values[mask] = GaussianRational(Fraction(*re), Fraction(*im))
        else:
            re = rng.uniform(-1, 1)
            im = rng.uniform(-1, 1) if complex_values else 0.0
            values[mask] = complex(re, im)
    return ConfigFunction(space, values, level_max)


__all__ = [
    "Character",
    "ConfigFunction",
    "ContinuousSpace",
    "FiniteConfiguration",
    "as_configuration",
    "character",
    "configuration",
    "indicator",
    "involution",
    "masks_up_to_level",
    "popcount",
    "random_function",
    "star",
    "submasks",
    "unit",
]
