"""Ground spaces, windows and test functions.

Two kinds of ground space are supported:

* ``ExactSpace`` -- a finite set of labelled atoms, each carrying a weight in
  ``(0, 1)``. Every quantity is then a finite sum over subsets and can be
  computed exactly.
* ``ContinuousSpace`` -- an axis-aligned box in R^d with an intensity density.
  Integrals are evaluated with tensorised Gauss-Legendre quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, ClassVar, Mapping, Sequence

import numpy as np

EXACT = "exact"
CONTINUOUS = "continuous"


class QuadratureWarning(UserWarning):
    """Raised when two quadrature orders disagree beyond the requested tolerance."""


class GroundSpace:
    mode: str

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT


@dataclass(frozen=True, eq=False)
class ExactSpace(GroundSpace):
    """A finite set of atoms with weights ``w_i`` in the open interval (0, 1).

    Weights may be floats or ``Fraction`` instances; the latter keep integrals
    exact when combined with exact function values. Spaces are capped at
    ``MAX_ATOMS`` atoms since several operations enumerate all ``2**M``
    configurations.
    """

    MAX_ATOMS: ClassVar[int] = 20

    labels: tuple
    weights: tuple
    mode: str = field(default=EXACT, init=False)

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        weights = tuple(self.weights)
        if len(labels) != len(weights):
            raise ValueError("labels and weights must have the same length")
        if len(set(labels)) != len(labels):
            raise ValueError("atom labels must be distinct")
        if len(labels) > self.MAX_ATOMS:
            raise ValueError(f"{len(labels)} atoms exceeds the cap of {self.MAX_ATOMS}")
        for lab, wt in zip(labels, weights):
            if not 0 < wt < 1:
                raise ValueError(f"weight of atom {lab!r} is {wt}; must lie in (0, 1)")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @classmethod
    def from_weights(cls, weights: Sequence | Mapping) -> "ExactSpace":
        if isinstance(weights, Mapping):
            return cls(tuple(weights.keys()), tuple(weights.values()))
        weights = tuple(weights)
        return cls(tuple(_default_label(i) for i in range(len(weights))), weights)

    @classmethod
    def random(cls, size: int, rng: np.random.Generator, low=0.2, high=0.8) -> "ExactSpace":
        return cls.from_weights(tuple(float(x) for x in rng.uniform(low, high, size)))

    def __eq__(self, other):
        if not isinstance(other, ExactSpace):
            return NotImplemented
        return self.labels == other.labels and self.weights == other.weights

    def __hash__(self):
        return hash((self.labels, self.weights))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    @property
    def w(self) -> np.ndarray:
        return np.array([float(x) for x in self.weights])

    @property
    def has_exact_weights(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.weights)

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise KeyError(f"unknown atom {label!r}") from None

    def mask_of(self, labels) -> int:
        mask = 0
        for lab in labels:
            bit = 1 << self.index(lab)
            if mask & bit:
                raise ValueError(f"atom {lab!r} repeated; configurations have distinct points")
            mask |= bit
        return mask

    def labels_of(self, mask: int) -> list:
        return [self.labels[i] for i in range(self.size) if mask >> i & 1]

    def window(self, labels=None) -> "Window":
        mask = self.full_mask if labels is None else self.mask_of(labels)
        return Window(self, mask=mask)

    def function(self, values) -> "TestFunction":
        """Build a test function from a per-atom array or a ``{label: value}`` map."""
        if isinstance(values, Mapping):
            arr = np.zeros(self.size)
            for lab, v in values.items():
                arr[self.index(lab)] = v
        else:
            arr = np.asarray(values, dtype=float)
            if arr.shape != (self.size,):
                raise ValueError(f"expected {self.size} values, got shape {arr.shape}")
        return TestFunction(self, values=arr)

    def delta(self, label) -> "TestFunction":
        return self.function({label: 1.0})


def _default_label(i: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return letters[i] if i < len(letters) else f"x{i}"


@dataclass(frozen=True, eq=False)
class ContinuousSpace(GroundSpace):
    """A box ``[low, high]`` in R^d carrying the intensity ``density(x) dx``.

    ``density`` maps an ``(n, d)`` array to ``n`` non-negative values; ``None``
    means Lebesgue measure. ``order`` is the Gauss-Legendre order per axis.
    """

    low: tuple
    high: tuple
    density: Callable | None = None
    order: int = 32
    density_max: float | None = None
    rtol: float = 1e-10
    mode: str = field(default=CONTINUOUS, init=False)

    def __post_init__(self):
        low = tuple(float(x) for x in np.atleast_1d(self.low))
        high = tuple(float(x) for x in np.atleast_1d(self.high))
        if len(low) != len(high):
            raise ValueError("low and high must have the same dimension")
        if any(h < lo for lo, h in zip(low, high)):
            raise ValueError("window must satisfy low <= high on every axis")
        if not all(np.isfinite(low + high)):
            raise ValueError("window must be bounded")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        if self.density is not None:
            probe = self.density(_grid(low, high, 9))
            if np.any(np.asarray(probe) < 0):
                raise ValueError("intensity density must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.low)

    def rho(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.density is None:
            return np.ones(len(x))
        return np.asarray(self.density(x), dtype=float)

    def window(self, low=None, high=None) -> "Window":
        low = self.low if low is None else tuple(float(v) for v in np.atleast_1d(low))
        high = self.high if high is None else tuple(float(v) for v in np.atleast_1d(high))
        return Window(self, low=low, high=high)

    def function(self, func: Callable, support=None) -> "TestFunction":
        """Wrap a vectorised ``func: (n, d) -> (n,)`` supported in the box ``support``."""
        if support is None:
            support = (self.low, self.high)
        lo, hi = (tuple(float(v) for v in np.atleast_1d(b)) for b in support)
        return TestFunction(self, func=func, support=(lo, hi))

    def constant(self, value: float, support=None) -> "TestFunction":
        return self.function(lambda x: np.full(len(x), float(value)), support)

    def density_bound(self) -> float:
        if self.density_max is not None:
            return float(self.density_max)
        if self.density is None:
            return 1.0
        nodes, _ = _gauss_nodes(self.low, self.high, self.order)
        grid = _grid(self.low, self.high, 65 if self.dim == 1 else 17)
        peak = max(np.max(self.rho(nodes)), np.max(self.rho(grid)))
        return 1.25 * float(peak)


@dataclass(frozen=True, eq=False)
class Window:
    """A bounded region ``Y`` of the ground space: an atom subset or a sub-box."""

    space: GroundSpace
    mask: int | None = None
    low: tuple | None = None
    high: tuple | None = None

    def __post_init__(self):
        sp = self.space
        if sp.is_exact:
            if self.mask is None or self.mask & ~sp.full_mask:
                raise ValueError("exact window must be a subset of the atoms")
        else:
            if self.low is None or self.high is None:
                raise ValueError("continuous window needs low and high corners")
            for lo, hi, slo, shi in zip(self.low, self.high, sp.low, sp.high):
                if lo < slo or hi > shi or hi < lo:
                    raise ValueError("window must lie inside the ground box")

    def __eq__(self, other):
        if not isinstance(other, Window):
            return NotImplemented
        return (self.space is other.space or self.space == other.space) and (
            (self.mask, self.low, self.high) == (other.mask, other.low, other.high)
        )

    def __hash__(self):
        return hash((self.mask, self.low, self.high))

    def contains(self, other: "Window") -> bool:
        if self.space.is_exact:
            return other.mask & ~self.mask == 0
        return all(a <= c and d <= b for a, b, c, d in zip(self.low, self.high, other.low, other.high))

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        lo, hi = np.asarray(self.low), np.asarray(self.high)
        return np.all((points >= lo) & (points <= hi), axis=1)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.high, self.low)))

    def describe(self):
        if self.space.is_exact:
            return self.space.labels_of(self.mask)
        return {"low": list(self.low), "high": list(self.high)}


class TestFunction:
    """A real function on the ground space vanishing outside a declared support.

    Exact mode stores one value per atom. Continuous mode stores a vectorised
    callable and a support box; evaluation is zero outside the box.
    """

    __test__ = False  # keep pytest from collecting this class

    def __init__(self, space: GroundSpace, values=None, func=None, support=None):
        self.space = space
        if space.is_exact:
            self.values = np.asarray(values, dtype=float).copy()
            self.values.setflags(write=False)
            self.func = None
            self.support = None
        else:
            self.values = None
            self.func = func
            self.support = support

    def __call__(self, x):
        if self.space.is_exact:
            return self.values[x]
        pts = np.asarray(x, dtype=float)
        if pts.ndim < 2:
            pts = pts.reshape(-1, 1) if self.space.dim == 1 else pts.reshape(1, -1)
        out = np.zeros(len(pts))
        if len(pts) == 0:
            return out
        lo, hi = np.asarray(self.support[0]), np.asarray(self.support[1])
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        if np.any(inside):
            out[inside] = np.asarray(self.func(pts[inside]), dtype=float)
        return out

    def _combine(self, other, op):
        if isinstance(other, TestFunction):
            if self.space is not other.space and self.space != other.space:
                raise ValueError("test functions live on different ground spaces")
            if self.space.is_exact:
                return TestFunction(self.space, values=op(self.values, other.values))
            lo = tuple(np.minimum(self.support[0], other.support[0]))
            hi = tuple(np.maximum(self.support[1], other.support[1]))
            a, b = self, other
            return TestFunction(self.space, func=lambda x: op(a(x), b(x)), support=(lo, hi))
        scalar = float(other)
        if self.space.is_exact:
            return TestFunction(self.space, values=op(self.values, scalar))
        a = self
        return TestFunction(self.space, func=lambda x: op(a(x), scalar), support=self.support)

    def __add__(self, other):
        if not isinstance(other, TestFunction):
            raise TypeError("adding a constant would break compact support")
        return self._combine(other, np.add)

    def __sub__(self, other):
        if not isinstance(other, TestFunction):
            raise TypeError("subtracting a constant would break compact support")
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def apply(self, ufunc: Callable) -> "TestFunction":
        """Compose with ``ufunc`` pointwise; requires ``ufunc(0) == 0``."""
        if abs(float(ufunc(np.zeros(1))[0])) > 0:
            raise ValueError("ufunc(0) must vanish to keep the support compact")
        if self.space.is_exact:
            return TestFunction(self.space, values=ufunc(self.values))
        a = self
        return TestFunction(self.space, func=lambda x: ufunc(a(x)), support=self.support)


def _grid(low, high, n):
    axes = [np.linspace(lo, hi, n) for lo, hi in zip(low, high)]
    return np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)


def _gauss_nodes(low, high, order):
    x, w = np.polynomial.legendre.leggauss(order)
    axes, wts = [], []
    for lo, hi in zip(low, high):
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (x + 1.0))
        wts.append(half * w)
    nodes = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    weights = np.ones(1)
    for wt in wts:
        weights = np.multiply.outer(weights, wt).ravel()
    return nodes, weights


def _box_integral(space: ContinuousSpace, func, low, high) -> float:
    if any(h <= lo for lo, h in zip(low, high)):
        return 0.0
    results = []
    for order in (space.order, 2 * space.order):
        nodes, weights = _gauss_nodes(low, high, order)
        results.append(float(np.dot(weights, func(nodes) * space.rho(nodes))))
    coarse, fine = results
    err = abs(fine - coarse)
    if err > space.rtol * max(1.0, abs(fine)):
        warnings.warn(
            f"quadrature did not converge: |Q_{2 * space.order} - Q_{space.order}| = {err:.3e}",
            QuadratureWarning,
            stacklevel=3,
        )
    return fine


def intensity_of(window: Window) -> float:
    """Intensity mass ``sigma(Y)`` of a window."""
    space = window.space
    if space.is_exact:
        return float(sum(space.weights[i] for i in range(space.size) if window.mask >> i & 1))
    return _box_integral(space, lambda x: np.ones(len(x)), window.low, window.high)


def exact_intensity_of(window: Window):
    """Exact-mode ``sigma(Y)`` in the weights' own number type."""
    space = window.space
    return sum((space.weights[i] for i in range(space.size) if window.mask >> i & 1), 0)


def integrate(phi: TestFunction, window: Window | None = None) -> float:
    """``integral of phi d sigma`` over ``window`` (default: whole ground space)."""
    space = phi.space
    if window is None:
        window = space.window()
    if space.is_exact:
        return float(sum(space.w[i] * phi.values[i] for i in range(space.size) if window.mask >> i & 1))
    low = np.maximum(window.low, phi.support[0])
    high = np.minimum(window.high, phi.support[1])
    return _box_integral(space, phi, tuple(low), tuple(high))


def pairing(gamma, phi: TestFunction) -> float:
    """``<gamma, phi>``: the sum of ``phi`` over the points of a finite configuration."""
    from .algebra import as_configuration

    gamma = as_configuration(phi.space, gamma)
    if phi.space.is_exact:
        return float(sum(phi.values[i] for i in gamma.indices()))
    if len(gamma) == 0:
        return 0.0
    return float(np.sum(phi(gamma.points)))
