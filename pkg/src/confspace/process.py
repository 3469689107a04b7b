"""Poisson point process on a window and its exact-space analogue.

On a continuous window the Poisson measure restricted to ``Y`` is
``exp(-sigma(Y)) lambda``, which is sampled as a Poisson(sigma(Y)) number of
i.i.d. points with law ``sigma|_Y / sigma(Y)``.

On an exact space the process satisfying

    integral f d lambda = integral (Kf) d pi

against the subset-product Lebesgue-Poisson measure is the Bernoulli process
that includes atom ``i`` independently with probability ``w_i``.

All randomness comes from numpy's counter-based Philox generator keyed by
``seed + replica``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .algebra import Character, FiniteConfiguration, popcount
from .ground import TestFunction, Window, integrate, intensity_of
from .ktransform import elementary_symmetric, k_apply
from .lebesgue_poisson import lp_integral


class InvalidScheduleError(ValueError):
    """Window schedule whose intensities do not strictly increase."""


def stream(seed: int, replica: int = 0) -> np.random.Generator:
    """Philox stream for ``seed + replica`` (reduced modulo 2**64)."""
    return np.random.Generator(np.random.Philox((int(seed) + int(replica)) % 2**64))


@dataclass
class SampleBatch:
    """``N`` sampled configurations.

    Continuous batches keep a flat ``points`` array with per-sample ``counts``;
    exact batches keep one bitmask per sample in ``masks``.
    """

    window: Window
    seed: int
    counts: np.ndarray
    points: np.ndarray | None = None
    masks: np.ndarray | None = None
    rejections: int = 0
    replica: int = 0

    @property
    def space(self):
        return self.window.space

    def __len__(self):
        return len(self.counts)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.counts)])

    @property
    def owner(self) -> np.ndarray:
        """Sample index of every stored point (continuous batches)."""
        return np.repeat(np.arange(len(self.counts)), self.counts)

    def __getitem__(self, j: int) -> FiniteConfiguration:
        if self.masks is not None:
            return FiniteConfiguration(self.space, mask=int(self.masks[j]))
        lo, hi = self.offsets[j], self.offsets[j + 1]
        return FiniteConfiguration(self.space, points=self.points[lo:hi])

    def __iter__(self):
        return (self[j] for j in range(len(self)))

    def bits(self) -> np.ndarray:
        """``(N, M)`` boolean inclusion matrix (exact batches)."""
        size = self.space.size
        return ((self.masks[:, None] >> np.arange(size)) & 1).astype(bool)

    def pairings(self, phi: TestFunction) -> np.ndarray:
        """``<gamma_j, phi>`` for every sample."""
        if self.masks is not None:
            return self.bits().astype(float) @ phi.values
        vals = phi(self.points) if len(self.points) else np.zeros(0)
        return np.bincount(self.owner, weights=vals, minlength=len(self))

    def padded_values(self, phi: TestFunction) -> np.ndarray:
        """``(N, max count)`` matrix of ``phi`` at each sample's points, zero padded."""
        if self.masks is not None:
            return self.bits() * phi.values[None, :]
        width = int(self.counts.max(initial=0))
        out = np.zeros((len(self), max(width, 1)))
        if len(self.points):
            slot = np.arange(len(self.points)) - np.repeat(self.offsets[:-1], self.counts)
            out[self.owner, slot] = phi(self.points)
        return out

    def project(self, window: Window) -> "SampleBatch":
        if self.masks is not None:
            masks = self.masks & window.mask
            counts = np.array([popcount(int(m)) for m in masks])
            return SampleBatch(window, self.seed, counts, masks=masks, replica=self.replica)
        keep = window.contains_points(self.points) if len(self.points) else np.zeros(0, bool)
        counts = np.bincount(self.owner[keep], minlength=len(self))
        return SampleBatch(window, self.seed, counts, points=self.points[keep], replica=self.replica)

    def contained_in(self, window: Window) -> np.ndarray:
        """Whether each configuration lies inside ``window``."""
        if self.masks is not None:
            return (self.masks & ~window.mask) == 0
        outside = ~window.contains_points(self.points) if len(self.points) else np.zeros(0, bool)
        return np.bincount(self.owner[outside], minlength=len(self)) == 0

    def hits(self, window: Window) -> np.ndarray:
        """Whether each configuration meets ``window``."""
        if self.masks is not None:
            return (self.masks & window.mask) != 0
        inside = window.contains_points(self.points) if len(self.points) else np.zeros(0, bool)
        return np.bincount(self.owner[inside], minlength=len(self)) > 0

    def write_jsonl(self, fh: IO[str]) -> None:
        """One JSON object per configuration: ``{points, window, seed, index}``."""
        win = self.window.describe()
        for j, gamma in enumerate(self):
            if self.masks is not None:
                pts = [[lab] for lab in gamma.labels()]
            else:
                pts = gamma.points.tolist()
            fh.write(json.dumps({"points": pts, "window": win, "seed": self.seed, "index": j}) + "\n")


@dataclass(frozen=True)
class ProcessSampler:
    """Sampler of the Poisson process (continuous) or Bernoulli process (exact) on ``window``."""

    window: Window
    seed: int = 0
    mass: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mass", intensity_of(self.window))

    @property
    def space(self):
        return self.window.space

    def sample(self, n: int, replica: int = 0) -> SampleBatch:
        if n < 1:
            raise ValueError("sample count must be positive")
        rng = stream(self.seed, replica)
        if self.space.is_exact:
            return self._sample_exact(rng, n, replica)
        return self._sample_continuous(rng, n, replica)

    def _sample_exact(self, rng, n, replica):
        space = self.space
        probs = np.where([(self.window.mask >> i) & 1 for i in range(space.size)], space.w, 0.0)
        bits = rng.random((n, space.size)) < probs
        masks = bits.astype(np.int64) @ (np.int64(1) << np.arange(space.size, dtype=np.int64))
        return SampleBatch(self.window, self.seed, bits.sum(axis=1), masks=masks, replica=replica)

    def _draw_points(self, rng, count):
        space = self.space
        lo, hi = np.asarray(self.window.low), np.asarray(self.window.high)
        if space.density is None:
            return rng.uniform(lo, hi, size=(count, space.dim))
        bound = space.density_bound()
        out = np.empty((0, space.dim))
        while len(out) < count:
            need = count - len(out)
            cand = rng.uniform(lo, hi, size=(2 * need + 16, space.dim))
            accept = rng.random(len(cand)) * bound < space.rho(cand)
            out = np.concatenate([out, cand[accept]])
        return out[:count]

    def _sample_continuous(self, rng, n, replica):
        counts = rng.poisson(self.mass, size=n) if self.mass > 0 else np.zeros(n, dtype=np.int64)
        points = self._draw_points(rng, int(counts.sum()))
        owner = np.repeat(np.arange(n), counts)
        rejections = 0
        while len(points) > 1:
            order = np.lexsort(points.T[::-1].tolist() + [owner])
            same = np.all(np.diff(points[order], axis=0) == 0, axis=1) & (np.diff(owner[order]) == 0)
            dup = order[1:][same]
            if len(dup) == 0:
                break
            rejections += len(dup)
            points[dup] = self._draw_points(rng, len(dup))
        return SampleBatch(self.window, self.seed, counts, points=points, rejections=rejections, replica=replica)


def sample(sampler: ProcessSampler, n: int, replica: int = 0) -> SampleBatch:
    return sampler.sample(n, replica)


class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float


class Residual(NamedTuple):
    residual: float
    std_error: float
    lhs: float
    rhs: float


def laplace_closed_form(f: TestFunction, window: Window | None = None) -> float:
    """Exact value of ``E exp(<gamma, f>)``.

    Continuous: ``exp(integral (e^f - 1) d sigma)``. Exact (Bernoulli):
    ``prod_i (1 + w_i (e^{f_i} - 1))``.
    """
    space = f.space
    window = window if window is not None else space.window()
    if space.is_exact:
        inside = [(window.mask >> i) & 1 for i in range(space.size)]
        return float(np.prod(np.where(inside, 1.0 + space.w * np.expm1(f.values), 1.0)))
    return math.exp(integrate(f.apply(np.expm1), window))


def laplace_estimate(sampler: ProcessSampler, f: TestFunction, n: int, replica: int = 0) -> MonteCarloEstimate:
    """Monte Carlo mean of ``exp(<gamma, f>)`` with its standard error."""
    values = np.exp(sampler.sample(n, replica).pairings(f))
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MonteCarloEstimate(float(values.mean()), se)


def batch_means_se(values: np.ndarray, batches: int = 50) -> float:
    """Standard error of the mean estimated from ``batches`` contiguous batch means."""
    values = np.asarray(values, dtype=float)
    usable = len(values) - len(values) % batches
    means = values[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


def bernoulli_probabilities(window: Window) -> np.ndarray:
    """``P(gamma)`` for every mask under the Bernoulli process on ``window``."""
    space = window.space
    probs = np.ones(1)
    for i, w in enumerate(space.w):
        if (window.mask >> i) & 1:
            probs = np.concatenate([probs * (1.0 - w), probs * w])
        else:
            probs = np.concatenate([probs, np.zeros_like(probs)])
    return probs


def lp_p_residual(f, n: int | None = None, *, window: Window | None = None, seed: int = 0) -> Residual:
    """``|integral f d lambda - integral (Kf) d pi|``.

    Exact spaces enumerate all ``2^M`` configurations with their Bernoulli
    probabilities (``std_error`` is 0). Continuous spaces take a character or
    subcharacter and estimate the right side from ``n`` samples.
    """
    space = f.space
    window = window if window is not None else space.window()
    if space.is_exact:
        if isinstance(f, Character):
            f = f.to_function()
        lhs = complex(lp_integral(f, window))
        table = k_apply(f).table().astype(complex)
        rhs = complex(np.dot(bernoulli_probabilities(window), table))
        return Residual(abs(lhs - rhs), 0.0, lhs, rhs)
    if not isinstance(f, Character):
        raise TypeError("continuous LP-P residual needs a character or subcharacter")
    if n is None:
        raise ValueError("continuous mode needs a sample count")
    lhs = float(lp_integral(f, window))
    batch = ProcessSampler(window, seed).sample(n)
    vals = batch.padded_values(f.phi)
    k = vals.shape[1] if f.k is None else f.k
    kf = elementary_symmetric(vals, k).sum(axis=1)
    rhs = float(kf.mean())
    se = float(kf.std(ddof=1) / math.sqrt(n))
    return Residual(abs(lhs - rhs), se, lhs, rhs)


def _count_moments(counts: np.ndarray):
    counts = counts.astype(float)
    n = len(counts)
    mean = counts.mean()
    var = counts.var(ddof=1)
    m4 = np.mean((counts - mean) ** 4)
    return mean, var, math.sqrt(var / n), math.sqrt(max(m4 - var**2, 0.0) / n)


def _histogram_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    top = int(max(a.max(initial=0), b.max(initial=0)))
    table = np.array([np.bincount(a, minlength=top + 1), np.bincount(b, minlength=top + 1)], dtype=float)
    # merge sparse upper bins so every expected cell count is at least 5
    cols = []
    acc = np.zeros(2)
    for j in range(table.shape[1] - 1, -1, -1):
        acc += table[:, j]
        if acc.sum() >= 10:
            cols.append(acc)
            acc = np.zeros(2)
    if acc.sum() and cols:
        cols[-1] = cols[-1] + acc
    if len(cols) < 2:
        return 1.0
    return float(stats.chi2_contingency(np.array(cols).T, correction=False)[1])


@dataclass
class ConsistencyReport:
    projected_mean: float
    direct_mean: float
    mean_se: float
    projected_var: float
    direct_var: float
    var_se: float
    predicted_mean: float
    histogram_tv: float
    histogram_pvalue: float
    inclusion: dict | None
    sigmas: float = 3.0
    p_threshold: float = 1e-3

    @property
    def mean_ok(self) -> bool:
        return abs(self.projected_mean - self.direct_mean) <= self.sigmas * self.mean_se

    @property
    def var_ok(self) -> bool:
        return abs(self.projected_var - self.direct_var) <= self.sigmas * self.var_se

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.var_ok and self.histogram_pvalue >= self.p_threshold


def consistency_check(outer: Window, inner: Window, n: int, seed: int = 0) -> ConsistencyReport:
    """Compare samples on ``outer`` restricted to ``inner`` with direct samples on ``inner``.

    Both sides use independent streams (replicas 0 and 1). Count means and
    variances must agree within 3 standard errors and the count histograms
    must pass a chi-square homogeneity test at level 1e-3.
    """
    if not outer.contains(inner):
        raise ValueError("inner window is not contained in the outer window")
    projected = ProcessSampler(outer, seed).sample(n, replica=0).project(inner)
    direct = ProcessSampler(inner, seed).sample(n, replica=1)
    pm, pv, pse, pvse = _count_moments(projected.counts)
    dm, dv, dse, dvse = _count_moments(direct.counts)
    top = int(max(projected.counts.max(initial=0), direct.counts.max(initial=0)))
    ha = np.bincount(projected.counts, minlength=top + 1) / n
    hb = np.bincount(direct.counts, minlength=top + 1) / n
    inclusion = None
    if inner.space.is_exact:
        space = inner.space
        fa, fb = projected.bits().mean(axis=0), direct.bits().mean(axis=0)
        inclusion = {
            space.labels[i]: {"projected": float(fa[i]), "direct": float(fb[i]), "weight": float(space.w[i])}
            for i in range(space.size)
            if (inner.mask >> i) & 1
        }
    return ConsistencyReport(
        projected_mean=pm,
        direct_mean=dm,
        mean_se=math.hypot(pse, dse),
        projected_var=pv,
        direct_var=dv,
        var_se=math.hypot(pvse, dvse),
        predicted_mean=intensity_of(inner),
        histogram_tv=float(0.5 * np.abs(ha - hb).sum()),
        histogram_pvalue=_histogram_pvalue(projected.counts, direct.counts),
        inclusion=inclusion,
    )


@dataclass
class TrendReport:
    intensities: list
    fractions: list
    predicted: list
    std_errors: list
    fitted_slope: float
    predicted_slope: float
    sigmas: float = 3.0

    @property
    def within(self) -> list:
        return [
            abs(f - p) <= self.sigmas * se if se > 0 else f == p
            for f, p, se in zip(self.fractions, self.predicted, self.std_errors)
        ]

    @property
    def passed(self) -> bool:
        return all(self.within)


def finite_mass_trend(windows: Sequence[Window], n: int, seed: int = 0, inner: Window | None = None) -> TrendReport:
    """Fraction of samples on ``Y_n`` that stay inside a fixed window ``inner``.

    For the Poisson process this is the void probability of ``Y_n - inner``,
    ``exp(-(sigma(Y_n) - sigma(inner)))``, which tends to zero as the windows
    grow. Exact spaces use the Bernoulli void probability ``prod (1 - w_i)``.
    """
    windows = list(windows)
    inner = inner if inner is not None else windows[0]
    sig = [intensity_of(w) for w in windows]
    if len(windows) < 2 or any(b <= a for a, b in zip(sig, sig[1:])):
        raise InvalidScheduleError(f"window intensities must strictly increase, got {sig}")
    base = intensity_of(inner)
    fractions, predicted, ses = [], [], []
    for j, win in enumerate(windows):
        if not win.contains(inner):
            raise InvalidScheduleError("every window must contain the inner window")
        batch = ProcessSampler(win, seed).sample(n, replica=j)
        fractions.append(float(batch.contained_in(inner).mean()))
        if win.space.is_exact:
            outside = win.mask & ~inner.mask
            p = float(np.prod([1 - win.space.w[i] for i in range(win.space.size) if (outside >> i) & 1]))
        else:
            p = math.exp(-(sig[j] - base))
        predicted.append(p)
        ses.append(math.sqrt(p * (1 - p) / n))
    x = np.array(sig) - base
    ok = np.array(fractions) > 0
    slope = float(np.polyfit(x[ok], np.log(np.array(fractions)[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
    pred_x = np.array(predicted) > 0
    pred_slope = float(np.polyfit(x[pred_x], np.log(np.array(predicted)[pred_x]), 1)[0])
    return TrendReport(sig, fractions, predicted, ses, slope, pred_slope)


def open_set_hits(window: Window, region: Window, n: int, seed: int = 0) -> Residual:
    """Frequency of ``gamma`` meeting ``region`` versus ``1 - P(no point in region)``."""
    if not window.contains(region):
        raise ValueError("region must lie inside the sampling window")
    freq = float(ProcessSampler(window, seed).sample(n).hits(region).mean())
    space = window.space
    if space.is_exact:
        pred = 1.0 - float(np.prod([1 - space.w[i] for i in range(space.size) if (region.mask >> i) & 1]))
    else:
        pred = -math.expm1(-intensity_of(region))
    se = math.sqrt(pred * (1 - pred) / n)
    return Residual(abs(freq - pred), se, freq, pred)
