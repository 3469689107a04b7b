"""Brute-force reference computations, independent of the library code paths."""

import itertools
import math

import numpy as np


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def to_mask(idx):
    return sum(1 << i for i in idx)


def to_idx(mask, size):
    return [i for i in range(size) if mask >> i & 1]


def star_by_partitions(f, g, size):
    """Three-part convolution by enumerating every ordered partition (xi1, xi2, xi3)."""
    out = {}
    for xi in subsets(range(size)):
        total = 0
        for labels in itertools.product((0, 1, 2), repeat=len(xi)):
            p1 = to_mask(x for x, lab in zip(xi, labels) if lab == 0)
            p2 = to_mask(x for x, lab in zip(xi, labels) if lab == 1)
            p3 = to_mask(x for x, lab in zip(xi, labels) if lab == 2)
            total = total + f(p1 | p2) * g(p2 | p3)
        if total != 0:
            out[to_mask(xi)] = total
    return out


def k_by_subsets(f, gamma_idx):
    return sum((f(to_mask(xi)) for xi in subsets(gamma_idx)), 0)


def mobius_by_subsets(F, xi_idx):
    n = len(xi_idx)
    return sum(((-1) ** (n - len(eta)) * F(to_mask(eta)) for eta in subsets(xi_idx)), 0)


def bernoulli_prob(w, mask):
    return math.prod(w[i] if mask >> i & 1 else 1 - w[i] for i in range(len(w)))


def lp_by_subsets(f, w):
    return sum(f(to_mask(xi)) * math.prod(w[i] for i in xi) for xi in subsets(range(len(w))))


def e_sym(values, n):
    return sum(math.prod(c) for c in itertools.combinations(values, n))


def subcharacter_tail_sq(phi, w, k):
    """||chi_phi - chi_phi^(k)||^2 as sum_gamma P(gamma) |sum_{n>k} e_n(phi|gamma)|^2."""
    size = len(w)
    total = 0.0
    for g in range(1 << size):
        vals = [phi[i] for i in to_idx(g, size)]
        kt = sum(e_sym(vals, n) for n in range(k + 1, len(vals) + 1))
        total += bernoulli_prob(w, g) * kt * kt
    return total


def gram_by_star(space, basis, star_fn, lp_fn, make):
    """Gram entries s(1_a * 1_b) via the brute-force partition convolution."""
    size = space.size
    out = np.zeros((len(basis), len(basis)))
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            fa = make(a)
            fb = make(b)
            prod = star_fn(fa, fb, size)
            out[i, j] = lp_fn(lambda m: prod.get(m, 0), list(space.w))
    return out
