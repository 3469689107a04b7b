import numpy as np
import pytest

from confspace import ConfigFunction, ContinuousSpace, ExactSpace, configuration, homomorphism_residual
from confspace import indicator, k_apply, k_inverse, random_function, star, unit
from confspace.algebra import Character
from confspace.ktransform import KernelFunction, elementary_symmetric, mobius_transform, zeta_transform

from oracles import e_sym, k_by_subsets, mobius_by_subsets, to_idx


def test_unit_maps_to_one(six):
    table = k_apply(unit(six)).table()
    assert np.all(table == 1)


def test_indicator_maps_to_membership(ab):
    F = k_apply(indicator(ab, ["a"]))
    for g in range(4):
        assert F(g) == k_by_subsets(indicator(ab, ["a"]), to_idx(g, 2)) == (g & 1)


def test_k_apply_matches_subset_oracle(six, rng):
    f = random_function(six, 3, rng)
    F = k_apply(f)
    for g in range(64):
        assert abs(F(g) - k_by_subsets(f, to_idx(g, 6))) <= 1e-12


def test_subcharacter_binomial(six, rng):
    phi = six.function(rng.uniform(-1, 1, 6))
    chi = Character(phi, 3)
    for g in [0, 0b1, 0b101, 0b10101]:
        vals = phi.values[to_idx(g, 6)]
        assert k_apply(chi)(g) == pytest.approx(np.prod(1 + vals), abs=1e-12)
    vals = phi.values[to_idx(0b111111, 6)]
    expected = sum(e_sym(vals, n) for n in range(4))
    assert k_apply(chi)(0b111111) == pytest.approx(expected, abs=1e-12)


def test_inverse_of_one_is_unit(six):
    f = k_inverse(lambda g: 1, 6, six)
    assert f == unit(six)


def test_inverse_round_trips(rng):
    sp = ExactSpace.random(5, rng)
    f = random_function(sp, 5, rng)
    assert k_inverse(k_apply(f), 5).max_abs_diff(f) <= 1e-12
    table = rng.normal(size=32)
    F = lambda gamma: table[gamma.mask]  # noqa: E731
    g = k_inverse(F, 5, sp)
    for m in range(32):
        assert abs(g(m) - mobius_by_subsets(lambda x: table[x], to_idx(m, 5))) <= 1e-12
    assert np.max(np.abs(k_apply(g).table() - table)) <= 1e-12


def test_inverse_round_trips_exact():
    sp = ExactSpace.from_weights([0.5] * 5)
    rng = np.random.default_rng(3)
    f = random_function(sp, 3, rng, exact=True)
    assert k_inverse(k_apply(f), 3) == f


def test_homomorphism(six, rng):
    assert homomorphism_residual(unit(six), unit(six)) == 0
    a, b = indicator(six, ["a"]), indicator(six, ["b"])
    assert homomorphism_residual(a, b) == 0
    for _ in range(10):
        f, g = random_function(six, 3, rng), random_function(six, 3, rng)
        assert homomorphism_residual(f, g) <= 1e-12


def test_homomorphism_against_brute_force(six, rng):
    f, g = random_function(six, 2, rng), random_function(six, 2, rng)
    fg = star(f, g)
    for m in range(64):
        idx = to_idx(m, 6)
        assert abs(k_by_subsets(fg, idx) - k_by_subsets(f, idx) * k_by_subsets(g, idx)) <= 1e-12


def test_linearity(six, rng):
    f, g = random_function(six, 3, rng), random_function(six, 3, rng)
    lhs = k_apply(2.5 * f + (1 - 2j) * g).table()
    rhs = 2.5 * k_apply(f).table() + (1 - 2j) * k_apply(g).table()
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_zeta_mobius_inverse(rng):
    arr = rng.normal(size=128)
    assert np.allclose(mobius_transform(zeta_transform(arr)), arr, atol=1e-12)


def test_elementary_symmetric():
    vals = np.array([[1.0, 2.0, 3.0]])
    assert elementary_symmetric(vals, 3)[0].tolist() == [1.0, 6.0, 11.0, 6.0]


def test_finite_stabilization_continuous():
    """(Kf)(gamma_n) is constant once appended points leave every kernel's support."""
    sp = ContinuousSpace([0.0], [1.0])
    inside = lambda p: np.all(p[:, 0] <= 0.5)  # noqa: E731
    f = KernelFunction(
        sp,
        [
            0.7,
            lambda p: float(np.sin(p[0, 0])) if inside(p) else 0.0,
            lambda p: float(p[0, 0] * p[1, 0]) if inside(p) else 0.0,
        ],
    )
    base = [[0.1], [0.3], [0.45]]
    F = k_apply(f)
    ref = F(configuration(sp, base))
    extra = [[0.6], [0.7], [0.85], [0.99]]
    for n in range(1, len(extra) + 1):
        assert F(configuration(sp, base + extra[:n])) == pytest.approx(ref, abs=1e-15)


def test_continuous_inverse_round_trip():
    sp = ContinuousSpace([0.0], [1.0])
    f = KernelFunction(sp, [0.3, lambda p: float(p[0, 0]), lambda p: float(p[0, 0] + p[1, 0])])
    g = k_inverse(k_apply(f), 2)
    gamma = configuration(sp, [[0.2], [0.6]])
    assert g(gamma) == pytest.approx(f(gamma), abs=1e-14)
    assert g(configuration(sp, [[0.4]])) == pytest.approx(0.4, abs=1e-14)
    assert f.symmetry_defect(np.random.default_rng(0)) == pytest.approx(0.0, abs=1e-15)


def test_exact_functions_reject_continuous_space():
    with pytest.raises(TypeError):
        ConfigFunction(ContinuousSpace([0.0], [1.0]), {})
