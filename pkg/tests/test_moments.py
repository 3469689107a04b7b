import math
from fractions import Fraction

import numpy as np
import pytest

from confspace import ConfigFunction, ExactSpace, character, gram_matrix, indicator, random_function, star, unit
from confspace.moments import (
    PositivityError,
    character_norm_bound,
    commutator_residual,
    exact_gram,
    exact_weights,
    growth_check,
    inner_product,
    ldl_pivots,
    norm,
    operator_matrix,
    s_apply,
    subcharacter_tails,
    symmetry_residual,
)

from oracles import gram_by_star, lp_by_subsets, star_by_partitions, subcharacter_tail_sq


def test_single_atom_gram():
    sp = ExactSpace(("a",), (0.5,))
    bundle = gram_matrix(sp)
    assert bundle.basis == [0, 1]
    assert np.allclose(bundle.gram, [[1.0, 0.5], [0.5, 0.5]], atol=1e-15)
    assert np.linalg.det(bundle.gram) == pytest.approx(0.25, abs=1e-15)
    assert bundle.min_eigenvalue > 0


def test_single_atom_operator():
    sp = ExactSpace(("a",), (0.5,))
    bundle = gram_matrix(sp)
    mat = operator_matrix(sp.delta("a"), bundle)
    assert mat.tolist() == [[0.0, 0.0], [1.0, 1.0]]
    assert symmetry_residual(mat, bundle) == 0.0


def test_gram_against_partition_oracle(rng):
    sp = ExactSpace.random(4, rng)
    bundle = gram_matrix(sp)
    expected = gram_by_star(
        sp,
        bundle.basis,
        star_by_partitions,
        lp_by_subsets,
        lambda m: (lambda x, m=m: 1 if x == m else 0),
    )
    assert np.max(np.abs(bundle.gram - expected)) <= 1e-14


def test_truncated_gram_is_submatrix(six):
    full = gram_matrix(six)
    part = gram_matrix(six, level_max=2)
    pos = [full.basis.index(m) for m in part.basis]
    assert np.array_equal(part.gram, full.gram[np.ix_(pos, pos)])
    assert not part.complete and full.complete


def test_gram_cap():
    with pytest.raises(ValueError, match="cap"):
        gram_matrix(ExactSpace.from_weights([0.5] * 13))


def test_positivity_error_on_degenerate_weights():
    sp = ExactSpace.from_weights([1e-17, 0.5])
    with pytest.raises(PositivityError):
        gram_matrix(sp)


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_rational_positivity_certificate(size, rng):
    weights = [Fraction(int(k), 20) for k in rng.integers(1, 20, size)]
    sp = exact_weights(weights)
    pivots = ldl_pivots(exact_gram(sp))
    assert all(isinstance(p, (int, Fraction)) and p > 0 for p in pivots)
    det = math.prod(pivots)
    assert float(det) == pytest.approx(np.linalg.det(gram_matrix(sp).gram), rel=1e-9)


def test_inner_product_matches_gram(six, rng):
    bundle = gram_matrix(six, level_max=3)
    f = random_function(six, 3, rng)
    g = random_function(six, 3, rng)
    cf, cg = bundle.coefficients(f), bundle.coefficients(g)
    assert complex(inner_product(f, g)) == pytest.approx(cg.conj() @ bundle.gram @ cf, abs=1e-12)


def test_s_is_continuous(six, rng):
    """|s(f) - s(g)| <= C ||f - g||_inf with C = total mass."""
    total = float(np.prod(1 + six.w))
    for _ in range(10):
        f = random_function(six, 3, rng)
        g = f + 1e-3 * random_function(six, 3, rng)
        diff = abs(complex(s_apply(f)) - complex(s_apply(g)))
        assert diff <= total * f.max_abs_diff(g) + 1e-15


def test_norm_of_unit(six):
    assert norm(unit(six)) == 1.0


def test_operators_symmetric_and_commuting(six, rng):
    bundle = gram_matrix(six)
    phi = six.function(rng.normal(size=6))
    psi = six.function(rng.normal(size=6))
    assert symmetry_residual(operator_matrix(phi, bundle), bundle) <= 1e-12
    assert commutator_residual(phi, psi, bundle) <= 1e-12


def test_operator_is_multiplication(six, rng):
    """A(phi) f = (sum_i phi_i 1_{x_i}) * f in the algebra."""
    bundle = gram_matrix(six)
    phi = six.function(rng.normal(size=6))
    f = random_function(six, 6, rng)
    lin = ConfigFunction(six, {1 << i: phi.values[i] for i in range(6)})
    expected = bundle.coefficients(star(lin, f))
    got = operator_matrix(phi, bundle) @ bundle.coefficients(f)
    assert np.max(np.abs(expected - got)) <= 1e-12


def test_operator_named_storage(ab):
    bundle = gram_matrix(ab)
    operator_matrix(ab.delta("a"), bundle, name="A(a)")
    obj = bundle.to_json()
    assert set(obj["operators"]) == {"A(a)"}
    assert obj["diagnostics"]["min_eigenvalue"] > 0


def test_growth_bound(six):
    for labels in (["a"], ["a", "b", "c"], list(six.labels)):
        masses, bounds = growth_check(six.window(labels))
        assert np.all(masses <= bounds + 1e-15)


def test_character_norm_bound_example():
    sp = ExactSpace(("a",), (0.5,))
    norm_sq, bound = character_norm_bound(sp.function([1.0]))
    assert norm_sq == pytest.approx(2.5, abs=1e-15)
    assert bound == pytest.approx(math.exp(1.5), rel=1e-15)


def test_character_norm_matches_algebra(six, rng):
    phi = six.function(rng.uniform(-1.5, 1.5, 6))
    norm_sq, bound = character_norm_bound(phi)
    assert norm(character(phi)) ** 2 == pytest.approx(norm_sq, rel=1e-12)
    assert norm_sq <= bound


def test_subcharacter_tails_against_oracle(rng):
    sp = ExactSpace.random(5, rng)
    phi = sp.function(rng.uniform(0.05, 1.5, 5))
    tails = subcharacter_tails(phi)
    for k, t in enumerate(tails):
        assert t == pytest.approx(subcharacter_tail_sq(list(phi.values), list(sp.w), k), abs=1e-12)
    assert tails[-1] == pytest.approx(0.0, abs=1e-14)
    assert all(a > b for a, b in zip(tails[:-1], tails[1:]))


def test_tails_need_not_decrease_for_negative_phi():
    sp = ExactSpace.from_weights([0.9, 0.9])
    tails = subcharacter_tails(sp.function([-2.0, -2.0]))
    assert tails == pytest.approx([0.72, 12.96, 0.0], abs=1e-12)


def test_indicator_norm(ab):
    assert norm(indicator(ab, ["a", "b"])) ** 2 == pytest.approx(0.125, abs=1e-15)
