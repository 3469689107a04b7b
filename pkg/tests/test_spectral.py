import csv
import io
import json
import math

import numpy as np
import pytest

from confspace import ExactSpace, gram_matrix, joint_diagonalize, random_function
from confspace.spectral import (
    bernoulli_residual,
    eigenvalue_residual,
    exp_series_identity,
    laplace_of_rho,
    spectral_moment_residual,
)


def test_single_atom_weights():
    sp = ExactSpace(("a",), (0.5,))
    rep = joint_diagonalize(gram_matrix(sp))
    assert rep.weight_of(0) == pytest.approx(0.5, abs=1e-12)
    assert rep.weight_of(1) == pytest.approx(0.5, abs=1e-12)


def test_weights_match_bernoulli(six):
    rep = joint_diagonalize(gram_matrix(six), seed=1)
    assert sorted(rep.configs.tolist()) == list(range(64))
    assert bernoulli_residual(rep) <= 1e-9
    assert rep.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_eigenvalues_are_pairings(six, rng):
    bundle = gram_matrix(six)
    rep = joint_diagonalize(bundle)
    phi = six.function(rng.normal(size=6))
    psi = six.function(rng.normal(size=6))
    assert eigenvalue_residual(phi, rep, bundle) <= 1e-9
    assert eigenvalue_residual(phi + psi, rep, bundle) <= 1e-9


def test_vectors_are_gram_orthonormal(six):
    bundle = gram_matrix(six)
    rep = joint_diagonalize(bundle)
    ident = rep.vectors.T @ bundle.gram @ rep.vectors
    assert np.max(np.abs(ident - np.eye(64))) <= 1e-9


def test_basis_permutation_invariance(rng):
    weights = rng.uniform(0.1, 0.9, 4)
    labels = ("p", "q", "r", "s")
    perm = rng.permutation(4)
    one = joint_diagonalize(gram_matrix(ExactSpace(labels, tuple(weights)))).as_dict()
    two_space = ExactSpace(tuple(labels[i] for i in perm), tuple(weights[perm]))
    two_rep = joint_diagonalize(gram_matrix(two_space), seed=7)
    for mask, val in two_rep.as_dict().items():
        names = two_space.labels_of(mask)
        orig = sum(1 << labels.index(n) for n in names)
        assert val == pytest.approx(one[orig], abs=1e-10)


def test_moment_reconstruction(six, rng):
    rep = joint_diagonalize(gram_matrix(six))
    for _ in range(5):
        assert spectral_moment_residual(random_function(six, 3, rng), rep) <= 1e-10


def test_laplace_single_atom():
    sp = ExactSpace(("a",), (0.5,))
    rep = joint_diagonalize(gram_matrix(sp))
    lhs, rhs = laplace_of_rho(sp.function([math.log(3.0)]), rep)
    assert lhs == pytest.approx(2.0, abs=1e-10)
    assert rhs == pytest.approx(2.0, abs=1e-12)
    assert rep.laplace_checks[-1]["lhs"] == lhs


def test_laplace_general(six, rng):
    rep = joint_diagonalize(gram_matrix(six))
    psi = six.function(rng.uniform(-1, 1, 6))
    lhs, rhs = laplace_of_rho(psi, rep)
    assert abs(lhs - rhs) <= 1e-10


def test_exp_series_identity(six, rng):
    psi = six.function(rng.uniform(-1, 1, 6))
    gamma = ["a", "c", "e"]
    partial, full = exp_series_identity(psi, gamma, 2)
    assert abs(partial - full) > 1e-6
    partial, full = exp_series_identity(psi, gamma, 3)
    assert partial == pytest.approx(full, abs=1e-12)


def test_report_serialisation(ab):
    rep = joint_diagonalize(gram_matrix(ab))
    obj = json.loads(rep.dumps())
    assert len(obj["rows"]) == 4
    assert obj["weight_sum"] == pytest.approx(1.0)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert [r["mask"] for r in rows] == ["0", "1", "2", "3"]
    assert rows[3]["config"] == "a b"
    assert float(rows[3]["predicted"]) == pytest.approx(0.125)


def test_requires_full_basis(six):
    with pytest.raises(ValueError, match="full basis"):
        joint_diagonalize(gram_matrix(six, level_max=2))
