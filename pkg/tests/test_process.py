import io
import json
import math

import numpy as np
import pytest

from confspace import ContinuousSpace, ExactSpace, ProcessSampler, character, indicator, unit
from confspace import consistency_check, finite_mass_trend, laplace_estimate, lp_p_residual, random_function
from confspace.process import InvalidScheduleError, batch_means_se, laplace_closed_form, open_set_hits

from oracles import bernoulli_prob, k_by_subsets, lp_by_subsets, to_idx

N = 100_000


def test_zero_intensity_gives_empty_samples():
    sp = ContinuousSpace([0.0], [1.0])
    batch = ProcessSampler(sp.window([0.3], [0.3])).sample(50)
    assert np.all(batch.counts == 0)
    assert all(len(g) == 0 for g in batch)


def test_mean_count():
    sp = ContinuousSpace([0.0], [2.0])
    batch = ProcessSampler(sp.window(), seed=11).sample(N)
    assert abs(batch.counts.mean() - 2.0) <= 3 * math.sqrt(2.0 / N)
    assert batch.rejections == 0


def test_points_distinct_and_inside():
    sp = ContinuousSpace([0.0, 0.0], [1.0, 2.0])
    batch = ProcessSampler(sp.window([0.5, 0.0], [1.0, 1.0]), seed=2).sample(200)
    for gamma in batch:
        assert np.all(gamma.points[:, 0] >= 0.5)
        assert np.all(gamma.points[:, 1] <= 1.0)


def test_nonuniform_density_sampling():
    sp = ContinuousSpace([0.0], [1.0], density=lambda x: 3 * x[:, 0] ** 2)
    batch = ProcessSampler(sp.window(), seed=5).sample(N)
    assert abs(batch.counts.mean() - 1.0) <= 3 * math.sqrt(1.0 / N)
    # E x = 3/4 under density 3x^2
    assert abs(batch.points[:, 0].mean() - 0.75) <= 3 * math.sqrt(0.0375 / len(batch.points))


def test_bernoulli_inclusion(ab):
    batch = ProcessSampler(ab.window(), seed=3).sample(N)
    freq = batch.bits().mean(axis=0)
    assert abs(freq[0] - 0.5) <= 3 * math.sqrt(0.25 / N)
    assert abs(freq[1] - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / N)


def test_reproducible(six):
    sp = ContinuousSpace([0.0], [1.0])
    a = ProcessSampler(sp.window(), seed=99).sample(1000, replica=4)
    b = ProcessSampler(sp.window(), seed=99).sample(1000, replica=4)
    assert np.array_equal(a.counts, b.counts) and a.points.tobytes() == b.points.tobytes()
    c = ProcessSampler(six.window(), seed=99).sample(1000)
    d = ProcessSampler(six.window(), seed=99).sample(1000)
    assert np.array_equal(c.masks, d.masks)
    e = ProcessSampler(sp.window(), seed=100).sample(1000)
    assert not np.array_equal(a.counts, e.counts)


def test_laplace_zero_function(unit_interval):
    est, se = laplace_estimate(ProcessSampler(unit_interval.window(), 1), unit_interval.constant(0.0), 1000)
    assert est == 1.0 and se == 0.0


def test_laplace_continuous(unit_interval):
    f = unit_interval.constant(math.log(2.0))
    assert laplace_closed_form(f) == pytest.approx(math.e, rel=1e-14)
    est, se = laplace_estimate(ProcessSampler(unit_interval.window(), 7), f, N)
    assert abs(est - math.e) <= 3 * se


def test_laplace_bernoulli():
    sp = ExactSpace(("a",), (0.5,))
    f = sp.function([math.log(3.0)])
    assert laplace_closed_form(f) == pytest.approx(2.0, abs=1e-15)
    est, se = laplace_estimate(ProcessSampler(sp.window(), 8), f, N)
    assert abs(est - 2.0) <= 3 * se


def test_standard_error_consistent_with_batch_means(unit_interval):
    f = unit_interval.function(lambda x: 0.8 * x[:, 0])
    batch = ProcessSampler(unit_interval.window(), 4).sample(N)
    values = np.exp(batch.pairings(f))
    se = values.std(ddof=1) / math.sqrt(N)
    bm = batch_means_se(values)
    assert 0.5 <= bm / se <= 2.0


def test_se_scales_like_inverse_sqrt(unit_interval):
    f = unit_interval.constant(0.5)
    sampler = ProcessSampler(unit_interval.window(), 12)
    _, se_small = laplace_estimate(sampler, f, N // 16)
    _, se_big = laplace_estimate(sampler, f, N)
    assert 2.0 <= se_small / se_big <= 8.0


def test_lp_p_examples(ab):
    res = lp_p_residual(indicator(ab, ["a"]))
    assert res.lhs == pytest.approx(0.5) and res.rhs == pytest.approx(0.5)
    assert res.residual <= 1e-15
    res = lp_p_residual(unit(ab))
    assert res.lhs == 1 and res.residual <= 1e-15


def test_lp_p_exact_against_enumeration(rng):
    sp = ExactSpace.random(7, rng)
    f = random_function(sp, 3, rng)
    w = list(sp.w)
    rhs = sum(k_by_subsets(f, to_idx(g, 7)) * bernoulli_prob(w, g) for g in range(1 << 7))
    assert abs(lp_by_subsets(f, w) - rhs) <= 1e-12
    assert lp_p_residual(f).residual <= 1e-12


def test_lp_p_continuous(unit_interval):
    phi = unit_interval.constant(0.7)
    res = lp_p_residual(character(phi, 10), N, seed=5)
    assert res.lhs == pytest.approx(math.exp(0.7), rel=1e-9)
    assert res.residual <= 3 * res.std_error


def test_consistency_same_window(unit_interval):
    rep = consistency_check(unit_interval.window(), unit_interval.window(), N, seed=1)
    assert rep.mean_ok and rep.var_ok and rep.passed


def test_consistency_nested_continuous():
    sp = ContinuousSpace([0.0], [2.0])
    rep = consistency_check(sp.window(), sp.window([0.0], [1.0]), N, seed=2)
    assert abs(rep.projected_mean - 1.0) <= 3 * math.sqrt(1.0 / N)
    assert rep.passed


def test_consistency_exact(ab):
    rep = consistency_check(ab.window(), ab.window(["a"]), N, seed=3)
    assert abs(rep.inclusion["a"]["projected"] - 0.5) <= 3 * math.sqrt(0.25 / N)
    assert rep.passed


def test_consistency_requires_nesting():
    sp = ContinuousSpace([0.0], [2.0])
    with pytest.raises(ValueError):
        consistency_check(sp.window([0.0], [1.0]), sp.window(), 100)


def test_finite_mass_trend():
    line = ContinuousSpace([0.0], [5.0])
    windows = [line.window([0.0], [float(n)]) for n in range(1, 6)]
    rep = finite_mass_trend(windows, N, seed=4)
    assert rep.fractions[0] == 1.0
    for n, (f, p, se) in enumerate(zip(rep.fractions, rep.predicted, rep.std_errors), start=1):
        assert p == pytest.approx(math.exp(-(n - 1)))
        assert abs(f - p) <= 3 * se or (se == 0 and f == p)
    assert rep.passed
    assert rep.fitted_slope == pytest.approx(-1.0, abs=0.05)


def test_finite_mass_invalid_schedule():
    line = ContinuousSpace([0.0], [5.0])
    with pytest.raises(InvalidScheduleError):
        finite_mass_trend([line.window([0.0], [1.0]), line.window([0.0], [1.0])], 100)


def test_open_set_hits():
    sp = ContinuousSpace([0.0, 0.0], [1.0, 1.0])
    res = open_set_hits(sp.window(), sp.window([0.2, 0.2], [0.3, 0.5]), N, seed=6)
    assert res.rhs == pytest.approx(1 - math.exp(-0.03))
    assert res.lhs > 0 and res.residual <= 3 * res.std_error


def test_jsonl_export(ab):
    batch = ProcessSampler(ab.window(), seed=1).sample(5)
    buf = io.StringIO()
    batch.write_jsonl(buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert [x["index"] for x in lines] == list(range(5))
    assert all(set(x) == {"points", "window", "seed", "index"} for x in lines)
    sp = ContinuousSpace([0.0], [1.0])
    cont = ProcessSampler(sp.window(), seed=1).sample(3)
    buf = io.StringIO()
    cont.write_jsonl(buf)
    first = json.loads(buf.getvalue().splitlines()[0])
    assert len(first["points"]) == cont.counts[0]
