import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rvcones.core import NormKind
from rvcones.errors import OutOfRange
from rvcones.pot import decoupage_split, pot_exceedances, radius_threshold
from rvcones.samplers import RngStream, iid_pareto_pair, pareto_sample


def test_decoupage_all_and_none():
    x = np.arange(5.0)
    d = decoupage_split(x, lambda v: True)
    assert d.complement.size == 0
    np.testing.assert_array_equal(d.counts, np.arange(1, 6))
    d = decoupage_split(x, lambda v: False)
    assert d.exceedances.size == 0
    assert np.all(d.counts == 0)


def test_decoupage_uniform_count():
    u = RngStream(17).uniform(1000)
    d = decoupage_split(u, u > 0.9)
    assert abs(d.counts[-1] - 100) <= 3 * math.sqrt(1000 * 0.09)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60), st.data())
def test_decoupage_partition(values, data):
    x = np.array(values)
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=x.size, max_size=x.size)))
    d = decoupage_split(x, mask)
    np.testing.assert_array_equal(d.reconstruct(), x)
    assert sorted(np.concatenate([d.exceedances, d.complement])) == sorted(x)
    np.testing.assert_array_equal(d.counts, np.cumsum(mask))
    assert np.all(np.diff(np.concatenate([[0], d.counts])) <= 1)


def test_decoupage_vectors():
    z = iid_pareto_pair(RngStream(1), 50)
    d = decoupage_split(z, lambda v: v.sum() > 5)
    np.testing.assert_array_equal(d.reconstruct(), z)


def test_decoupage_independence():
    x = pareto_sample(1.0, RngStream(23), 20_000)
    d = decoupage_split(x, x > 5.0)
    m = min(d.exceedances.size, d.complement.size)
    r = np.corrcoef(d.exceedances[:m], d.complement[:m])[0, 1]
    assert abs(r) < 3 / math.sqrt(m)
    # law of the exceedances given B is again Pareto(1) scaled by 5
    assert stats.kstest(d.exceedances / 5.0, lambda v: 1 - 1 / v).pvalue > 0.01


def test_pot_exact_pareto_scaling():
    radii = pareto_sample(1.0, RngStream(31), 100_000)
    ex = pot_exceedances(radii, 10.0)
    assert np.all(ex.r > 10.0)
    assert stats.kstest(ex.ratios(), lambda v: 1 - 1 / v).pvalue > 0.01


def test_pot_empty_and_single_ray():
    z = np.array([[1.0, 2.0], [0.5, 0.5]])
    assert len(pot_exceedances(z, 100.0)) == 0
    ray = np.outer(pareto_sample(1.0, RngStream(2), 500), [0.25, 0.75])
    ex = pot_exceedances(ray, 2.0, NormKind.L1)
    np.testing.assert_allclose(ex.a, np.tile([0.25, 0.75], (len(ex), 1)), atol=1e-15)
    assert all(abs(p.r - np.sum(p.a * p.r)) < 1e-12 for p in ex.pairs()[:5])


@given(st.integers(0, 1000), st.floats(1.0, 20.0), st.sampled_from(list(NormKind)))
def test_pot_matches_decoupage(seed, t, norm):
    z = iid_pareto_pair(RngStream(seed), 200)
    ex = pot_exceedances(z, t, norm)
    d = decoupage_split(z, lambda v: norm(v) > t)
    assert len(ex) == d.counts[-1]
    np.testing.assert_array_equal(ex.indices, d.exceedance_indices)
    assert np.all(ex.r > t)


def test_pot_strict_threshold():
    z = np.array([[1.0], [2.0], [3.0]])
    assert len(pot_exceedances(z, 2.0)) == 1


def test_radius_threshold():
    z = iid_pareto_pair(RngStream(3), 1000)
    t = radius_threshold(z, 0.1)
    assert len(pot_exceedances(z, t)) == 100
    with pytest.raises(OutOfRange):
        radius_threshold(z, 1.5)
    with pytest.raises(OutOfRange):
        pot_exceedances(z, -1.0)
