import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnclab.errors import InvalidArgument, SizeCapExceeded
from mnclab.estimators import (
    ORACLE_CAP,
    Estimator,
    beta_hat,
    beta_oracle,
    chi_hat,
    chi_oracle,
    diameter,
    nu_hat,
    nu_profile,
    nu_translation_bound,
    verify_witness,
)
from mnclab.sets import ball_sample, constant_set, explicit_set, scale_set, translate_set, union_sets
from mnclab.space import constant_func, make_uniform_space

from conftest import NU


@pytest.fixture
def ladder():
    return constant_set(make_uniform_space(16), 2.0, [0.0, 1.0, 2.0])


def test_constant_ladder(ladder):
    assert chi_oracle(ladder, 1).value == 1.0
    assert chi_oracle(ladder, 1).witness == (1,)
    assert beta_hat(ladder, 2).value == 2.0
    assert beta_oracle(ladder, 3).value == 1.0
    assert diameter(ladder).value == 2.0
    assert chi_hat(ladder, 3).value == 0.0


def test_two_point_set():
    s = make_uniform_space(8)
    f = np.linspace(-1, 1, 8)
    U = explicit_set(s, 2.0, [f, f + 1.0])
    assert chi_hat(U, 1).value == pytest.approx(1.0, rel=1e-12)


def test_singleton_measures_zero(space):
    one = constant_set(space, 2.0, [3.0])
    assert diameter(one).value == 0.0
    assert chi_hat(one, 1).value == 0.0
    assert chi_oracle(one, 1).value == 0.0
    assert Estimator("beta", 2)(one) == 0.0
    with pytest.raises(InvalidArgument):
        beta_hat(one, 2)


def test_budget_errors(ladder):
    for bad in (0, -1, 1.5, True):
        with pytest.raises(InvalidArgument):
            chi_hat(ladder, bad)
    with pytest.raises(InvalidArgument):
        beta_hat(ladder, 1)
    with pytest.raises(InvalidArgument):
        beta_hat(ladder, 4)
    with pytest.raises(InvalidArgument):
        nu_hat(ladder, 0.0)
    with pytest.raises(InvalidArgument):
        nu_hat(ladder, 2.0)
    with pytest.raises(InvalidArgument):
        Estimator("gamma", 1)
    with pytest.raises(InvalidArgument):
        Estimator("chi")


def test_oracle_cap(space):
    big = ball_sample(space, 2.0, 1.0, ORACLE_CAP + 1, 0)
    with pytest.raises(SizeCapExceeded):
        chi_oracle(big, 2)
    with pytest.raises(SizeCapExceeded):
        beta_oracle(big, 2)


@pytest.mark.parametrize("kind,budget", [("diameter", None), ("chi", 1), ("chi", 4), ("beta", 2), ("beta", 5)])
def test_witnesses_reproduce_values(ball, kind, budget):
    est = Estimator(kind, budget).estimate(ball)
    assert verify_witness(ball, est) == pytest.approx(est.value, rel=1e-12, abs=1e-15)


def test_nu_witness(ball, spikes):
    for U in (ball, spikes):
        est = NU.estimate(U)
        _, mask = est.witness
        assert mask.mass <= 1 / 1024 * (1 + 1e-12)
        assert verify_witness(U, est) == pytest.approx(est.value, rel=1e-12)


def test_spikes_and_indicators(spikes, indicators):
    assert NU(spikes) == 1.0
    # every indicator sits on one cell, so a single-cell mask captures it whole
    assert nu_hat(indicators, 1 / 1024).value == pytest.approx(1.0, rel=1e-12)
    assert beta_hat(indicators, 8).value == pytest.approx(math.sqrt(2), rel=1e-15)
    assert diameter(indicators).value == pytest.approx(math.sqrt(2), rel=1e-15)


@pytest.mark.parametrize("t", [0.25, 0.5, 2.0, 4.0])
@pytest.mark.parametrize("kind,budget", [("diameter", None), ("chi", 3), ("beta", 4), ("nu", 1 / 64)])
def test_positive_homogeneity(ball, t, kind, budget):
    est = Estimator(kind, budget)
    a, b = est.estimate(scale_set(ball, t)), est.estimate(ball)
    assert a.value == pytest.approx(t * b.value, rel=1e-12)
    w = lambda e: e.witness[0] if kind == "nu" else e.witness
    assert w(a) == w(b)


def test_translation(ball, space):
    f = constant_func(space, 0.7)
    moved = translate_set(ball, f)
    for est in (Estimator("diameter"), Estimator("chi", 3), Estimator("beta", 4)):
        assert est(moved) == pytest.approx(est(ball), rel=1e-12)
    for delta in (1 / 1024, 1 / 32):
        gap = abs(nu_hat(moved, delta).value - nu_hat(ball, delta).value)
        assert gap <= nu_translation_bound(f, delta) * (1 + 1e-12)


def _first(U, k):
    return explicit_set(U.space, U.p, U.values[:k])


def test_monotone_under_inclusion(ball):
    sub = _first(ball, 20)
    for est in (Estimator("diameter"), Estimator("beta", 3), NU):
        assert est(sub) <= est(ball) * (1 + 1e-12)
    # discrete nets are not monotone: a larger set can offer a better centre
    s = make_uniform_space(4)
    assert chi_oracle(constant_set(s, 2.0, [0.0, 2.0]), 1).value == 2.0
    assert chi_oracle(constant_set(s, 2.0, [0.0, 1.0, 2.0]), 1).value == 1.0


def test_semi_additivity(space):
    U = ball_sample(space, 2.0, 1.0, 6, 1)
    V = ball_sample(space, 2.0, 0.5, 6, 2)
    both = union_sets(U, V)
    assert chi_oracle(both, 2).value <= max(chi_oracle(U, 1).value, chi_oracle(V, 1).value) + 1e-12
    assert NU(both) == max(NU(U), NU(V))


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    n=st.integers(3, 10),
    p=st.sampled_from([1.0, 2.0, 3.0]),
    data=st.data(),
)
def test_greedy_sandwich(seed, n, p, data):
    rng = np.random.default_rng(seed)
    U = explicit_set(make_uniform_space(16), p, rng.random((n, 16)) * 4 - 2)
    N = data.draw(st.integers(1, n - 1))
    M = data.draw(st.integers(2, n))
    opt, greedy = chi_oracle(U, N).value, chi_hat(U, N).value
    assert opt <= greedy * (1 + 1e-12) + 1e-15
    assert greedy <= 2 * opt * (1 + 1e-12) + 1e-15
    bopt, bgreedy = beta_oracle(U, M).value, beta_hat(U, M).value
    assert bopt / 2 <= bgreedy * (1 + 1e-12) + 1e-15
    assert bgreedy <= bopt * (1 + 1e-12) + 1e-15
    if M == 2:
        assert bgreedy == bopt


def test_nu_profile_verdicts(space, spikes):
    smooth = ball_sample(space, 2.0, 1.0, 32, 0, mixture="smooth")
    prof = nu_profile(smooth)
    assert prof.verdict == "vanishing"
    assert prof.table()["columns"] == ["delta", "nu_hat"]
    assert nu_profile(spikes, peak=8.0).verdict == "non-vanishing"
    assert nu_profile(spikes, peak=8.0).plateau() == 1.0
    with pytest.raises(InvalidArgument):
        nu_profile(spikes, [1 / 64, 1 / 32])
    with pytest.raises(InvalidArgument):
        nu_profile(spikes, [1 / 4096])


@pytest.mark.parametrize("peak", [None, 8.0])
def test_nu_profile_monotone_in_delta(ball, peak):
    vals = nu_profile(ball, peak=peak).values
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_peak_zeroes_bounded_members(space):
    U = constant_set(space, 2.0, [1.0, -3.0])
    assert nu_hat(U, 1 / 1024, peak=8.0).value == 0.0
    assert nu_hat(U, 1 / 1024).value == pytest.approx(3 / 32, rel=1e-12)


def test_estimator_round_trip():
    for e in (Estimator("diameter"), Estimator("chi", 4), Estimator("beta", 3), NU):
        assert Estimator.from_dict(e.to_dict()) == e
    assert NU.label() == "nu(0.000976562,peak=8)"
    with pytest.raises(InvalidArgument):
        Estimator("chi", 2, peak=8.0)
