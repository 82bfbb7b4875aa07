import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatcube.cube import BiasVector, CubeFunction, NormSpec, ProductMeasure, lp_norm
from heatcube.fourier import random_function
from heatcube.functionals import (InequalityReport, MetricSpec, asymmetric_gradient, cotype_ratio,
                                  enflo_functional, metric_stable_functional, pisier_report,
                                  pisier_rhs, pointwise_gradient_bound, poincare_functional,
                                  rademacher_type_ratio, stable_weak_functional,
                                  unbiased_derivatives)

seeds = st.integers(0, 2**32 - 1)


def _brute_enflo(f, p, norm):
    n = f.n
    lhs = rhs = 0.0
    for x in range(1 << n):
        lhs += norm(f.values[x] - f.values[x ^ ((1 << n) - 1)]) ** p
        rhs += sum(norm(f.values[x] - f.values[x ^ (1 << i)]) ** p for i in range(n))
    return lhs / (1 << n), rhs / (1 << n)


@given(st.integers(1, 6), st.integers(1, 3), st.sampled_from([1.0, 1.5, 2.0]), seeds)
def test_enflo_against_brute_force(n, d, p, seed):
    f = random_function(n, d, np.random.default_rng(seed))
    norm = NormSpec.lp(p, d)
    rep = enflo_functional(f, p, norm)
    lhs, rhs = _brute_enflo(f, p, norm)
    assert math.isclose(rep.lhs, lhs, rel_tol=1e-12)
    assert math.isclose(rep.rhs, rhs, rel_tol=1e-12)


def test_enflo_identity_into_l1_is_tight():
    for n in (1, 3, 5):
        rep = enflo_functional(CubeFunction.identity(n), 1.0, NormSpec.lp(1.0, n))
        assert math.isclose(rep.lhs, 2 * n) and math.isclose(rep.rhs, 2 * n)


def test_report_ratio_edge_cases():
    assert InequalityReport(0.0, 0.0).ratio == 0.0
    assert InequalityReport(1.0, 0.0).ratio == math.inf
    assert InequalityReport(1.0, 2.0).holds is None
    assert InequalityReport(3.0, 1.0, 2.0).holds is False


def test_type_two_is_parallelogram_in_hilbert_space():
    rng = np.random.default_rng(0)
    v = rng.standard_normal((5, 3))
    rep = rademacher_type_ratio(v, 2.0, NormSpec.lp(2.0, 3), Tp=1.0)
    assert math.isclose(rep.ratio, 1.0, rel_tol=1e-12)
    assert rep.holds
    assert math.isclose(cotype_ratio(v, 2.0, NormSpec.lp(2.0, 3)).extras["cotype_lower_bound"],
                        1.0, rel_tol=1e-12)


def test_type_lower_bound_for_l1_unit_vectors():
    n = 4
    v = np.eye(n)
    rep = rademacher_type_ratio(v, 2.0, NormSpec.lp(1.0, n))
    # |sum eps_i e_i|_1 = n for every sign pattern
    assert math.isclose(rep.extras["type_lower_bound"], math.sqrt(n))
    with pytest.raises(ValueError):
        cotype_ratio(v, 1.5, NormSpec.lp(2.0))


def test_poincare_for_dictator_matches_hand_computation():
    a = 0.3
    bias = BiasVector((a,))
    rep = poincare_functional(CubeFunction.coordinate(1, 0), bias, 2.0, NormSpec.lp(2.0, 1))
    assert math.isclose(rep.lhs, 4 * a * (1 - a))
    # the biased derivative of x equals x minus its mean, so both sides coincide
    assert math.isclose(rep.rhs, 4 * a * (1 - a))
    assert rep.holds


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 5), st.integers(1, 2), st.sampled_from([1.0, 2.0]), seeds)
def test_pisier_rhs_exact_against_explicit_sum(n, d, p, seed):
    rng = np.random.default_rng(seed)
    f = random_function(n, d, rng)
    alpha = float(rng.uniform(0.1, 0.9))
    norm = NormSpec.lp(2.0, d)
    got, se = pisier_rhs(f, alpha, p, norm)
    bias = BiasVector.constant(alpha, n)
    mu = ProductMeasure(bias).weights()
    total = 0.0
    for delta in itertools.product([-1, 1], repeat=n):
        for x in range(1 << n):
            s = np.zeros(d)
            for i in range(n):
                lo, hi = x & ~(1 << i), x | (1 << i)
                s += delta[i] * (f.values[x] - alpha * f.values[hi] - (1 - alpha) * f.values[lo])
            total += mu[x] * norm(s) ** p
    assert se == 0.0
    assert math.isclose(got, (total / 2 ** n) ** (1 / p), rel_tol=1e-12)


def test_pisier_rhs_sampled_is_consistent():
    rng = np.random.default_rng(3)
    f = random_function(7, 2, rng)
    norm = NormSpec.lp(2.0, 2)
    exact, _ = pisier_rhs(f, 0.3, 1.5, norm)
    est, se = pisier_rhs(f, 0.3, 1.5, norm, trials=4000, rng=rng)
    assert se > 0
    assert abs(est - exact) <= 5 * se
    with pytest.raises(ValueError):
        pisier_rhs(f, 0.3, 1.5, norm, trials=10)


def test_pisier_orlicz_exceeds_lp_for_positive_log_power():
    rng = np.random.default_rng(5)
    f = random_function(5, 1, rng)
    norm = NormSpec.lp(2.0, 1)
    lp = pisier_report(f, 0.4, 2.0, norm, "lp")
    orl = pisier_report(f, 0.4, 2.0, norm, "orlicz")
    assert orl.extras["a"] == 1.0
    assert orl.lhs > lp.lhs
    assert lp.holds is None
    with pytest.raises(ValueError):
        pisier_report(f, 0.4, 2.0, norm, "weak")


def test_asymmetric_gradient_by_hand():
    # h(x) = x0 + 2 x1: at x = (1, 1) both derivatives are positive
    h = CubeFunction.from_callable(2, lambda s: s[0] + 2 * s[1])
    M = asymmetric_gradient(h)
    assert math.isclose(M[3], math.sqrt(1 + 4))
    assert M[0] == 0.0
    with pytest.raises(ValueError):
        asymmetric_gradient(CubeFunction(np.zeros((4, 2))))
    D = unbiased_derivatives(h)
    assert np.allclose(D[1, :, 0], 2 * np.array([-1, -1, 1, 1]))


@settings(deadline=None)
@given(st.integers(1, 6), st.integers(1, 3), st.sampled_from([1.0, 1.5, 2.0]), seeds)
def test_pointwise_gradient_bound_holds(n, d, p, seed):
    f = random_function(n, d, np.random.default_rng(seed))
    assert pointwise_gradient_bound(f, p, NormSpec.lp(p, d)) <= 1e-12


@given(st.integers(1, 6), st.floats(0.2, 1.9), seeds)
def test_metric_stable_weak_below_strong(n, p, seed):
    f = random_function(n, 2, np.random.default_rng(seed))
    rep = metric_stable_functional(f, p, MetricSpec.from_norm(NormSpec.lp(2.0, 2)))
    assert rep.rhs <= rep.extras["rhs_strong"] * (1 + 1e-12)


def test_metric_callback_validation_and_use():
    l1 = lambda u, v: float(np.abs(u - v).sum())
    metric = MetricSpec.from_callback(l1, dim=3)
    f = CubeFunction.identity(3)
    a = metric_stable_functional(f, 1.5, metric)
    b = metric_stable_functional(f, 1.5, MetricSpec.from_norm(NormSpec.lp(1.0, 3)))
    assert math.isclose(a.lhs, b.lhs) and math.isclose(a.rhs, b.rhs)
    with pytest.raises(ValueError):
        MetricSpec.from_callback(lambda u, v: float(np.sum(u - v)), dim=2)
    with pytest.raises(ValueError):
        MetricSpec()


def test_linear_stable_functional_on_unit_vectors():
    n, p = 6, 1.5
    rep = stable_weak_functional(np.eye(n), p, NormSpec.lp(1.0, n))
    # lhs = n^p, weak norm of the all-ones vector is n^(1/p)
    assert math.isclose(rep.lhs, n ** p)
    assert math.isclose(rep.rhs, n)
    assert math.isclose(rep.extras["stable_type_lower_bound"], n ** (1 - 1 / p))
    with pytest.raises(ValueError):
        stable_weak_functional(np.eye(2), 2.0, NormSpec.lp(2.0))
    assert math.isclose(float(lp_norm(np.ones(4), 1.0)), 4.0)
