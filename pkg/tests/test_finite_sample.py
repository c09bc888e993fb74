import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hellcert.bounds import LossStatistics, RadiusValidityError, max_valid_radius_upper, upper_bound
from hellcert.finite_sample import (
    ConfidenceBudget,
    EmpiricalSample,
    StreamingMoments,
    corollary_lower_bound,
    corollary_upper_bound,
    hoeffding_mean_lower,
    hoeffding_mean_upper,
    max_valid_radius_empirical,
    max_valid_radius_empirical_lower,
    maurer_pontil_std_upper,
    pairwise_unbiased_variance,
)
from hellcert.rng import stream

# mpmath-frozen references.
HOEFF_UP_02_100_001 = 0.35174271293851464  # 0.2 + sqrt(ln(100)/200)
HOEFF_LO_02_100_001 = 0.048257287061485365
MP_STD_CONST_101_005 = 0.24477468306808165  # sqrt(2 ln 20 / 100)
MVR_EMP_1E6 = 0.8247240066542434  # L=0.1 S2=0.09 M=1 n=1e6 d=0.01, ln(2/d) uniform
MVR_POP = 0.8269052146305295
COR_UP_REF = 0.17194693615258724  # L=0.1 S2=0.09 M=1 n=200 d=0.05 rho=0.05


def make_sample(mean, variance, n, ceiling=1.0):
    """Statistics-only sample via streamed moments (for formula-level tests)."""
    m = StreamingMoments()
    m.n = n
    m.mean = mean
    m._m2 = variance * (n - 1)
    return EmpiricalSample.from_moments(m, ceiling)


def test_sample_validation():
    with pytest.raises(ValueError):
        EmpiricalSample([0.5], 1.0)  # n < 2
    with pytest.raises(ValueError, match="index 2"):
        EmpiricalSample([0.1, 0.2, 1.5], 1.0)
    with pytest.raises(ValueError, match="index 0"):
        EmpiricalSample([-0.1, 0.2], 1.0)


def test_sample_moments():
    s = EmpiricalSample([0.0, 1.0, 1.0, 0.0], 1.0)
    assert s.empirical_mean == 0.5
    assert s.unbiased_variance == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_hoeffding_examples():
    s = make_sample(0.2, 0.0, 100)
    assert hoeffding_mean_upper(s, 1.0) == s.empirical_mean
    assert hoeffding_mean_lower(s, 1.0) == s.empirical_mean
    assert hoeffding_mean_upper(s, 0.01) == pytest.approx(HOEFF_UP_02_100_001, abs=1e-12)
    assert hoeffding_mean_lower(s, 0.01) == pytest.approx(HOEFF_LO_02_100_001, abs=1e-12)
    big = make_sample(0.2, 0.0, 10**9)
    assert hoeffding_mean_upper(big, 0.01) == pytest.approx(0.2, abs=1e-4)


def test_hoeffding_lower_clamps():
    s = make_sample(0.0, 0.0, 50)
    assert hoeffding_mean_lower(s, 0.1) == 0.0


def test_maurer_pontil_examples():
    s = EmpiricalSample(np.full(101, 0.3), 1.0)
    assert maurer_pontil_std_upper(s, 1.0) == 0.0
    assert maurer_pontil_std_upper(s, 0.05) == pytest.approx(MP_STD_CONST_101_005, abs=1e-12)
    big = make_sample(0.3, 0.04, 10**9)
    assert maurer_pontil_std_upper(big, 0.05) == pytest.approx(0.2, abs=1e-3)


def test_pairwise_variance_is_the_unbiased_variance():
    gen = stream(404)
    for _ in range(50):
        n = int(gen.integers(2, 40))
        x = gen.random(n)
        assert pairwise_unbiased_variance(x) == pytest.approx(
            float(np.var(x, ddof=1)), abs=1e-12
        )


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=30))
def test_pairwise_variance_property(values):
    x = np.asarray(values)
    assert pairwise_unbiased_variance(x) == pytest.approx(
        float(np.var(x, ddof=1)), abs=1e-10
    )


def test_streaming_moments_match_batch():
    gen = stream(11)
    x = gen.random(1000)
    m = StreamingMoments().update(x)
    assert m.mean == pytest.approx(float(np.mean(x)), abs=1e-13)
    assert m.unbiased_variance == pytest.approx(float(np.var(x, ddof=1)), abs=1e-13)


def test_budget_validation():
    with pytest.raises(ValueError):
        ConfidenceBudget(0.0)
    with pytest.raises(ValueError):
        ConfidenceBudget(1.0)
    with pytest.raises(ValueError):
        ConfidenceBudget(0.1, "five_way")


def test_corollary_upper_at_zero_radius_is_exact_mean():
    s = EmpiricalSample(np.array([0.1, 0.4, 0.7, 0.9]), 1.0)
    cert = corollary_upper_bound(s, 0.0, ConfidenceBudget(0.05))
    assert cert.bound == s.empirical_mean


def test_corollary_upper_frozen_value():
    s = make_sample(0.1, 0.09, 200)
    cert = corollary_upper_bound(s, 0.05, ConfidenceBudget(0.05))
    assert cert.bound == pytest.approx(COR_UP_REF, abs=1e-10)
    assert cert.confidence == pytest.approx(0.95)


def test_corollary_upper_ceiling_saturation():
    # All losses at the ceiling: only rho = 0 is certifiable and the output
    # sits at the ceiling.
    s = EmpiricalSample(np.ones(100), 1.0)
    budget = ConfidenceBudget(0.05)
    assert max_valid_radius_empirical(s, budget) == 0.0
    cert = corollary_upper_bound(s, 0.0, budget)
    assert cert.bound == 1.0
    with pytest.raises(RadiusValidityError):
        corollary_upper_bound(s, 0.1, budget)


def test_corollary_upper_requires_two_way():
    s = make_sample(0.2, 0.01, 100)
    with pytest.raises(ValueError, match="two_way"):
        corollary_upper_bound(s, 0.05, ConfidenceBudget(0.05, "three_way"))


def test_corollary_lower_clamps_and_ordering():
    s = EmpiricalSample(np.zeros(100), 1.0)
    cert = corollary_lower_bound(s, 0.0, ConfidenceBudget(0.05, "three_way"))
    assert cert.bound == 0.0
    s2 = EmpiricalSample(stream(3).random(400), 1.0)
    up = corollary_upper_bound(s2, 0.0, ConfidenceBudget(0.05))
    lo = corollary_lower_bound(s2, 0.0, ConfidenceBudget(0.05, "three_way"))
    assert lo.bound <= s2.empirical_mean <= up.bound


def test_corollary_lower_approaches_mean():
    # At rho = 0 the only slack left is the delta/3 Hoeffding term, which
    # dies as n grows.
    s = make_sample(0.8, 0.16, 10**8)
    cert = corollary_lower_bound(s, 0.0, ConfidenceBudget(1.0 - 1e-9, "three_way"))
    assert cert.bound == pytest.approx(0.8, abs=1e-3)


def test_corollary_lower_requires_three_way():
    s = make_sample(0.2, 0.01, 100)
    with pytest.raises(ValueError, match="three_way"):
        corollary_lower_bound(s, 0.05, ConfidenceBudget(0.05))


def test_max_valid_radius_empirical_frozen_and_convergent():
    assert max_valid_radius_empirical(
        make_sample(0.1, 0.09, 10**6), ConfidenceBudget(0.01)
    ) == pytest.approx(MVR_EMP_1E6, abs=1e-12)
    # Approaches the population radius; 1e-3 agreement needs n ~ 1e7.
    assert max_valid_radius_empirical(
        make_sample(0.1, 0.09, 10**7), ConfidenceBudget(0.01)
    ) == pytest.approx(MVR_POP, abs=1e-3)


def test_max_valid_radius_empirical_degenerate_cases():
    # All-zero losses at tiny n: some radius certifiable, far from the full ball.
    mv = max_valid_radius_empirical(EmpiricalSample(np.zeros(4), 1.0), ConfidenceBudget(0.5))
    assert 0.0 < mv < 1.0
    # Tiny n with zero mean: headroom positive, but a mean at the ceiling kills it.
    assert max_valid_radius_empirical(
        EmpiricalSample(np.ones(4), 1.0), ConfidenceBudget(0.5)
    ) == 0.0
    # S^2 = 0, L < M, huge n: approaches 1 (population V -> 0 limit).
    assert max_valid_radius_empirical(
        make_sample(0.3, 0.0, 10**10), ConfidenceBudget(0.999)
    ) > 0.99


def test_max_valid_radius_lower_zero_mean():
    assert max_valid_radius_empirical_lower(
        EmpiricalSample(np.zeros(10), 1.0), ConfidenceBudget(0.05, "three_way")
    ) == 0.0


def test_corollary_lower_covers_oracle_inf():
    # Bernoulli(0.8) losses, n=500, rho=0.1: the conservative lower
    # certificate must sit below the exact infimum in every trial.
    from hellcert.oracle import DiscreteInstance, worst_case_inf

    true_inf = worst_case_inf(
        DiscreteInstance([0.2, 0.8], [0.0, 1.0], 1.0, 0.1)
    ).value
    budget = ConfidenceBudget(0.05, "three_way")
    failures = 0
    for t in range(200):
        gen = stream(909, t)
        sample = EmpiricalSample((gen.random(500) < 0.8).astype(float), 1.0)
        try:
            if corollary_lower_bound(sample, 0.1, budget).bound > true_inf:
                failures += 1
        except RadiusValidityError:
            failures += 1
    assert failures == 0


def test_convergence_to_population_bound():
    # i.i.d. draws from a fixed discrete P; at n = 1e6 the finite-sample
    # certificate sits within 1e-2 of the population certificate.
    p = np.array([0.4, 0.3, 0.2, 0.1])
    values = np.array([0.0, 0.2, 0.5, 1.0])
    mean = float(p @ values)
    var = float(p @ (values - mean) ** 2)
    rho, delta = 0.1, 0.05
    pop = upper_bound(LossStatistics(mean, var, 1.0), rho).bound

    moments = StreamingMoments()
    gen = stream(1234)
    for _ in range(10):
        moments.update(values[gen.choice(4, size=100_000, p=p)])
    sample = EmpiricalSample.from_moments(moments, 1.0)
    cert = corollary_upper_bound(sample, rho, ConfidenceBudget(delta))
    assert cert.bound == pytest.approx(pop, abs=1e-2)
    assert cert.bound >= pop - 1e-3  # conservative side
