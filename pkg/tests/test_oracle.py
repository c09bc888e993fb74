import json
import math

import numpy as np
import pytest

from hellcert.oracle import (
    DiscreteInstance,
    gram_determinant,
    worst_case_inf,
    worst_case_sup,
)
from hellcert.rng import stream
from hellcert.shifts import DiscreteDistribution, discrete_hellinger


def hellinger_to(p, q):
    return discrete_hellinger(DiscreteDistribution(p), DiscreteDistribution(q))


def dense_grid_sup(p, losses, rho, steps=1000):
    """Third oracle: exhaustive 1e-3 grid over the 2-simplex (K = 3 only)."""
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = (i + j) <= steps
    q = np.stack([i[keep], j[keep], steps - i[keep] - j[keep]], axis=1) / steps
    affinity = np.sqrt(q * p).sum(axis=1)
    feasible = affinity >= 1.0 - rho * rho
    return float((q[feasible] @ losses).max())


def test_instance_validation():
    with pytest.raises(ValueError):
        DiscreteInstance([0.5, 0.5], [0.0, 2.0], 1.0, 0.1)  # loss above ceiling
    with pytest.raises(ValueError):
        DiscreteInstance([0.5, 0.5], [0.0], 1.0, 0.1)  # length mismatch
    with pytest.raises(ValueError):
        DiscreteInstance([0.5, 0.5], [0.0, 1.0], 1.0, 1.2)  # bad radius
    with pytest.raises(ValueError):
        DiscreteInstance(np.ones(40) / 40, np.zeros(40), 1.0, 0.1)  # support too big


def test_instance_json_round_trip():
    inst = DiscreteInstance([0.25, 0.75], [0.2, 0.9], 1.0, 0.3)
    again = DiscreteInstance.from_json(inst.to_json())
    assert np.allclose(again.p.probs, inst.p.probs)
    assert np.allclose(again.losses, inst.losses)
    assert again.rho == inst.rho


def test_sup_zero_radius_is_expectation():
    inst = DiscreteInstance([0.2, 0.3, 0.5], [0.1, 0.9, 0.4], 1.0, 0.0)
    res = worst_case_sup(inst)
    assert res.value == pytest.approx(0.2 * 0.1 + 0.3 * 0.9 + 0.5 * 0.4, abs=1e-15)
    assert np.allclose(res.maximizer.probs, inst.p.probs)


def test_sup_two_point_analytic_family():
    # p = (1, 0), losses = (0, 1): the affinity constraint binds at
    # sqrt(q_0) = 1 - rho^2, so sup = 1 - (1 - rho^2)^2 = rho^2 (2 - rho^2).
    for rho in (0.1, 0.3, 0.55, 0.8, 1.0):
        inst = DiscreteInstance([1.0, 0.0], [0.0, 1.0], 1.0, rho)
        res = worst_case_sup(inst)
        expect = rho * rho * (2.0 - rho * rho)
        assert res.value == pytest.approx(expect, abs=1e-9)
        assert res.maximizer.probs[0] == pytest.approx((1 - rho * rho) ** 2, abs=1e-8)


def test_inf_mirror_of_two_point():
    for rho in (0.1, 0.3, 0.55):
        inst = DiscreteInstance([1.0, 0.0], [1.0, 0.0], 1.0, rho)
        res = worst_case_inf(inst)
        assert res.value == pytest.approx((1 - rho * rho) ** 2, abs=1e-9)


def test_sup_saturates_at_vertex_distance():
    # Once rho reaches H(p, e_argmax), the sup hits the max loss exactly.
    p = [0.6, 0.3, 0.1]
    losses = [0.2, 0.5, 0.9]
    vertex_rho = hellinger_to(p, [0.0, 0.0, 1.0])
    res = worst_case_sup(DiscreteInstance(p, losses, 1.0, vertex_rho))
    assert res.value == pytest.approx(0.9, abs=1e-9)
    below = worst_case_sup(DiscreteInstance(p, losses, 1.0, vertex_rho * 0.95))
    assert below.value < 0.9


def test_sup_monotone_in_radius():
    gen = stream(61)
    p = gen.dirichlet(np.ones(5))
    losses = gen.random(5)
    values = [
        worst_case_sup(DiscreteInstance(p, losses, 1.0, float(r))).value
        for r in np.linspace(0.0, 1.0, 21)
    ]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_k3_grid_never_exceeds_solvers():
    gen = stream(62)
    for _ in range(8):
        p = gen.dirichlet(np.ones(3))
        losses = gen.random(3)
        rho = float(gen.uniform(0.05, 0.6))
        res = worst_case_sup(DiscreteInstance(p, losses, 1.0, rho))
        grid = dense_grid_sup(p, losses, rho)
        assert res.value >= grid - 1e-9
        assert res.certified_gap <= 1e-6
        res_inf = worst_case_inf(DiscreteInstance(p, losses, 1.0, rho))
        grid_inf = -dense_grid_sup(p, -losses, rho)
        assert res_inf.value <= grid_inf + 1e-9


def test_zero_probability_support_point():
    # Mass may move onto a zero-probability coordinate only by leaving the
    # affinity constraint slack; with p = (1/2, 1/2, 0), losses = (0, 0, 1)
    # the best q places 1 - (1 - rho^2)^2 on the third coordinate.
    for rho in (0.2, 0.4, 0.6):
        inst = DiscreteInstance([0.5, 0.5, 0.0], [0.0, 0.0, 1.0], 1.0, rho)
        res = worst_case_sup(inst)
        expect = rho * rho * (2.0 - rho * rho)
        assert res.value == pytest.approx(expect, abs=1e-7)


def test_tied_max_losses():
    # Two coordinates share the max loss; spreading mass across both
    # proportionally to p maximizes affinity, so saturation happens earlier.
    p = [0.5, 0.25, 0.25]
    losses = [0.0, 1.0, 1.0]
    rho_sat = math.sqrt(1.0 - math.sqrt(0.5))
    res = worst_case_sup(DiscreteInstance(p, losses, 1.0, rho_sat + 1e-6))
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_maximizer_invariants():
    gen = stream(63)
    for _ in range(20):
        k = int(gen.integers(2, 9))
        p = gen.dirichlet(np.ones(k))
        losses = gen.random(k)
        rho = float(gen.uniform(0.0, 0.9))
        inst = DiscreteInstance(p, losses, 1.0, rho)
        res = worst_case_sup(inst)
        q = res.maximizer.probs
        assert abs(q.sum() - 1.0) < 1e-12
        assert res.value == pytest.approx(float(q @ losses), abs=1e-12)
        assert hellinger_to(p, q) <= rho + 1e-9


def test_gram_determinant_degenerate_cases():
    gen = stream(64)
    p = DiscreteDistribution(gen.dirichlet(np.ones(5)))
    q = DiscreteDistribution(gen.dirichlet(np.ones(5)))
    f = gen.random(5)
    assert abs(gram_determinant(p, p, f)) < 1e-12  # identical rows
    assert abs(gram_determinant(p, q, np.full(5, 0.7))) < 1e-12  # dependent columns


def test_gram_determinant_psd_sample():
    gen = stream(65)
    for _ in range(500):
        k = int(gen.integers(1, 9))
        p = DiscreteDistribution(gen.dirichlet(np.ones(k)))
        q = DiscreteDistribution(gen.dirichlet(np.ones(k)))
        f = gen.random(k)
        assert gram_determinant(p, q, f) >= -1e-12
