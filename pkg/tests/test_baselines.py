import math

import numpy as np
import pytest

from harq_ee.allocator import allocate
from harq_ee.baselines import (
    BaselineSolution,
    grid_oracle_allocate,
    grid_oracle_solve,
    uniform_power_solve,
)
from harq_ee.corefns import ChannelSpec, QosSpec, Scheme, phi
from harq_ee.optimizer import solve


# ----------------------------------------------------------------- uniform power

@pytest.mark.parametrize("scheme", list(Scheme))
def test_uniform_equals_optimal_for_one_round(scheme):
    spec, qos = ChannelSpec.uniform(1, 0.0), QosSpec(0.05, 1.5)
    assert uniform_power_solve(scheme, spec, qos).ee / solve(scheme, spec, qos).ee == pytest.approx(1.0, abs=1e-6)


def test_uniform_converges_for_loose_typei():
    spec, qos = ChannelSpec.uniform(5, 0.5), QosSpec(0.99, 2.0)
    u, o = uniform_power_solve(Scheme.TYPE_I, spec, qos), solve(Scheme.TYPE_I, spec, qos)
    assert 0 <= (o.ee - u.ee) / o.ee < 0.02


def test_uniform_gap_for_tight_cc():
    spec, qos = ChannelSpec.uniform(5, 0.5), QosSpec(1e-4, 2.0)
    u, o = uniform_power_solve(Scheme.CC, spec, qos), solve(Scheme.CC, spec, qos)
    assert (o.ee - u.ee) / o.ee > 0.05


def test_uniform_never_beats_optimal():
    rng = np.random.default_rng(0)
    for _ in range(25):
        L = int(rng.integers(1, 7))
        spec = ChannelSpec.uniform(L, float(rng.uniform(0, 0.9)))
        qos = QosSpec(float(10 ** rng.uniform(-4, 0)), float(10 ** rng.uniform(-1, 0.7)))
        s = Scheme(int(rng.integers(0, 3)))
        u = uniform_power_solve(s, spec, qos)
        assert isinstance(u, BaselineSolution) and u.method == "uniform"
        assert u.ee <= solve(s, spec, qos).ee + 1e-9
        assert u.alpha <= qos.epsilon * (1 + 1e-12)
        assert u.goodput >= qos.t0 * (1 - 1e-12)
        assert len(set(u.ladder)) == 1


def test_uniform_average_power_identity():
    spec, qos = ChannelSpec.uniform(3, 0.4), QosSpec(1e-2, 1.0)
    u = uniform_power_solve(Scheme.IR, spec, qos)
    P = u.ladder[0]
    expected = P * sum(phi(Scheme.IR, spec, l - 1, u.rate) * P ** (-(l - 1)) for l in range(1, 4))
    assert u.avg_power == pytest.approx(expected, rel=1e-12)


# ----------------------------------------------------------------- ladder oracle

def test_ladder_oracle_single_round():
    spec = ChannelSpec.uniform(1, 0.3)
    res = grid_oracle_allocate(Scheme.CC, spec, 2.0, 0.05)
    assert res.ladder[0] == pytest.approx(phi(Scheme.CC, spec, 1, 2.0) / 0.05, rel=1e-14)


def test_ladder_oracle_two_round_example():
    res = grid_oracle_allocate(Scheme.TYPE_I, ChannelSpec.uniform(2, 0.0), 1.0, 0.01)
    assert res.avg_power == pytest.approx(8.7721, rel=0.005)
    assert res.avg_power >= allocate(Scheme.TYPE_I, ChannelSpec.uniform(2, 0.0), 1.0, 0.01).avg_power * (1 - 1e-12)


def test_ladder_oracle_refinement_monotone():
    spec = ChannelSpec.uniform(3, 0.6)
    vals = [grid_oracle_allocate(Scheme.IR, spec, 2.0, 1e-3, resolution=51, rounds=r).avg_power for r in range(5)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    target = allocate(Scheme.IR, spec, 2.0, 1e-3).avg_power
    assert vals[-1] == pytest.approx(target, rel=1e-4)


def test_ladder_oracle_never_beats_closed_form():
    rng = np.random.default_rng(1)
    for _ in range(30):
        L = int(rng.integers(2, 4))
        spec = ChannelSpec.uniform(L, float(rng.uniform(0, 0.9)))
        s, R, a = Scheme(int(rng.integers(0, 3))), float(rng.uniform(0.5, 4)), float(10 ** rng.uniform(-4, -1))
        oracle = grid_oracle_allocate(s, spec, R, a, resolution=51)
        assert oracle.avg_power >= allocate(s, spec, R, a).avg_power * (1 - 1e-12)


def test_oracle_limits():
    with pytest.raises(ValueError):
        grid_oracle_allocate(Scheme.CC, ChannelSpec.uniform(4, 0.0), 1.0, 0.01)
    with pytest.raises(ValueError):
        grid_oracle_allocate(Scheme.CC, ChannelSpec.uniform(2, 0.0), 1.0, 0.01, resolution=20)
    with pytest.raises(ValueError):
        grid_oracle_solve(Scheme.CC, ChannelSpec.uniform(4, 0.0), QosSpec(0.1, 1.0))


# ----------------------------------------------------------------- joint oracle

def test_joint_oracle_agrees_with_solve():
    rng = np.random.default_rng(2)
    for _ in range(10):
        spec = ChannelSpec.uniform(2, float(rng.uniform(0, 0.9)))
        qos = QosSpec(float(10 ** rng.uniform(-4, 0)), float(10 ** rng.uniform(-1, 0.7)))
        s = Scheme(int(rng.integers(0, 3)))
        o, c = grid_oracle_solve(s, spec, qos, resolution=60, rounds=4), solve(s, spec, qos)
        assert o.method == "grid"
        assert o.ee <= c.ee * 1.005
        assert o.ee >= c.ee * 0.995
        assert o.alpha <= qos.epsilon * (1 + 1e-12)
        assert o.rate * (1 - o.alpha) >= qos.t0 * (1 - 1e-12)
