import doctest
import math

import numpy as np
import pytest
from scipy import optimize

import harq_ee.allocator as allocator_mod
from harq_ee.allocator import (
    PowerLadder,
    allocate,
    asymptotic_outages,
    avg_power_of_ladder,
)
from harq_ee.corefns import ChannelSpec, Scheme, phi


def random_instances(n, seed=0, max_L=12):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        L = int(rng.integers(1, max_L + 1))
        spec = ChannelSpec(L, float(rng.uniform(0, 0.95)), tuple(rng.uniform(0.3, 3.0, L)))
        yield Scheme(int(rng.integers(0, 3))), spec, float(rng.uniform(0.2, 6.0)), float(10 ** rng.uniform(-6, -0.5))


def test_doctests():
    assert doctest.testmod(allocator_mod).failed == 0


def test_single_round():
    res = allocate(Scheme.TYPE_I, ChannelSpec.uniform(1, 0.0), 1.0, 0.1)
    assert res.ladder[0] == pytest.approx(10.0, rel=1e-14)
    assert res.avg_power == pytest.approx(10.0, rel=1e-14)
    assert res.alpha == 0.1


def test_two_round_example():
    spec = ChannelSpec.uniform(2, 0.0)
    res = allocate(Scheme.TYPE_I, spec, 1.0, 0.01)
    P1, P2 = res.ladder
    # independent hand route: P2 = (sqrt2 / (2 alpha))^(2/3), P1 = sqrt2 sqrt(P2)
    assert P2 == pytest.approx((math.sqrt(2) / 0.02) ** (2 / 3), rel=1e-12)
    assert P1 == pytest.approx(math.sqrt(2) * math.sqrt(P2), rel=1e-12)
    assert P1 == pytest.approx(5.8480, abs=1e-4)
    assert P1 * P2 == pytest.approx(100.0, rel=1e-12)
    assert res.avg_power == pytest.approx(3 * 0.01 ** (-1 / 3) / 2 ** (2 / 3), rel=1e-12)
    assert res.avg_power == pytest.approx(8.7721, abs=1e-4)
    assert avg_power_of_ladder(Scheme.TYPE_I, spec, res.ladder, 1.0) == pytest.approx(P1 + P2 / P1, rel=1e-13)


def test_smaller_alpha_costs_power():
    for scheme, spec, R, a in random_instances(100, seed=1):
        assert allocate(scheme, spec, R, a / 2).avg_power > allocate(scheme, spec, R, a).avg_power


def test_closed_form_coherence():
    for scheme, spec, R, a in random_instances(1000, seed=2, max_L=20):
        res = allocate(scheme, spec, R, a)
        assert all(p > 0 for p in res.ladder)
        assert avg_power_of_ladder(scheme, spec, res.ladder, R) == pytest.approx(res.avg_power, rel=1e-9)
        assert asymptotic_outages(scheme, spec, res.ladder, R)[-1] == pytest.approx(a, rel=1e-9)


def test_matches_numerical_minimiser():
    """Nelder-Mead on log powers with P_L eliminated by the outage constraint."""
    for scheme, spec, R, a in random_instances(30, seed=3, max_L=4):
        if spec.L == 1:
            continue
        log_phis = [math.log(phi(scheme, spec, l, R)) for l in range(spec.L + 1)]

        def avg(x):
            powers = list(np.exp(x)) + [math.exp(log_phis[-1] - math.log(a) - x.sum())]
            return avg_power_of_ladder(scheme, spec, PowerLadder(tuple(powers)), R)

        res = allocate(scheme, spec, R, a)
        x0 = np.log(res.ladder.powers[:-1]) + 0.3
        opt = optimize.minimize(avg, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
        assert res.avg_power <= opt.fun * (1 + 1e-9)
        assert opt.fun == pytest.approx(res.avg_power, rel=1e-6)


def test_alpha_sensitivity_vanishes_with_rounds():
    spec_of = lambda L: ChannelSpec.uniform(L, 0.3)
    slopes = []
    for L in (1, 2, 4, 8, 16):
        a, b = 1e-3, 1e-3 * 1.001
        pa = allocate(Scheme.CC, spec_of(L), 2.0, a).avg_power
        pb = allocate(Scheme.CC, spec_of(L), 2.0, b).avg_power
        slope = (math.log(pb) - math.log(pa)) / (math.log(b) - math.log(a))
        assert slope == pytest.approx(-1 / (2**L - 1), rel=1e-6, abs=1e-12)
        slopes.append(abs(slope))
    assert slopes == sorted(slopes, reverse=True) and slopes[-1] < 1e-4


def test_avg_power_examples():
    spec1 = ChannelSpec.uniform(1, 0.2)
    assert avg_power_of_ladder(Scheme.IR, spec1, PowerLadder((7.5,)), 2.0) == 7.5
    spec = ChannelSpec.uniform(4, 0.6)
    P, R = 12.0, 1.5
    expected = P * sum(phi(Scheme.CC, spec, l - 1, R) * P ** (-(l - 1)) for l in range(1, 5))
    assert avg_power_of_ladder(Scheme.CC, spec, PowerLadder.uniform(P, 4), R) == pytest.approx(expected, rel=1e-13)
    with pytest.raises(ValueError):
        avg_power_of_ladder(Scheme.CC, spec, PowerLadder((1.0, 0.0, 1.0, 1.0)), R)


@pytest.mark.parametrize("R,alpha", [(0.0, 0.1), (-1.0, 0.1), (1.0, 0.0), (1.0, 1.0), (1.0, 1.5)])
def test_allocate_domain(R, alpha):
    with pytest.raises(ValueError):
        allocate(Scheme.TYPE_I, ChannelSpec.uniform(2, 0.0), R, alpha)


def test_large_L_stays_finite():
    res = allocate(Scheme.IR, ChannelSpec.uniform(40, 0.5), 8.0, 1e-12)
    assert all(math.isfinite(p) and p > 0 for p in res.ladder)
    assert math.isfinite(res.avg_power)


def test_ladder_validation():
    with pytest.raises(ValueError):
        PowerLadder(())
    with pytest.raises(ValueError):
        PowerLadder((1.0, -2.0))
    with pytest.raises(ValueError):
        PowerLadder((1.0,)).check_for(ChannelSpec.uniform(2, 0.0))
