import math

import numpy as np
import pytest

from harq_ee.corefns import LN2, ChannelSpec, QosSpec, Scheme, kappa, psi, theta
from harq_ee.limits import (
    AsymptoticReport,
    ee_limit,
    kappa_inf,
    kappa_truncation_bound,
    theta_inf,
)
from harq_ee.optimizer import solve


def test_kappa_inf_values():
    assert kappa_inf(20) == kappa(20)
    assert kappa_inf(20) == pytest.approx(1.6617, abs=5e-4)
    assert kappa_truncation_bound(20) <= 2.95e-6
    # the default truncation sits within the L = 20 error bound of kappa_20
    assert 0 <= 1 - kappa_inf(20) / kappa_inf() <= kappa_truncation_bound(20)
    assert kappa_inf() == kappa_inf(200)


def test_theta_inf_unit_iid():
    assert theta_inf(0.0) == pytest.approx(1.0, rel=1e-14)


def test_theta_inf_converged():
    th = theta_inf(0.5, tol=1e-10)
    assert th == pytest.approx(theta(ChannelSpec.uniform(60, 0.5)), rel=1e-9)
    assert theta_inf(0.5) <= 1.0


def test_theta_inf_variance_descriptions():
    assert theta_inf(0.3, 2.0) == pytest.approx(theta_inf(0.3, lambda k: 2.0), rel=1e-14)
    assert theta_inf(0.3, [2.0]) == pytest.approx(theta_inf(0.3, 2.0), rel=1e-14)
    # theta is linear in a common variance scale
    assert theta_inf(0.3, 2.0) == pytest.approx(2.0 * theta_inf(0.3), rel=1e-12)
    with pytest.raises(ValueError):
        theta_inf(0.3, tol=0.0)


def test_ceilings():
    r = {s: ee_limit(s, 0.0, 1.0) for s in Scheme}
    assert r[Scheme.TYPE_I].ceiling == pytest.approx(1 / (4 * LN2), rel=1e-15)
    assert r[Scheme.TYPE_I].ceiling == pytest.approx(0.36067, abs=1e-5)
    assert r[Scheme.CC].ceiling == pytest.approx(0.59932, abs=1e-5)
    assert r[Scheme.IR].ceiling == r[Scheme.CC].ceiling
    assert r[Scheme.CC].ceiling == pytest.approx(r[Scheme.CC].kappa_inf * r[Scheme.TYPE_I].ceiling, rel=1e-15)


@pytest.mark.parametrize("t0", [0.0, -1.0])
def test_limit_domain(t0):
    with pytest.raises(ValueError):
        ee_limit(Scheme.CC, 0.2, t0)


def test_report_invariants():
    for rho in (0.0, 0.4, 0.9):
        for t0 in (1e-3, 0.5, 3.0):
            ti, cc, ir = (ee_limit(s, rho, t0) for s in Scheme)
            assert isinstance(ir, AsymptoticReport)
            assert cc.ee_limit == pytest.approx(cc.kappa_inf * ti.ee_limit, rel=1e-14)
            assert ir.ee_lower <= ir.ee_limit
            assert ir.ee_lower >= cc.ee_limit
            assert ti.ee_lower == ti.ee_limit


def test_small_threshold_approaches_ceiling():
    r = ee_limit(Scheme.TYPE_I, 0.0, 1e-9)
    assert r.ee_limit == pytest.approx(r.ceiling, rel=1e-8)


def test_finite_rounds_cross_check():
    sol = solve(Scheme.TYPE_I, ChannelSpec.uniform(25, 0.0), QosSpec(0.5, 0.01))
    assert sol.ee == pytest.approx(ee_limit(Scheme.TYPE_I, 0.0, 0.01).ee_limit, rel=0.02)


def test_finite_rounds_below_limit():
    rng = np.random.default_rng(0)
    for _ in range(150):
        rho, t0 = float(rng.uniform(0, 0.95)), float(10 ** rng.uniform(-3, 1))
        eps = float(10 ** rng.uniform(-5, 0))
        limits = {s: ee_limit(s, rho, t0).ee_limit for s in Scheme}
        for L in (5, 10, 20):
            for s in Scheme:
                assert solve(s, ChannelSpec.uniform(L, rho), QosSpec(eps, t0)).ee <= limits[s] + 1e-9


def test_ir_finite_sandwich():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        L = int(rng.integers(2, 21))
        spec = ChannelSpec.uniform(L, float(rng.uniform(0, 0.95)))
        qos = QosSpec(float(10 ** rng.uniform(-5, 0)), float(10 ** rng.uniform(-2, 1)))
        sol = solve(Scheme.IR, spec, qos)
        w = 1 / (1 - 2.0**-L)
        varpi = sol.gap ** (-(2.0 ** (1 - L))) * math.expm1(sol.rate * LN2) * sol.rate
        approx = psi(L) * theta(spec) * qos.t0 * LN2 ** (-(0.5 - 2.0**-L) * w) * varpi ** (-0.5 * w)
        assert kappa(L - 1) ** (0.5 * w) * approx * (1 - 1e-9) <= sol.ee <= kappa(L) ** w * approx * (1 + 1e-9)


def test_limits_decrease_in_threshold():
    t0s = np.geomspace(1e-3, 10, 25)
    for s in Scheme:
        for rho in (0.0, 0.5, 0.9):
            vals = [ee_limit(s, rho, float(t)) for t in t0s]
            assert all(b.ee_limit < a.ee_limit for a, b in zip(vals, vals[1:]))
            assert all(b.ee_lower < a.ee_lower for a, b in zip(vals, vals[1:]))
            assert all(v.ee_limit <= v.ceiling * v.theta_inf * (1 + 1e-12) for v in vals)
