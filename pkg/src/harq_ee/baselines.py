"""Reference designs: equal-power HARQ and exhaustive grid oracles for small ``L``.

The oracles never use the closed-form optimality results. They search log
grids, then repeatedly zoom around the incumbent, so a finer search can only
improve on a coarser one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .allocator import PowerLadder, allocate, log_min_avg_power
from .corefns import ChannelSpec, QosSpec, Scheme, log_phi_all
from .optimizer import MIN_T0, Solution, spectral_efficiency

MAX_ORACLE_ROUNDS = 3


@dataclass(frozen=True)
class BaselineSolution(Solution):
    method: str = "uniform"


def _check_oracle_dim(L: int):
    if L > MAX_ORACLE_ROUNDS:
        raise ValueError(f"grid oracles support L <= {MAX_ORACLE_ROUNDS}, got L={L}")


def _baseline(method, scheme, spec, qos, R, alpha, powers, avg_power) -> BaselineSolution:
    ladder = PowerLadder(tuple(powers))
    goodput = R * (1.0 - alpha)
    return BaselineSolution(
        scheme=Scheme.parse(scheme),
        spec=spec,
        qos=qos,
        ladder=ladder,
        rate=R,
        alpha=alpha,
        avg_power=avg_power,
        ee=goodput / avg_power,
        goodput=goodput,
        spectral_efficiency=spectral_efficiency(scheme, spec, ladder, R),
        feasible=True,
        gap=R - max(qos.t0, MIN_T0),
        method=method,
    )


# ----------------------------------------------------------------- uniform power

def _uniform_log_avg_power(log_phis, log_alpha):
    """log of ``P sum_l phi_{l-1} P^-(l-1)`` with ``P = (phi_L/alpha)^(1/L)``; vectorised in alpha."""
    L = len(log_phis) - 1
    log_P = (log_phis[L] - np.asarray(log_alpha)) / L
    terms = np.stack([log_phis[l - 1] - (l - 2) * log_P for l in range(1, L + 1)])
    top = terms.max(axis=0)
    return top + np.log(np.exp(terms - top).sum(axis=0))


class _UniformProblem:
    """EE of equal powers over ``x = log(R - t0)`` and ``y = log(alpha/alpha_max(R))``."""

    def __init__(self, scheme, spec, qos):
        self.scheme, self.spec, self.qos = scheme, spec, qos
        self.t0 = max(qos.t0, MIN_T0)

    def rate_and_cap(self, x):
        u = math.exp(x)
        R = self.t0 + u
        return R, min(self.qos.epsilon, u / R)

    def log_ee(self, x, y):
        R, amax = self.rate_and_cap(x)
        log_alpha = np.log(amax) + np.asarray(y)
        alpha = np.exp(log_alpha)
        log_phis = log_phi_all(self.scheme, self.spec, R)
        return math.log(R) + np.log1p(-alpha) - _uniform_log_avg_power(log_phis, log_alpha)


def uniform_power_solve(
    scheme: Scheme, spec: ChannelSpec, qos: QosSpec, resolution: int = 200, rounds: int = 3
) -> BaselineSolution:
    """Best equal-power design ``P_1 = ... = P_L`` over rate and target outage."""
    scheme = Scheme.parse(scheme)
    prob = _UniformProblem(scheme, spec, qos)
    t0 = prob.t0
    xs = np.linspace(math.log(1e-10 * t0), math.log(max(16.0, 4.0 * t0)), resolution)
    ys = np.linspace(math.log(1e-12), 0.0, resolution)
    best = (-math.inf, None, None)
    for x in xs:
        vals = prob.log_ee(x, ys)
        j = int(np.argmax(vals))
        if vals[j] > best[0]:
            best = (float(vals[j]), float(x), float(ys[j]))
    _, bx, by = best
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    for _ in range(rounds):
        rx = optimize.minimize_scalar(lambda x: -float(prob.log_ee(x, by)), bounds=(bx - dx, bx + dx),
                                      method="bounded", options={"xatol": 1e-10})
        if -rx.fun > float(prob.log_ee(bx, by)):
            bx = float(rx.x)
        ry = optimize.minimize_scalar(lambda y: -float(prob.log_ee(bx, y)), bounds=(by - dy, min(0.0, by + dy)),
                                      method="bounded", options={"xatol": 1e-10})
        if -ry.fun > float(prob.log_ee(bx, by)):
            by = float(ry.x)
        dx, dy = dx / 4.0, dy / 4.0
    # the bounded search never evaluates the alpha boundary itself
    if float(prob.log_ee(bx, 0.0)) > float(prob.log_ee(bx, by)):
        by = 0.0
    R, amax = prob.rate_and_cap(bx)
    alpha = amax * math.exp(by)
    log_phis = log_phi_all(scheme, spec, R)
    P = math.exp((log_phis[-1] - math.log(alpha)) / spec.L)
    avg = float(np.exp(_uniform_log_avg_power(log_phis, math.log(alpha))))
    return _baseline("uniform", scheme, spec, qos, R, alpha, [P] * spec.L, avg)


# ----------------------------------------------------------------- grid oracles

def _ladder_grid_avg_power(log_phis, log_alpha, log_free):
    """Average power for free powers ``P_1..P_{L-1}`` (rows of ``log_free``); ``P_L`` pinned by the outage."""
    L = len(log_phis) - 1
    n = log_free.shape[1]
    cum = np.zeros(n)  # log prod_{k<l} P_k
    total = np.zeros(n)
    for l in range(1, L):
        total += np.exp(log_phis[l - 1] - cum + log_free[l - 1])
        cum = cum + log_free[l - 1]
    log_PL = log_phis[L] - log_alpha - cum
    total += np.exp(log_phis[L - 1] - cum + log_PL)
    return total, log_PL


def grid_oracle_allocate(
    scheme: Scheme, spec: ChannelSpec, R: float, alpha: float, resolution: int = 101, rounds: int = 8
) -> BaselineSolution:
    """Minimum average power found by exhaustive search on a log grid of ladders.

    Each of ``P_1..P_{L-1}`` ranges over +/- 6 decades around the geometric-mean
    power; ``rounds`` zoom steps then re-grid +/- 2 cells around the incumbent.
    """
    scheme = Scheme.parse(scheme)
    L = spec.L
    _check_oracle_dim(L)
    if resolution < 50:
        raise ValueError(f"resolution must be at least 50 points per dimension, got {resolution}")
    log_phis = log_phi_all(scheme, spec, R)
    la = math.log(alpha)
    if L == 1:
        P1 = math.exp(log_phis[1] - la)
        return _baseline("grid", scheme, spec, QosSpec(1.0, R * (1 - alpha)), R, alpha, [P1], P1)
    centre = np.full(L - 1, (log_phis[L] - la) / L)
    half = np.full(L - 1, 6.0 * math.log(10.0))
    best_val, best_pt = math.inf, None
    for _ in range(rounds + 1):
        axes = [np.linspace(c - h, c + h, resolution) for c, h in zip(centre, half)]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")])
        if best_pt is not None:
            mesh = np.concatenate([best_pt[:, None], mesh], axis=1)
        vals, _ = _ladder_grid_avg_power(log_phis, la, mesh)
        j = int(np.argmin(vals))  # ties resolve to the lowest index, i.e. the incumbent
        if vals[j] < best_val:
            best_val, best_pt = float(vals[j]), mesh[:, j].copy()
        centre = best_pt
        half = half * 2.0 / (resolution - 1) * 2.0
    _, log_PL = _ladder_grid_avg_power(log_phis, la, best_pt[:, None])
    powers = [math.exp(v) for v in best_pt] + [math.exp(float(log_PL[0]))]
    return _baseline("grid", scheme, spec, QosSpec(1.0, R * (1 - alpha)), R, alpha, powers, best_val)


def grid_oracle_solve(
    scheme: Scheme, spec: ChannelSpec, qos: QosSpec, resolution: int = 120, rounds: int = 6
) -> BaselineSolution:
    """Exhaustive search over ``(R, alpha)`` with the closed-form ladder at every point.

    Coordinates are ``log(R - t0)`` and ``log(alpha / min(epsilon, 1 - t0/R))``,
    so every grid point satisfies both QoS constraints.
    """
    scheme = Scheme.parse(scheme)
    _check_oracle_dim(spec.L)
    t0 = max(qos.t0, MIN_T0)

    def log_ee(x, ys):
        u = math.exp(x)
        R = t0 + u
        log_alpha = math.log(min(qos.epsilon, u / R)) + ys
        log_phis = log_phi_all(scheme, spec, R)
        lp = np.array([log_min_avg_power(log_phis, a) for a in log_alpha])
        return math.log(R) + np.log1p(-np.exp(log_alpha)) - lp

    x_lo, x_hi = math.log(1e-12 * t0), math.log(max(16.0, 4.0 * t0))
    y_lo, y_hi = math.log(1e-12), 0.0
    best_val, bx, by = -math.inf, None, None
    for _ in range(rounds + 1):
        xs = np.linspace(x_lo, x_hi, resolution)
        ys = np.linspace(y_lo, y_hi, resolution)
        for x in xs:
            vals = log_ee(x, ys)
            j = int(np.argmax(vals))
            # strict improvement only: the incumbent survives ties
            if vals[j] > best_val:
                best_val, bx, by = float(vals[j]), float(x), float(ys[j])
        dx, dy = 2.0 * (xs[1] - xs[0]), 2.0 * (ys[1] - ys[0])
        x_lo, x_hi = bx - dx, bx + dx
        y_lo, y_hi = by - dy, min(0.0, by + dy)
    u = math.exp(bx)
    R = t0 + u
    alpha = min(qos.epsilon, u / R) * math.exp(by)
    res = allocate(scheme, spec, R, alpha)
    return _baseline("grid", scheme, spec, qos, R, alpha, res.ladder.powers, res.avg_power)
