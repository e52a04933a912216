"""Joint target-outage and rate selection maximising energy efficiency.

Rates are handled through the gap ``u = R - t0`` wherever the optimum hugs
the goodput threshold: for large ``L`` the optimal gap is of order
``t0 / 2**L`` and would be lost to rounding if ``R`` itself were bisected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import optimize

from .allocator import (
    PowerLadder,
    allocate,
    asymptotic_outages,
    log_ladder,
    log_min_avg_power,
)
from .corefns import (
    LN2,
    ChannelSpec,
    QosSpec,
    Scheme,
    inv_one_minus_2pow,
    log_g,
    log_phi_all,
    outage_exponent,
)

# goodput thresholds below this are treated as this value
MIN_T0 = 1e-9


class InfeasibleError(ValueError):
    """The QoS constraints admit no operating point."""


@dataclass(frozen=True)
class RateBracket:
    """Feasible rate interval ``(t0, t0/(1 - delta)]`` expressed through the gap."""

    L: int
    t0: float
    epsilon: float
    delta: float = field(init=False)
    c: float = field(init=False)
    gap_cap: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", min(self.epsilon, 2.0 ** -self.L))
        object.__setattr__(self, "c", outage_exponent(self.L))
        object.__setattr__(self, "gap_cap", self.t0 * self.delta / (1.0 - self.delta))

    @classmethod
    def of(cls, L: int, qos: QosSpec) -> "RateBracket":
        return cls(L, max(qos.t0, MIN_T0), qos.epsilon)

    @property
    def cap(self) -> float:
        return self.t0 / (1.0 - self.delta)


@dataclass(frozen=True)
class Solution:
    scheme: Scheme
    spec: ChannelSpec
    qos: QosSpec
    ladder: PowerLadder
    rate: float
    alpha: float
    avg_power: float
    ee: float
    goodput: float
    spectral_efficiency: float
    feasible: bool = True
    # R* - t0, kept separately because it may be below the resolution of ``rate``
    gap: float = 0.0

    def violations(self) -> list[str]:
        """Names of violated solution invariants; empty when consistent."""
        bad = []
        if not self.feasible:
            return bad
        t0 = max(self.qos.t0, MIN_T0)
        if self.goodput < t0 * (1 - 1e-12) - 1e-12:
            bad.append("goodput below threshold t0")
        if self.alpha > self.qos.epsilon * (1 + 1e-12):
            bad.append("target outage exceeds epsilon")
        if self.alpha > 2.0 ** -self.spec.L * (1 + 1e-12) + 1e-12:
            bad.append("target outage exceeds 2^-L")
        cap = RateBracket.of(self.spec.L, self.qos).cap
        if not (t0 <= self.rate <= cap * (1 + 1e-12) + 1e-12):
            bad.append("rate outside (t0, t0/(1-delta)]")
        if abs(self.ee - self.goodput / self.avg_power) > 1e-12 * self.ee:
            bad.append("ee != goodput/avg_power")
        if not all(p > 0 for p in self.ladder):
            bad.append("non-positive transmit power")
        return bad


def optimal_alpha(L: int, qos: QosSpec, R: float) -> float:
    """``min(epsilon, 1 - t0/R, 2^-L)``; raises :class:`InfeasibleError` when ``R <= t0``."""
    if R <= qos.t0:
        raise InfeasibleError(f"rate {R} does not exceed the goodput threshold t0={qos.t0}")
    return min(qos.epsilon, 1.0 - qos.t0 / R, 2.0 ** -L)


def _alpha_from_gap(br: RateBracket, u: float) -> float:
    return min(br.delta, u / (br.t0 + u))


# derivative-zero functions of the rate-selection problems, divided by 2^R > 0

def stationarity_typei(br: RateBracket, u: float) -> float:
    """Sign-equivalent to ``ln2 R (R-t0) 2^R - c t0 (2^R - 1)`` at ``R = t0 + u``."""
    R = br.t0 + u
    return LN2 * R * u + br.c * br.t0 * math.expm1(-R * LN2)


def stationarity_ir(br: RateBracket, u: float) -> float:
    """Sign-equivalent to ``(R-t0)(2^R ln2 R + 2^R - 1) - 2^(1-L)(2^R-1) R``."""
    R = br.t0 + u
    one_minus = -math.expm1(-R * LN2)  # 1 - 2^-R
    return u * (LN2 * R + one_minus) - 2.0 ** (1 - br.L) * one_minus * R


def _capped_root(fn, br: RateBracket) -> float:
    """Gap of ``min(cap, zero of fn)`` for an increasing ``fn`` negative at ``u = 0``."""
    if br.gap_cap <= 0.0:
        return 0.0
    at_cap = fn(br, br.gap_cap)
    if at_cap < 0.0 or abs(at_cap) < 1e-12 * max(1.0, br.t0) * br.gap_cap:
        return br.gap_cap
    return optimize.bisect(
        lambda u: fn(br, u), 0.0, br.gap_cap, xtol=br.gap_cap * 1e-16, rtol=1e-15, maxiter=2000
    )


def optimal_gap_typei_cc(L: int, qos: QosSpec) -> float:
    return _capped_root(stationarity_typei, RateBracket.of(L, qos))


def optimal_gap_ir(L: int, qos: QosSpec) -> float:
    return _capped_root(stationarity_ir, RateBracket.of(L, qos))


def optimal_rate_typeI_cc(L: int, qos: QosSpec) -> float:
    """Energy-efficient rate shared by Type I HARQ and chase combining."""
    return max(qos.t0, MIN_T0) + optimal_gap_typei_cc(L, qos)


def optimal_rate_ir(L: int, qos: QosSpec) -> float:
    """Rate minimising the incremental-redundancy surrogate objective."""
    return max(qos.t0, MIN_T0) + optimal_gap_ir(L, qos)


def log_rate_objective(scheme: Scheme, spec: ChannelSpec, qos: QosSpec, u: float) -> float:
    """log of the rate-dependent denominator of the efficiency inside the bracket.

    Type I/CC: ``(2^R - 1)(1 - t0/R)^-c``; IR: the product form with the
    exact ``g`` ratios. Constant factors that do not depend on ``R`` are dropped
    for Type I/CC, so only IR values are comparable across schemes.
    """
    br = RateBracket.of(spec.L, qos)
    R = br.t0 + u
    lead = -br.c * math.log(u / R)
    if Scheme.parse(scheme) is Scheme.IR:
        w = inv_one_minus_2pow(spec.L)
        prod = math.fsum(
            2.0 ** -k * (log_g(k, R) - log_g(k - 1, R)) for k in range(1, spec.L + 1)
        )
        return lead + w * prod
    return lead + math.log(math.expm1(R * LN2))


def lambda_objective(spec: ChannelSpec, qos: QosSpec, R: float) -> float:
    """IR rate objective ``(1 - t0/R)^-c (prod (g_k/g_{k-1})^(2^-k))^(1/(1-2^-L))``."""
    t0 = max(qos.t0, MIN_T0)
    return math.exp(log_rate_objective(Scheme.IR, spec, qos, R - t0))


def lambda_direct_gap_ir(spec: ChannelSpec, qos: QosSpec) -> float:
    br = RateBracket.of(spec.L, qos)
    if br.gap_cap <= 0.0:
        return 0.0

    def obj(s):
        return log_rate_objective(Scheme.IR, spec, qos, br.gap_cap * s)

    res = optimize.minimize_scalar(obj, bounds=(1e-12, 1.0), method="bounded", options={"xatol": 1e-12})
    # the bounded search never probes the endpoint or the surrogate rate; keep whichever is best
    cands = [res.x * br.gap_cap, br.gap_cap, optimal_gap_ir(spec.L, qos)]
    vals = [log_rate_objective(Scheme.IR, spec, qos, u) for u in cands]
    return cands[min(range(len(cands)), key=vals.__getitem__)]


def lambda_direct_rate_ir(spec: ChannelSpec, qos: QosSpec) -> float:
    """IR rate found by directly minimising the exact rate objective over the bracket."""
    return max(qos.t0, MIN_T0) + lambda_direct_gap_ir(spec, qos)


def spectral_efficiency(scheme: Scheme, spec: ChannelSpec, ladder: PowerLadder, R: float) -> float:
    """Delivered bits per channel use, ``R (1 - p_L) / sum_{l<L} p_l`` with asymptotic outages."""
    p = asymptotic_outages(scheme, spec, ladder, R)
    return R * (1.0 - p[-1]) / math.fsum(p[:-1])


def solution_at(scheme: Scheme, spec: ChannelSpec, qos: QosSpec, gap: float) -> Solution:
    """Assemble the full operating point for a rate ``t0 + gap`` with optimal outage and powers."""
    scheme = Scheme.parse(scheme)
    br = RateBracket.of(spec.L, qos)
    if not gap > 0.0:
        raise InfeasibleError("rate must exceed the goodput threshold")
    R = br.t0 + gap
    alpha = _alpha_from_gap(br, gap)
    log_phis = log_phi_all(scheme, spec, R)
    la = math.log(alpha)
    ladder = PowerLadder(tuple(math.exp(v) for v in log_ladder(log_phis, la)))
    avg_power = math.exp(log_min_avg_power(log_phis, la))
    # R (1 - alpha) computed without cancellation; equals t0 inside the bracket
    goodput = br.t0 if alpha < br.delta else R * (1.0 - alpha)
    return Solution(
        scheme=scheme,
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
        gap=gap,
    )


def solve(scheme: Scheme, spec: ChannelSpec, qos: QosSpec, *, ir_rate: str = "surrogate") -> Solution:
    """Energy-efficiency-optimal rate, target outage and power ladder.

    ``ir_rate`` selects the rate rule for incremental redundancy: the
    closed-form ``"surrogate"`` root or the ``"direct"`` numerical minimiser.
    """
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.IR:
        if ir_rate == "surrogate":
            gap = optimal_gap_ir(spec.L, qos)
        elif ir_rate == "direct":
            gap = lambda_direct_gap_ir(spec, qos)
        else:
            raise ValueError(f"unknown IR rate rule {ir_rate!r}")
    else:
        gap = optimal_gap_typei_cc(spec.L, qos)
    if not gap > 0.0:
        return Solution(scheme, spec, qos, PowerLadder((0.0,) * spec.L), max(qos.t0, MIN_T0),
                        0.0, 0.0, 0.0, 0.0, 0.0, feasible=False, gap=0.0)
    return solution_at(scheme, spec, qos, gap)


def ee_at_rate(scheme: Scheme, spec: ChannelSpec, qos: QosSpec, R: float) -> float:
    """Optimal efficiency at a fixed rate ``R > t0`` (optimal outage and powers)."""
    alpha = optimal_alpha(spec.L, qos, R)
    res = allocate(scheme, spec, R, alpha)
    return R * (1.0 - alpha) / res.avg_power
