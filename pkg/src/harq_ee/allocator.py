"""Closed-form minimum-average-power ladder at a fixed rate and target outage."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corefns import (
    LN2,
    ChannelSpec,
    Scheme,
    inv_one_minus_2pow,
    log_phi_all,
    outage_exponent,
)


@dataclass(frozen=True)
class PowerLadder:
    """Per-round transmit powers ``P_1..P_L`` (linear, noise-normalised SNR)."""

    powers: tuple[float, ...]

    def __post_init__(self):
        powers = tuple(float(p) for p in self.powers)
        if not powers:
            raise ValueError("a power ladder needs at least one round")
        if not all(p >= 0.0 and not math.isnan(p) for p in powers):
            raise ValueError(f"powers must be non-negative, got {powers}")
        object.__setattr__(self, "powers", powers)

    def __len__(self):
        return len(self.powers)

    def __iter__(self):
        return iter(self.powers)

    def __getitem__(self, i):
        return self.powers[i]

    def check_for(self, spec: ChannelSpec) -> "PowerLadder":
        if len(self.powers) != spec.L:
            raise ValueError(f"ladder has {len(self.powers)} powers but the channel has L={spec.L}")
        return self

    @classmethod
    def uniform(cls, P: float, L: int) -> "PowerLadder":
        return cls((float(P),) * L)


@dataclass(frozen=True)
class AllocationResult:
    ladder: PowerLadder
    avg_power: float
    alpha: float


def _check_rate_alpha(R, alpha):
    if not (R > 0 and math.isfinite(R)):
        raise ValueError(f"rate must be positive, got {R!r}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"target outage must lie in (0, 1), got {alpha!r}")


def log_ladder(log_phis: Sequence[float], log_alpha: float) -> list[float]:
    """Log-domain optimal powers given ``[log phi_0..log phi_L]`` and ``log alpha``."""
    L = len(log_phis) - 1
    # step_k = log(2 phi_{k-1}/phi_{k-2}), k = 2..L
    step = {k: LN2 + log_phis[k - 1] - log_phis[k - 2] for k in range(2, L + 1)}
    inner = (
        log_phis[L]
        + math.fsum(2.0 ** (1 - k) * step[k] for k in range(2, L + 1))
        - (L - 1) * LN2
        - log_alpha
        - log_phis[L - 1]
    )
    log_PL = 0.5 * inv_one_minus_2pow(L) * inner
    out = []
    for l in range(1, L):
        out.append(
            math.fsum(2.0 ** (l - k) * step[k] for k in range(l + 1, L + 1)) + 2.0 ** (l - L) * log_PL
        )
    out.append(log_PL)
    return out


def log_min_avg_power(log_phis: Sequence[float], log_alpha: float) -> float:
    """log of the minimal average power, closed form in ``alpha`` and the phi ratios."""
    L = len(log_phis) - 1
    w = inv_one_minus_2pow(L)
    c = outage_exponent(L)
    ratio_sum = math.fsum(2.0 ** -k * (log_phis[k] - log_phis[k - 1]) for k in range(1, L + 1))
    log_2L_minus_1 = L * LN2 + math.log1p(-(2.0 ** -L))
    return log_2L_minus_1 - c * log_alpha - (L * w - 2.0) * LN2 + w * ratio_sum


def allocate(scheme: Scheme, spec: ChannelSpec, R: float, alpha: float) -> AllocationResult:
    """Optimal power ladder meeting ``phi_L / prod P = alpha`` at rate ``R``.

    >>> res = allocate(Scheme.TYPE_I, ChannelSpec.uniform(1, 0.0), 1.0, 0.1)
    >>> round(res.ladder[0], 9), round(res.avg_power, 9)
    (10.0, 10.0)
    """
    _check_rate_alpha(R, alpha)
    log_phis = log_phi_all(scheme, spec, R)
    la = math.log(alpha)
    ladder = PowerLadder(tuple(math.exp(v) for v in log_ladder(log_phis, la)))
    return AllocationResult(ladder, math.exp(log_min_avg_power(log_phis, la)), float(alpha))


def asymptotic_outages(scheme: Scheme, spec: ChannelSpec, ladder: PowerLadder, R: float) -> list[float]:
    """``[p_out,0, ..., p_out,L]`` from the high-SNR outage model (``p_out,0 = 1``)."""
    ladder.check_for(spec)
    if not all(p > 0 for p in ladder):
        raise ValueError("asymptotic outage needs strictly positive powers")
    log_phis = log_phi_all(scheme, spec, R)
    out = [1.0]
    log_prod = 0.0
    for l in range(1, spec.L + 1):
        log_prod += math.log(ladder[l - 1])
        out.append(math.exp(log_phis[l] - log_prod))
    return out


def avg_power_of_ladder(scheme: Scheme, spec: ChannelSpec, ladder: PowerLadder, R: float) -> float:
    """Average power ``sum_l p_out,l-1 P_l`` with asymptotic outages."""
    p = asymptotic_outages(scheme, spec, ladder, R)
    return math.fsum(p[l - 1] * ladder[l - 1] for l in range(1, spec.L + 1))
