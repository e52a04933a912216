"""Large-``L`` limits of the optimal energy efficiency and their low-goodput ceilings."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .corefns import LN2, ChannelSpec, Scheme, kappa, theta

# 2^-64 ln 66 is below double resolution of kappa, so this is the limit itself
KAPPA_TRUNCATION = 64
THETA_MIN_ROUNDS = 20
THETA_MAX_ROUNDS = 400


@dataclass(frozen=True)
class AsymptoticReport:
    scheme: Scheme
    rho: float
    t0: float
    theta_inf: float
    kappa_inf: float
    ee_limit: float  # exact for Type I / CC, upper bound for IR
    ee_lower: float  # IR only; equals ee_limit otherwise
    ceiling: float  # t0 -> 0 value for unit-variance fading


def kappa_inf(L: int = KAPPA_TRUNCATION) -> float:
    """``kappa_L`` truncated at ``L``; relative error at most ``1 - (L+2)^(-2^-L)``.

    ``kappa_inf(20)`` is the customary 1.6617 approximation (error below 3e-6).
    The default truncation is converged to double precision, which keeps the
    limits valid upper bounds for finite-``L`` efficiencies at ``L = 20``.
    """
    return kappa(L)


def kappa_truncation_bound(L: int) -> float:
    return -math.expm1(-(2.0 ** -L) * math.log(L + 2))


def _variances(sigma2_gen, L) -> tuple[float, ...]:
    if sigma2_gen is None:
        return (1.0,) * L
    if callable(sigma2_gen):
        return tuple(float(sigma2_gen(k)) for k in range(1, L + 1))
    if isinstance(sigma2_gen, (int, float)):
        return (float(sigma2_gen),) * L
    seq = tuple(float(s) for s in sigma2_gen)
    # a finite list is extended with its last entry
    return (seq + (seq[-1],) * L)[:L]


def theta_inf(
    rho: float,
    sigma2_gen: Callable[[int], float] | Sequence[float] | float | None = None,
    tol: float = 1e-8,
    min_rounds: int = THETA_MIN_ROUNDS,
) -> float:
    """``theta_L`` at the first ``L >= min_rounds`` whose relative change drops below ``tol``.

    ``sigma2_gen`` gives the variance of round ``k`` (1-based): a callable,
    a constant, a list (extended with its last entry) or ``None`` for unit gains.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    prev = theta(ChannelSpec(min_rounds - 1, rho, _variances(sigma2_gen, min_rounds - 1)))
    for L in range(min_rounds, THETA_MAX_ROUNDS + 1):
        cur = theta(ChannelSpec(L, rho, _variances(sigma2_gen, L)))
        if abs(cur - prev) < tol * cur:
            return cur
        prev = cur
    return cur


def typei_limit(theta_value: float, t0: float) -> float:
    return theta_value * t0 / (4.0 * math.expm1(t0 * LN2))


def ir_bounds(theta_value: float, kappa_value: float, t0: float) -> tuple[float, float]:
    """``(lower, upper)`` bounds on the large-``L`` IR efficiency."""
    root = math.sqrt(t0 / (LN2 * math.expm1(t0 * LN2)))
    upper = kappa_value * theta_value / 4.0 * root
    lower = max(math.sqrt(kappa_value) * theta_value / 4.0 * root, kappa_value * typei_limit(theta_value, t0))
    return lower, upper


def ee_limit(scheme: Scheme, rho: float, t0: float, sigma2_gen=None) -> AsymptoticReport:
    """Large-``L`` optimal efficiency for ``scheme`` at goodput threshold ``t0``."""
    scheme = Scheme.parse(scheme)
    if not t0 > 0:
        raise ValueError(f"t0 must be positive, got {t0!r}")
    th = theta_inf(rho, sigma2_gen)
    ka = kappa_inf()
    if scheme is Scheme.TYPE_I:
        lim = lower = typei_limit(th, t0)
        ceiling = 1.0 / (4.0 * LN2)
    elif scheme is Scheme.CC:
        lim = lower = ka * typei_limit(th, t0)
        ceiling = ka / (4.0 * LN2)
    else:
        lower, lim = ir_bounds(th, ka, t0)
        ceiling = ka / (4.0 * LN2)
    return AsymptoticReport(scheme, float(rho), float(t0), th, ka, lim, lower, ceiling)
