"""Special functions and scheme coefficients for the asymptotic HARQ outage model.

Every quantity that spans many decades (outage coefficients, power ladders,
products with exponents ``2**-k``) has a ``log_`` variant; the plain variants
are thin ``exp`` wrappers kept for readability in tests and callers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

LN2 = math.log(2.0)

# cap on the number of rounds; keeps 2**L representable as a float
MAX_ROUNDS = 1000


class Scheme(enum.IntEnum):
    """HARQ combining discipline. The integer order is used for reporting only."""

    TYPE_I = 0
    CC = 1
    IR = 2

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        if isinstance(value, Scheme):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        try:
            return _SCHEME_NAMES[key]
        except KeyError:
            raise ValueError(f"unknown HARQ scheme {value!r}; expected typei, cc or ir") from None

    @property
    def label(self) -> str:
        return {Scheme.TYPE_I: "typei", Scheme.CC: "cc", Scheme.IR: "ir"}[self]


_SCHEME_NAMES = {
    "typei": Scheme.TYPE_I,
    "type1": Scheme.TYPE_I,
    "i": Scheme.TYPE_I,
    "cc": Scheme.CC,
    "chase": Scheme.CC,
    "ir": Scheme.IR,
    "incremental": Scheme.IR,
}


@dataclass(frozen=True)
class ChannelSpec:
    """Fading statistics: ``L`` rounds, time correlation ``rho``, per-round variances.

    ``allow_static`` admits ``rho == 1`` (quasi-static fading). Only the
    Monte Carlo simulator accepts such a spec; the closed forms reject it.
    """

    L: int
    rho: float
    sigma2: tuple[float, ...]
    allow_static: bool = False

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        if self.L > MAX_ROUNDS:
            raise ValueError(f"L must not exceed {MAX_ROUNDS}, got {self.L}")
        object.__setattr__(self, "L", int(self.L))
        rho_max_ok = self.rho <= 1.0 if self.allow_static else self.rho < 1.0
        if not (0.0 <= self.rho and rho_max_ok):
            raise ValueError(f"rho must lie in [0, 1), got {self.rho!r}")
        sigma2 = tuple(float(s) for s in self.sigma2)
        if len(sigma2) != self.L:
            raise ValueError(f"sigma2 has {len(sigma2)} entries, expected L={self.L}")
        if not all(s > 0.0 and math.isfinite(s) for s in sigma2):
            raise ValueError("every sigma2 entry must be a positive finite number")
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "rho", float(self.rho))

    @classmethod
    def uniform(cls, L: int, rho: float, sigma2: float = 1.0, **kw) -> "ChannelSpec":
        return cls(L, rho, (float(sigma2),) * int(L), **kw)

    def truncated(self, L: int) -> "ChannelSpec":
        """The same channel restricted to its first ``L`` rounds."""
        return ChannelSpec(L, self.rho, self.sigma2[:L], self.allow_static)

    @property
    def is_static(self) -> bool:
        return self.rho >= 1.0


@dataclass(frozen=True)
class QosSpec:
    """Outage tolerance ``epsilon`` and minimum goodput ``t0`` (bits/s/Hz)."""

    epsilon: float
    t0: float

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        if not (self.t0 > 0.0 and math.isfinite(self.t0)):
            raise ValueError(f"t0 must be a positive finite number, got {self.t0!r}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "t0", float(self.t0))


def _check_rounds(L, *, allow_zero=True) -> int:
    if isinstance(L, bool) or int(L) != L:
        raise ValueError(f"number of rounds must be an integer, got {L!r}")
    L = int(L)
    if L < (0 if allow_zero else 1):
        raise ValueError(f"number of rounds out of range: {L}")
    if L > MAX_ROUNDS:
        raise ValueError(f"number of rounds must not exceed {MAX_ROUNDS}, got {L}")
    return L


def _series_exponent(L: int, x: float) -> float:
    """log of sum_{n>=0} L/(L+n) x^n/n!  (all terms positive)."""
    # work relative to the largest term to keep the partial sums O(1)
    log_terms = []
    log_t = 0.0  # log(x^n/n!) at n = 0
    n = 0
    log_x = math.log(x)
    best = -math.inf
    while True:
        lt = log_t + math.log(L / (L + n))
        log_terms.append(lt)
        best = max(best, lt)
        n += 1
        log_t += log_x - math.log(n)
        # terms decay once n > x; stop when negligible against the running max
        if n > x and log_t + math.log(L / (L + n)) < best - 40.0:
            break
    return best + math.log(math.fsum(math.exp(t - best) for t in log_terms))


def log_g(L: int, R: float) -> float:
    """Natural log of the incremental-redundancy outage coefficient ``g_L(R)``.

    Uses ``g_L(R) = x^L/L! * sum_n L/(L+n) x^n/n!`` with ``x = R ln 2``, a
    positive-term series equal to the inverse-Laplace integral. Returns
    ``-inf`` where ``g`` vanishes (``R == 0`` with ``L >= 0``).
    """
    L = _check_rounds(L)
    if R < 0 or not math.isfinite(R):
        raise ValueError(f"R must be a finite non-negative number, got {R!r}")
    if L == 0:
        return 0.0 if R > 0 else -math.inf
    if R == 0:
        return -math.inf
    x = R * LN2
    return L * math.log(x) - math.lgamma(L + 1) + _series_exponent(L, x)


def g(L: int, R: float) -> float:
    """``g_L(R)``; equals ``2**R - 1`` at ``L = 1`` and ``0`` at ``(0, 0)``."""
    return math.exp(log_g(L, R))


def g_prime(L: int, R: float) -> float:
    """Derivative of ``g_L`` in ``R``: ``ln2 (R ln2)^(L-1)/(L-1)! 2^R``."""
    L = _check_rounds(L, allow_zero=False)
    if not (R > 0 and math.isfinite(R)):
        raise ValueError(f"R must be positive, got {R!r}")
    x = R * LN2
    return math.exp(math.log(LN2) + (L - 1) * math.log(x) - math.lgamma(L) + x)


def log_ell(L: int, rho: float) -> float:
    """log of the time-correlation factor ``prod_{k=2}^L (1 - rho^(2(k-1)))``."""
    L = _check_rounds(L)
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must lie in [0, 1), got {rho!r}")
    if rho == 0.0:
        return 0.0
    two_log_rho = 2.0 * math.log(rho)
    return math.fsum(math.log1p(-math.exp(two_log_rho * (k - 1))) for k in range(2, L + 1))


def ell(L: int, rho: float) -> float:
    return math.exp(log_ell(L, rho))


def log_varsigma(spec: ChannelSpec, l: int | None = None) -> float:
    """log of ``1/(ell(l, rho) * prod_{k<=l} sigma2_k)``; ``l`` defaults to ``spec.L``."""
    l = spec.L if l is None else _check_rounds(l)
    if l > spec.L:
        raise ValueError(f"round index {l} exceeds L={spec.L}")
    return -log_ell(l, spec.rho) - math.fsum(math.log(s) for s in spec.sigma2[:l])


def varsigma(spec: ChannelSpec, l: int | None = None) -> float:
    return math.exp(log_varsigma(spec, l))


def log_expm1_rate(R: float) -> float:
    """log(2**R - 1), accurate for tiny ``R``."""
    return math.log(math.expm1(R * LN2))


def log_phi(scheme: Scheme, spec: ChannelSpec, l: int, R: float) -> float:
    """log of the asymptotic outage coefficient after ``l`` rounds."""
    scheme = Scheme.parse(scheme)
    l = _check_rounds(l)
    if l > spec.L:
        raise ValueError(f"round index {l} out of range 0..{spec.L}")
    if not (R > 0 and math.isfinite(R)):
        raise ValueError(f"R must be positive, got {R!r}")
    if l == 0:
        return 0.0
    base = log_varsigma(spec, l)
    if scheme is Scheme.TYPE_I:
        return base + l * log_expm1_rate(R)
    if scheme is Scheme.CC:
        return base + l * log_expm1_rate(R) - math.lgamma(l + 1)
    return base + log_g(l, R)


def phi(scheme: Scheme, spec: ChannelSpec, l: int, R: float) -> float:
    return math.exp(log_phi(scheme, spec, l, R))


def log_phi_all(scheme: Scheme, spec: ChannelSpec, R: float) -> list[float]:
    """``[log phi_0, ..., log phi_L]`` for one rate."""
    return [log_phi(scheme, spec, l, R) for l in range(spec.L + 1)]


def log_theta(spec: ChannelSpec) -> float:
    s = math.fsum(
        2.0 ** -k * (log_ell(k, spec.rho) + math.log(spec.sigma2[k - 1]) - log_ell(k - 1, spec.rho))
        for k in range(1, spec.L + 1)
    )
    return s / -math.expm1(-spec.L * LN2)


def theta(spec: ChannelSpec) -> float:
    """Channel-dependent constant of the optimal energy efficiency; ``1`` for i.i.d. unit fading."""
    return math.exp(log_theta(spec))


def log_kappa(L: int) -> float:
    L = _check_rounds(L, allow_zero=False)
    return math.fsum(2.0 ** -k * math.log(k) for k in range(2, L + 1))


def kappa(L: int) -> float:
    """``prod_{k=1}^L k^(2^-k)``; increases towards roughly 1.6617."""
    return math.exp(log_kappa(L))


def outage_exponent(L: int) -> float:
    """``c = 1/(2^L - 1)``, the exponent of the target outage in ``f_alpha``."""
    L = _check_rounds(L, allow_zero=False)
    return 1.0 / (2**L - 1)


def inv_one_minus_2pow(L: int) -> float:
    """``1/(1 - 2^-L)``."""
    return 1.0 / -math.expm1(-L * LN2)


def f_alpha(alpha: float, L: int) -> float:
    """``(1 - alpha) alpha^c``; maximal at ``alpha = 2^-L``."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return (1.0 - alpha) * math.exp(outage_exponent(L) * math.log(alpha))


def log_psi(L: int) -> float:
    L = _check_rounds(L, allow_zero=False)
    c = outage_exponent(L)
    # L/(1 - 2^-L) - 2 - log2(2^L - 1)  ==  L*c - 2 - log2(1 - 2^-L)
    return (L * c - 2.0) * LN2 - math.log1p(-(2.0 ** -L))


def psi(L: int) -> float:
    """``2^(L/(1-2^-L) - 2)/(2^L - 1)``; tends to 1/4."""
    return math.exp(log_psi(L))


def as_sigma2(value: float | Sequence[float], L: int) -> tuple[float, ...]:
    """Broadcast a scalar variance to ``L`` rounds, or validate a list."""
    if isinstance(value, (int, float)):
        return (float(value),) * L
    vals = tuple(float(v) for v in value)
    if len(vals) == 1:
        return vals * L
    return vals
