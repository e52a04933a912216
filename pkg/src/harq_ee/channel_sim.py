"""Monte Carlo outage and energy-efficiency estimates over time-correlated Rayleigh fading.

Trials are split into fixed-size batches, and each batch draws from its own
Philox stream spawned from ``(seed, batch index)``. Failure counts are
integers summed over batches, so a report is bit-identical for any worker
count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .allocator import PowerLadder
from .corefns import ChannelSpec, Scheme

BATCH = 1 << 18
Z95 = 1.959963984540054


def _rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def _mixing(spec: ChannelSpec) -> tuple[np.ndarray, np.ndarray]:
    l = np.arange(spec.L)
    shared = spec.rho ** l  # rho^(l-1) for l = 1..L
    own = np.sqrt(np.clip(1.0 - shared**2, 0.0, None))
    sigma = np.sqrt(np.asarray(spec.sigma2))
    return sigma * own, sigma * shared


def _draw_batch(spec: ChannelSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    own, shared = _mixing(spec)
    h0 = _complex_normal(rng, (n, 1))
    hl = _complex_normal(rng, (n, spec.L))
    return own * hl + shared * h0


def _batches(n: int) -> list[int]:
    full, rest = divmod(n, BATCH)
    return [BATCH] * full + ([rest] if rest else [])


def draw_complex_channels(spec: ChannelSpec, seed: int, n: int) -> np.ndarray:
    """``n x L`` complex fading coefficients ``h_l``."""
    if n < 1:
        raise ValueError(f"number of draws must be positive, got {n}")
    return np.concatenate(
        [_draw_batch(spec, _rng(seed, i), m) for i, m in enumerate(_batches(int(n)))]
    )


def draw_channels(spec: ChannelSpec, seed: int, n: int) -> np.ndarray:
    """``n x L`` channel power gains ``|h_l|^2``."""
    h = draw_complex_channels(spec, seed, n)
    return h.real**2 + h.imag**2


@dataclass(frozen=True)
class MonteCarloReport:
    scheme: Scheme
    rate: float
    trials: int
    seed: int
    failures: tuple[int, ...]
    outage_estimates: tuple[float, ...]
    outage_halfwidth: tuple[float, ...]
    avg_power: float
    energy_efficiency: float
    goodput: float
    spectral_efficiency: float
    # per round: fewer than 10 observed failures, normal-approximation CI not trustworthy
    unreliable: tuple[bool, ...]

    @property
    def outage(self) -> float:
        return self.outage_estimates[-1]

    @property
    def halfwidth(self) -> float:
        return self.outage_halfwidth[-1]


def failure_counts(scheme: Scheme, gains: np.ndarray, powers, R: float) -> np.ndarray:
    """Number of trials still undecoded after each round ``l = 1..L``."""
    snr = gains * np.asarray(powers, dtype=float)
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.TYPE_I:
        fail = np.maximum.accumulate(snr, axis=1) <= math.expm1(R * math.log(2.0))
    elif scheme is Scheme.CC:
        fail = np.cumsum(snr, axis=1) <= math.expm1(R * math.log(2.0))
    else:
        fail = np.cumsum(np.log1p(snr), axis=1) <= R * math.log(2.0)
    return fail.sum(axis=0)


def _batch_counts(args) -> np.ndarray:
    scheme, spec, powers, R, seed, index, n = args
    h = _draw_batch(spec, _rng(seed, index), n)
    return failure_counts(scheme, h.real**2 + h.imag**2, powers, R)


def estimate_outage(
    scheme: Scheme,
    spec: ChannelSpec,
    ladder: PowerLadder,
    R: float,
    seed: int = 0,
    trials: int = 1_000_000,
    workers: int = 1,
) -> MonteCarloReport:
    """Empirical outage after every round plus the derived power, goodput and efficiencies."""
    scheme = Scheme.parse(scheme)
    ladder = PowerLadder(tuple(ladder)).check_for(spec)
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if not R > 0:
        raise ValueError(f"rate must be positive, got {R}")
    jobs = [(scheme, spec, ladder.powers, R, seed, i, m) for i, m in enumerate(_batches(int(trials)))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_batch_counts, jobs))
    else:
        parts = [_batch_counts(j) for j in jobs]
    fails = np.sum(parts, axis=0, dtype=np.int64)
    return report_from_counts(scheme, ladder, R, int(trials), int(seed), [int(f) for f in fails])


def report_from_counts(scheme, ladder: PowerLadder, R: float, trials: int, seed: int, fails) -> MonteCarloReport:
    p = [f / trials for f in fails]
    hw = [Z95 * math.sqrt(q * (1.0 - q) / trials) for q in p]
    prev = [1.0] + p[:-1]
    avg_power = math.fsum(a * b for a, b in zip(prev, ladder.powers))
    goodput = R * (1.0 - p[-1])
    ee = goodput / avg_power if avg_power > 0 else 0.0
    se = goodput / math.fsum(prev)
    return MonteCarloReport(
        scheme=Scheme.parse(scheme),
        rate=R,
        trials=trials,
        seed=seed,
        failures=tuple(fails),
        outage_estimates=tuple(p),
        outage_halfwidth=tuple(hw),
        avg_power=avg_power,
        energy_efficiency=ee,
        goodput=goodput,
        spectral_efficiency=se,
        unreliable=tuple(f < 10 for f in fails),
    )


def estimate_ee(scheme, spec, ladder, R, seed=0, trials=1_000_000, workers=1) -> MonteCarloReport:
    """Same report as :func:`estimate_outage`; named for call sites that want the efficiency."""
    return estimate_outage(scheme, spec, ladder, R, seed=seed, trials=trials, workers=workers)
