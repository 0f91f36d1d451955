"""BPSK mapping, SNR bookkeeping, and deterministic stream-indexed sampling.

Convention (fixed for reproducibility): bit 0 maps to +sqrt(Es), bit 1 to
-sqrt(Es). Es is 1.0 throughout the package; SNR is varied through the
noise density N0. The SNR measure beta = 2 Es / N0 relates to Eb/N0 via
beta = 2 R (Eb/N0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SnrSpec:
    """One operating point; beta and n0 are derived from Eb/N0 and the rate."""

    eb_n0_db: float
    rate: float
    es: float = 1.0
    beta: float = field(init=False)
    n0: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")
        if self.es <= 0.0:
            raise ValueError("es must be positive")
        beta = 2.0 * self.rate * 10.0 ** (self.eb_n0_db / 10.0)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "n0", 2.0 * self.es / beta)


def snr_from_eb_n0(eb_n0_db: float, rate: float, es: float = 1.0) -> SnrSpec:
    return SnrSpec(eb_n0_db=eb_n0_db, rate=rate, es=es)


@dataclass(frozen=True)
class RngStream:
    """Counter-based substream keyed by (master_seed, stream_index).

    Distinct stream indices give statistically independent streams, so
    sample i is reproducible regardless of how work is split across
    workers.
    """

    master_seed: int
    stream_index: int

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & (2**64 - 1), self.stream_index & (2**64 - 1)],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))


def bpsk_map(bits, es: float = 1.0) -> np.ndarray:
    """Map bits to antipodal symbols: 0 -> +sqrt(es), 1 -> -sqrt(es)."""
    if es <= 0.0:
        raise ValueError("es must be positive")
    b = np.asarray(bits, dtype=np.float64)
    return np.sqrt(es) * (1.0 - 2.0 * b)


def awgn_sample(n: int, n0: float, rng: RngStream | np.random.Generator) -> np.ndarray:
    """i.i.d. Gaussian noise, zero mean, variance n0/2 per sample."""
    if n0 <= 0.0:
        raise ValueError("n0 must be positive")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return gen.normal(0.0, np.sqrt(n0 / 2.0), size=n)


def rayleigh_sample(n: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Unit-power Rayleigh gains h > 0 with pdf 2 h exp(-h^2), via sqrt(-ln U)."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    u = gen.random(n)
    # U in [0, 1): use 1-U in (0, 1] so the log argument is never zero.
    return np.sqrt(-np.log1p(-u))
