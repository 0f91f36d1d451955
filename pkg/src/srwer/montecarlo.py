"""Direct channel simulation: transmit, add noise, decode, count word errors.

The transmitted word is the all-zero codeword (every codeword of a linear
code sees the same decision region); a different codeword can be supplied to
spot-check that assumption for the iterative decoders. Word i's randomness
depends only on (master_seed, i), so results are identical for any worker
count, including under early stopping.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .modem import RngStream, SnrSpec, awgn_sample, bpsk_map, rayleigh_sample


@dataclass(frozen=True)
class McConfig:
    snr: SnrSpec
    max_words: int
    target_errors: int | None = 100
    channel: str = "awgn"
    master_seed: int = 0

    def __post_init__(self):
        if self.max_words < 1:
            raise ValueError("max_words must be >= 1")
        if self.target_errors is not None and self.target_errors < 1:
            raise ValueError("target_errors must be >= 1")
        if self.channel not in ("awgn", "rayleigh"):
            raise ValueError(f"unknown channel {self.channel!r}")


@dataclass(frozen=True)
class McResult:
    words: int
    errors: int
    wer: float
    ci95: tuple[float, float]


def wilson_interval(errors: int, words: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if words < 1:
        raise ValueError("words must be >= 1")
    p = errors / words
    denom = 1.0 + z * z / words
    center = (p + z * z / (2.0 * words)) / denom
    half = z * math.sqrt(p * (1.0 - p) / words + z * z / (4.0 * words * words)) / denom
    lo = 0.0 if errors == 0 else max(center - half, 0.0)
    hi = 1.0 if errors == words else min(center + half, 1.0)
    return lo, hi


@dataclass(eq=False)
class _McContext:
    decoder: object
    symbols: np.ndarray
    codeword: np.ndarray
    n0: float
    channel: str
    master_seed: int


_MC_CTX: _McContext | None = None


def _mc_init(ctx: _McContext):
    global _MC_CTX
    _MC_CTX = ctx


def _mc_pool_chunk(args):
    return _mc_chunk(_MC_CTX, *args)


def _mc_chunk(ctx: _McContext, start: int, count: int) -> np.ndarray:
    n = ctx.symbols.size
    flags = np.zeros(count, dtype=bool)
    for i in range(count):
        gen = RngStream(ctx.master_seed, start + i).generator()
        if ctx.channel == "rayleigh":
            gains = rayleigh_sample(n, gen)
            sent = ctx.symbols * gains
        else:
            gains = None
            sent = ctx.symbols
        y = sent + awgn_sample(n, ctx.n0, gen)
        decided = ctx.decoder.decode(y, gains, ctx.n0)
        flags[i] = bool((decided != ctx.codeword).any())
    return flags


def simulate_wer(code, decoder, cfg: McConfig, codeword=None, threads: int = 1) -> McResult:
    """Count word errors until target_errors or max_words, whichever first."""
    if codeword is None:
        codeword = np.zeros(code.n, dtype=np.uint8)
    else:
        codeword = np.asarray(codeword, dtype=np.uint8)
    ctx = _McContext(
        decoder=decoder,
        symbols=bpsk_map(codeword, cfg.snr.es),
        codeword=codeword,
        n0=cfg.snr.n0,
        channel=cfg.channel,
        master_seed=cfg.master_seed,
    )
    chunk = max(1, min(2000, -(-cfg.max_words // max(4, 4 * threads))))
    spans = [(s, min(chunk, cfg.max_words - s)) for s in range(0, cfg.max_words, chunk)]

    errors = 0
    words = 0
    target = cfg.target_errors

    def consume(flags: np.ndarray) -> bool:
        """Fold one chunk in stream order; True when the error target is hit."""
        nonlocal errors, words
        if target is not None and errors + int(flags.sum()) >= target:
            hits = np.nonzero(np.cumsum(flags) + errors >= target)[0]
            stop_at = int(hits[0])
            errors += int(flags[: stop_at + 1].sum())
            words += stop_at + 1
            return True
        errors += int(flags.sum())
        words += flags.size
        return False

    if threads <= 1 or len(spans) == 1:
        for s, c in spans:
            if consume(_mc_chunk(ctx, s, c)):
                break
    else:
        with ProcessPoolExecutor(max_workers=threads, initializer=_mc_init, initargs=(ctx,)) as pool:
            done = False
            # Waves keep the deterministic stream order while letting a hit
            # target cancel the not-yet-submitted remainder.
            for w0 in range(0, len(spans), threads):
                wave = spans[w0 : w0 + threads]
                for flags in pool.map(_mc_pool_chunk, wave):
                    if consume(flags):
                        done = True
                        break
                if done:
                    break

    if words == 0:
        raise RuntimeError("no words processed")
    return McResult(words=words, errors=errors, wer=errors / words, ci95=wilson_interval(errors, words))
