"""Decision-region square-radius measurement and the Gamma moment fit.

The transmitted point is always the all-zero codeword (linearity). For a
noise direction theta, the radius is the largest scale lambda at which the
decoder still returns the transmitted word; the normalized square radius
l_n = lambda^2 / (n Es) is the quantity every WER evaluator consumes.

Directions along which the decoder never fails up to the search cap are
recorded as censored at the cap: they are excluded from the moments but
still enter sample-average WER evaluation (their error contribution is the
chi-square tail at the cap, numerically zero at any SNR of interest).
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .codes import LinearBlockCode
from .modem import RngStream, bpsk_map, rayleigh_sample, snr_from_eb_n0

DEFAULT_LAMBDA_CAP_LN = 100.0
DEFAULT_REL_TOL = 1e-3
DEFAULT_PROBE_EB_N0_DB = 1.0
_MAX_BISECTIONS = 40
_AUDIT_PROBES = 8

SAMPLE_CSV_HEADER = "stream_index,lambda_hat,l_n,censored"


class InvariantViolationError(RuntimeError):
    """The decoder rejected its own noiseless codeword."""


class DegenerateDistributionError(ValueError):
    """Zero-variance sample set: the radius distribution is a point mass."""


@dataclass(frozen=True)
class RadiusSample:
    stream_index: int
    lambda_hat: float
    censored: bool
    n: int
    es: float = 1.0

    @property
    def l(self) -> float:
        return self.lambda_hat**2

    @property
    def l_n(self) -> float:
        return self.l / (self.n * self.es)


@dataclass(frozen=True)
class GammaFit:
    """Shape/scale pair matched to the radius moments: a = m^2/v, b = v/m."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a > 0 and self.b > 0):
            raise ValueError(f"invalid Gamma parameters a={self.a}, b={self.b}")

    @property
    def mean(self) -> float:
        return self.a * self.b

    @property
    def variance(self) -> float:
        return self.a * self.b**2


def fit_gamma(mean: float, variance: float) -> GammaFit:
    if mean <= 0.0:
        raise ValueError("mean must be positive")
    if variance < 0.0:
        raise ValueError("variance must be nonnegative")
    if variance == 0.0:
        raise DegenerateDistributionError(
            "zero variance: point-mass radius distribution; use the asymptotic step WER"
        )
    return GammaFit(a=mean**2 / variance, b=variance / mean)


def gamma_fit_deviation(mean: float, variance: float, a: float, b: float) -> tuple[float, float]:
    """Relative deviation of tabulated (a, b) from the moment fit; used to flag typos."""
    ref = fit_gamma(mean, variance)
    return abs(ref.a - a) / ref.a, abs(ref.b - b) / ref.b


@dataclass(eq=False)
class SrPdfEstimate:
    """Measured normalized square-radius samples with their metadata."""

    stream_index: np.ndarray
    lambda_hat: np.ndarray
    l_n: np.ndarray
    censored: np.ndarray
    n: int
    es: float = 1.0
    channel: str = "awgn"
    code_name: str = ""
    decoder_name: str = ""
    max_iterations: int | None = None
    probe_eb_n0_db: float | None = None
    master_seed: int | None = None
    rel_tol: float | None = None
    lambda_cap_ln: float = DEFAULT_LAMBDA_CAP_LN
    audited: int = 0
    audit_violations: int = 0
    schedule: str | None = None

    @classmethod
    def from_samples(cls, l_n, n: int, channel: str = "awgn", es: float = 1.0, **meta) -> "SrPdfEstimate":
        """Wrap a plain array of normalized square radii (e.g. synthetic draws)."""
        l_n = np.asarray(l_n, dtype=np.float64)
        if np.any(l_n < 0.0):
            raise ValueError("normalized square radii must be nonnegative")
        return cls(
            stream_index=np.arange(l_n.size, dtype=np.int64),
            lambda_hat=np.sqrt(l_n * n * es),
            l_n=l_n,
            censored=np.zeros(l_n.size, dtype=bool),
            n=n,
            es=es,
            channel=channel,
            **meta,
        )

    @property
    def count(self) -> int:
        return int(self.l_n.size)

    @property
    def censored_count(self) -> int:
        return int(self.censored.sum())

    @property
    def uncensored_l_n(self) -> np.ndarray:
        return self.l_n[~self.censored]

    @property
    def mean(self) -> float:
        return float(np.mean(self.uncensored_l_n))

    @property
    def variance(self) -> float:
        x = self.uncensored_l_n
        return float(np.var(x, ddof=1)) if x.size > 1 else 0.0

    @property
    def monotonicity_violation_rate(self) -> float:
        return self.audit_violations / self.audited if self.audited else 0.0

    def gamma_fit(self) -> GammaFit:
        return fit_gamma(self.mean, self.variance)

    def histogram(self) -> tuple[np.ndarray, np.ndarray]:
        """Freedman-Diaconis histogram of the uncensored samples (reporting only)."""
        x = self.uncensored_l_n
        if x.size < 2 or np.ptp(x) == 0.0:
            lo = float(x[0]) if x.size else 0.0
            return np.array([x.size]), np.array([lo - 0.5, lo + 0.5])
        counts, edges = np.histogram(x, bins="fd")
        return counts, edges

    def summary_dict(self) -> dict:
        try:
            fit = self.gamma_fit()
            a, b = fit.a, fit.b
        except (DegenerateDistributionError, ValueError):
            a = b = None
        return {
            "code": self.code_name,
            "decoder": self.decoder_name,
            "channel": self.channel,
            "n": self.n,
            "count": self.count,
            "censored_count": self.censored_count,
            "mean": self.mean,
            "variance": self.variance,
            "a": a,
            "b": b,
            "probe_eb_n0_db": self.probe_eb_n0_db,
            "master_seed": self.master_seed,
            "es": self.es,
            "rel_tol": self.rel_tol,
            "lambda_cap_ln": self.lambda_cap_ln,
            "censored_fraction": self.censored_count / self.count if self.count else 0.0,
            "monotonicity_violation_rate": self.monotonicity_violation_rate,
            "audited": self.audited,
            "max_iterations": self.max_iterations,
            "schedule": self.schedule,
        }


def sample_direction(n: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform direction on the unit sphere in R^n (normalized Gaussian draw)."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    while True:
        v = gen.normal(size=n)
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v / norm


def analytic_ml_radius(code: LinearBlockCode, theta, gains=None, es: float = 1.0) -> float:
    """Exact ML square radius along theta: nearest competing mid-plane crossing.

    Returns inf when no competing codeword's half-space faces theta (the
    region is unbounded in that direction).
    """
    if code.codebook is None:
        raise ValueError(f"{code.name}: analytic ML radius needs an explicit codebook")
    theta = np.asarray(theta, dtype=np.float64)
    h = np.ones(code.n) if gains is None else np.asarray(gains, dtype=np.float64)
    competitors = code.codebook[1:].astype(np.float64)
    dist_sq = 4.0 * es * (competitors @ (h * h))
    denom = -4.0 * np.sqrt(es) * (competitors @ (h * theta))
    facing = denom > 0.0
    if not facing.any():
        return np.inf
    lam = (dist_sq[facing] / denom[facing]).min()
    return float(lam * lam)


def measure_radius(
    decoder,
    theta,
    gains=None,
    probe_eb_n0_db: float = DEFAULT_PROBE_EB_N0_DB,
    lambda_cap_ln: float = DEFAULT_LAMBDA_CAP_LN,
    rel_tol: float = DEFAULT_REL_TOL,
    es: float = 1.0,
    stream_index: int = 0,
    check_zero: bool = True,
) -> RadiusSample:
    """Bracket-and-bisect the decision boundary along one direction."""
    if not 0.0 < rel_tol < 0.1:
        raise ValueError("rel_tol must be in (0, 0.1)")
    code = decoder.code
    n0 = snr_from_eb_n0(probe_eb_n0_db, code.rate, es).n0
    s = bpsk_map(np.zeros(code.n, dtype=np.uint8), es)
    if gains is not None:
        s = s * np.asarray(gains, dtype=np.float64)
    if check_zero and not _decodes_to_zero(decoder, s, gains, n0):
        raise InvariantViolationError(f"sample {stream_index}: decoder rejects its noiseless codeword")
    lam, censored = _bisect_radius(decoder, s, np.asarray(theta, float), gains, n0, code.n, es, lambda_cap_ln, rel_tol)
    return RadiusSample(stream_index=stream_index, lambda_hat=lam, censored=censored, n=code.n, es=es)


def _decodes_to_zero(decoder, point, gains, n0) -> bool:
    return not decoder.decode(point, gains, n0).any()


def _bisect_radius(decoder, s, theta, gains, n0, n, es, lambda_cap_ln, rel_tol):
    lam_cap = np.sqrt(lambda_cap_ln * n * es)
    lam0 = 0.1 * np.sqrt(n * es)

    def ok(lam):
        return _decodes_to_zero(decoder, s + lam * theta, gains, n0)

    if ok(lam0):
        lo = lam0
        hi = None
        lam = lam0
        while hi is None:
            lam = min(2.0 * lam, lam_cap)
            if ok(lam):
                lo = lam
                if lam >= lam_cap:
                    return lam_cap, True
            else:
                hi = lam
    else:
        lo, hi = 0.0, lam0

    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= rel_tol * lo:
            break
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), False


@dataclass(eq=False)
class _MeasureContext:
    decoder: object
    channel: str
    unit_gains: bool
    master_seed: int
    probe_eb_n0_db: float
    lambda_cap_ln: float
    rel_tol: float
    es: float
    audit_stride: int


_WORKER_CTX: _MeasureContext | None = None


def _init_worker(ctx: _MeasureContext):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _pool_chunk(args):
    return _measure_chunk(_WORKER_CTX, *args)


def _measure_chunk(ctx: _MeasureContext, start: int, count: int):
    decoder = ctx.decoder
    code = decoder.code
    n, es = code.n, ctx.es
    n0 = snr_from_eb_n0(ctx.probe_eb_n0_db, code.rate, es).n0
    s0 = bpsk_map(np.zeros(n, dtype=np.uint8), es)
    rayleigh = ctx.channel == "rayleigh" and not ctx.unit_gains

    if not rayleigh and not _decodes_to_zero(decoder, s0, None, n0):
        raise InvariantViolationError(f"sample {start}: decoder rejects its noiseless codeword")

    lam_out = np.empty(count)
    cens_out = np.zeros(count, dtype=bool)
    audited = 0
    violations = 0
    for i in range(count):
        idx = start + i
        gen = RngStream(ctx.master_seed, idx).generator()
        if rayleigh:
            gains = rayleigh_sample(n, gen)
            s = s0 * gains
            if not _decodes_to_zero(decoder, s, gains, n0):
                raise InvariantViolationError(f"sample {idx}: decoder rejects its noiseless codeword")
        else:
            gains = None
            s = s0
        theta = sample_direction(n, gen)
        lam, censored = _bisect_radius(decoder, s, theta, gains, n0, n, es, ctx.lambda_cap_ln, ctx.rel_tol)
        lam_out[i] = lam
        cens_out[i] = censored
        if not censored and ctx.audit_stride and idx % ctx.audit_stride == 0:
            audited += 1
            lo = lam * (1.0 - ctx.rel_tol)
            probes = lo * np.arange(1, _AUDIT_PROBES + 1) / (_AUDIT_PROBES + 1)
            if any(not _decodes_to_zero(decoder, s + p * theta, gains, n0) for p in probes):
                violations += 1
    return lam_out, cens_out, audited, violations


def estimate_srpdf(
    code: LinearBlockCode,
    decoder,
    num_samples: int,
    master_seed: int,
    *,
    channel: str = "awgn",
    probe_eb_n0_db: float = DEFAULT_PROBE_EB_N0_DB,
    lambda_cap_ln: float = DEFAULT_LAMBDA_CAP_LN,
    rel_tol: float = DEFAULT_REL_TOL,
    es: float = 1.0,
    audit_fraction: float = 0.05,
    unit_gains: bool = False,
    threads: int = 1,
) -> SrPdfEstimate:
    """Measure the normalized SR-PDF with stream-indexed deterministic sampling.

    The result is identical for any `threads` value: sample i depends only on
    (master_seed, i). For the Rayleigh channel each sample draws a fresh gain
    vector before its direction, so the pooled samples estimate the
    gain-averaged SR-PDF; `unit_gains` pins the gains to 1 (validation hook:
    the result is then bit-identical to the AWGN path).
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    if channel not in ("awgn", "rayleigh"):
        raise ValueError(f"unknown channel {channel!r}")
    audit_stride = max(1, round(1.0 / audit_fraction)) if audit_fraction > 0 else 0
    ctx = _MeasureContext(
        decoder=decoder,
        channel=channel,
        unit_gains=unit_gains,
        master_seed=master_seed,
        probe_eb_n0_db=probe_eb_n0_db,
        lambda_cap_ln=lambda_cap_ln,
        rel_tol=rel_tol,
        es=es,
        audit_stride=audit_stride,
    )
    chunk = max(1, min(500, -(-num_samples // max(1, 4 * threads))))
    spans = [(s, min(chunk, num_samples - s)) for s in range(0, num_samples, chunk)]
    if threads <= 1 or len(spans) == 1:
        parts = [_measure_chunk(ctx, s, c) for s, c in spans]
    else:
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=(ctx,)) as pool:
            parts = list(pool.map(_pool_chunk, spans))

    lam = np.concatenate([p[0] for p in parts])
    cens = np.concatenate([p[1] for p in parts])
    return SrPdfEstimate(
        stream_index=np.arange(num_samples, dtype=np.int64),
        lambda_hat=lam,
        l_n=lam**2 / (code.n * es),
        censored=cens,
        n=code.n,
        es=es,
        channel=channel,
        code_name=code.name,
        decoder_name=getattr(decoder, "name", decoder.__class__.__name__),
        max_iterations=getattr(decoder, "max_iterations", None),
        probe_eb_n0_db=probe_eb_n0_db,
        master_seed=master_seed,
        rel_tol=rel_tol,
        lambda_cap_ln=lambda_cap_ln,
        audited=sum(p[2] for p in parts),
        audit_violations=sum(p[3] for p in parts),
        schedule="flooding" if getattr(decoder, "algorithm", "").startswith("ldpc") else None,
    )


def estimate_srpdf_analytic(
    code: LinearBlockCode,
    num_samples: int,
    master_seed: int,
    *,
    channel: str = "awgn",
    lambda_cap_ln: float = DEFAULT_LAMBDA_CAP_LN,
    es: float = 1.0,
    unit_gains: bool = False,
) -> SrPdfEstimate:
    """Exact-radius estimate from the ML mid-plane geometry (codebook codes only).

    Draws gains and directions in the same stream order as estimate_srpdf, so
    a run with the same master seed measures the same directions.
    """
    if code.codebook is None:
        raise ValueError(f"{code.name}: analytic estimate needs an explicit codebook")
    n = code.n
    lam_cap = np.sqrt(lambda_cap_ln * n * es)
    lam = np.empty(num_samples)
    cens = np.zeros(num_samples, dtype=bool)
    rayleigh = channel == "rayleigh" and not unit_gains
    for idx in range(num_samples):
        gen = RngStream(master_seed, idx).generator()
        gains = rayleigh_sample(n, gen) if rayleigh else None
        theta = sample_direction(n, gen)
        l = analytic_ml_radius(code, theta, gains, es)
        if not np.isfinite(l) or l >= lam_cap**2:
            lam[idx] = lam_cap
            cens[idx] = True
        else:
            lam[idx] = np.sqrt(l)
    return SrPdfEstimate(
        stream_index=np.arange(num_samples, dtype=np.int64),
        lambda_hat=lam,
        l_n=lam**2 / (n * es),
        censored=cens,
        n=n,
        es=es,
        channel=channel,
        code_name=code.name,
        decoder_name="ml_analytic",
        master_seed=master_seed,
        rel_tol=0.0,
        lambda_cap_ln=lambda_cap_ln,
    )


def write_samples_csv(est: SrPdfEstimate, header_lines: list[str] | None = None) -> str:
    """Render the sample dump; `#`-prefixed lines carry the resolved config."""
    buf = io.StringIO()
    for line in header_lines or []:
        buf.write(f"# {line}\n")
    buf.write(SAMPLE_CSV_HEADER + "\n")
    for idx, lam, ln_, c in zip(est.stream_index, est.lambda_hat, est.l_n, est.censored):
        buf.write(f"{idx},{float(lam)!r},{float(ln_)!r},{int(c)}\n")
    return buf.getvalue()


def read_samples_csv(text: str, n: int, es: float = 1.0, channel: str = "awgn", **meta) -> SrPdfEstimate:
    idx, lam, ln_, cens = [], [], [], []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != SAMPLE_CSV_HEADER:
                raise ValueError(f"unexpected sample CSV header: {line!r}")
            header_seen = True
            continue
        f0, f1, f2, f3 = line.split(",")
        idx.append(int(f0))
        lam.append(float(f1))
        ln_.append(float(f2))
        cens.append(bool(int(f3)))
    if not header_seen:
        raise ValueError("missing sample CSV header")
    return SrPdfEstimate(
        stream_index=np.array(idx, dtype=np.int64),
        lambda_hat=np.array(lam),
        l_n=np.array(ln_),
        censored=np.array(cens, dtype=bool),
        n=n,
        es=es,
        channel=channel,
        **meta,
    )
