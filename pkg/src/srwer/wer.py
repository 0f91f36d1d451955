"""WER evaluators: exact sample average, Gamma closed forms, asymptotics.

Every evaluator returns WerPoint values so curves from different methods
share one schema. The exact evaluator averages the chi-square tail over the
raw measured radii (no histogram binning); the Gamma closed form reduces the
negative-binomial sum to a regularized incomplete beta; the asymptotic forms
follow from the large-n step limit of the conditional WER.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import specfun
from .modem import SnrSpec
from .srpdf import GammaFit, SrPdfEstimate

METHODS = (
    "sample_integral",
    "gamma_closed",
    "gamma_asymptotic_int",
    "gamma_asymptotic",
    "empirical_cdf",
    "monte_carlo",
)

WER_CSV_HEADER = "eb_n0_db,wer,std_err,method"


class VacuousBoundError(ValueError):
    """The Chebyshev quantile bound is undefined (sigma too large for epsilon)."""


class MetadataMismatchError(ValueError):
    """An estimate measured on one channel was passed to another channel's evaluator."""


@dataclass(frozen=True)
class WerPoint:
    snr: SnrSpec
    wer: float
    method: str
    std_error: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not -1e-12 <= self.wer <= 1.0 + 1e-12:
            raise ValueError(f"WER {self.wer} outside [0, 1]")
        object.__setattr__(self, "wer", min(max(self.wer, 0.0), 1.0))


@dataclass(frozen=True)
class AsymptoticSummary:
    critical_snr_eb_n0_db: float
    tau0: float
    delta_eps: float | None
    delta_eps_db: float | None
    chebyshev_bound_db: float | None
    epsilon: float


def conditional_wer(l_n, n: int, beta: float):
    """Probability that the noise norm exceeds the radius along a direction.

    1 - P(n/2, n beta l_n / 2); decreasing in both l_n and beta, and
    approaching the step indicator of l_n < 1/beta as n grows.
    """
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    l_n = np.asarray(l_n, dtype=np.float64)
    if np.any(l_n < 0.0):
        raise ValueError("l_n must be nonnegative")
    out = special.gammaincc(n / 2.0, n * beta * l_n / 2.0)
    return float(out) if out.ndim == 0 else out


def wer_sample_integral(est: SrPdfEstimate, snr: SnrSpec) -> WerPoint:
    """Sample-average WER over the measured radii (censored ones enter at the cap)."""
    if est.count < 1:
        raise ValueError("empty estimate")
    vals = conditional_wer(est.l_n, est.n, snr.beta)
    std = float(np.std(vals, ddof=1)) / math.sqrt(est.count) if est.count > 1 else 0.0
    return WerPoint(snr=snr, wer=float(np.mean(vals)), method="sample_integral", std_error=std)


def wer_fading_average(est: SrPdfEstimate, snr: SnrSpec) -> WerPoint:
    """Gain-averaged WER: the same kernel applied to the pooled fading radii."""
    if est.channel != "rayleigh":
        raise MetadataMismatchError(f"fading average needs a rayleigh estimate, got {est.channel!r}")
    return wer_sample_integral(est, snr)


def wer_asymptotic_empirical(est: SrPdfEstimate, snr: SnrSpec) -> WerPoint:
    """Large-n limit: the empirical CDF of l_n evaluated at 1/beta."""
    if est.count < 1:
        raise ValueError("empty estimate")
    frac = float(np.mean(est.l_n <= 1.0 / snr.beta))
    std = math.sqrt(max(frac * (1.0 - frac), 0.0) / est.count)
    return WerPoint(snr=snr, wer=frac, method="empirical_cdf", std_error=std)


def _closed_form_u(n: int, beta: float, b: float) -> float:
    return 2.0 / (n * beta * b + 2.0)


def wer_gamma_closed(fit: GammaFit, n: int, snr: SnrSpec) -> WerPoint:
    """Finite-n closed form: negative-binomial CDF, i.e. I_u(a, n/2), u = 2/(n beta b + 2)."""
    if n % 2:
        warnings.warn(f"odd codeword length {n} rounded down to {n - 1} for the closed form", stacklevel=2)
        n = n - 1
    if n < 2:
        raise ValueError("closed form needs n >= 2")
    u = _closed_form_u(n, snr.beta, fit.b)
    wer = specfun.reg_inc_beta(fit.a, n // 2, u)
    return WerPoint(snr=snr, wer=wer, method="gamma_closed")


def wer_gamma_integral_oracle(fit: GammaFit, n: int, snr: SnrSpec, quadrature_points: int = 300) -> float:
    """Adaptive quadrature of (Gamma pdf) x (conditional WER); test oracle only.

    The integrand is evaluated in log domain and the integral is truncated
    where the Gamma upper tail drops below 1e-25, which keeps the result
    accurate in a relative sense even when the WER itself is tiny.
    """
    a, b = fit.a, fit.b
    if n % 2:
        n = n - 1
    beta = snr.beta
    log_norm = -a * math.log(b) - special.gammaln(a)

    def integrand(x):
        if x <= 0.0:
            return 0.0
        tail = special.gammaincc(n / 2.0, n * beta * x / 2.0)
        if tail == 0.0:
            return 0.0
        return math.exp(log_norm + (a - 1.0) * math.log(x) - x / b) * tail

    x_hi = b * float(special.gammainccinv(a, 1e-25))
    quantiles = [1e-12, 1e-6, 1e-3, 0.05, 0.5, 0.95, 1.0 - 1e-3, 1.0 - 1e-6]
    pts = [b * float(special.gammaincinv(a, q)) for q in quantiles]
    step = 1.0 / beta
    pts += [step * (1.0 - 8.0 / math.sqrt(n)), step, step * (1.0 + 8.0 / math.sqrt(n))]
    pts = sorted(p for p in pts if 0.0 < p < x_hi)
    val, _ = integrate.quad(integrand, 0.0, x_hi, points=pts, limit=quadrature_points, epsabs=0.0, epsrel=1e-11)
    return min(max(val, 0.0), 1.0)


def wer_gamma_asymptotic(fit: GammaFit, snr: SnrSpec, integer_rounded: bool = False) -> WerPoint:
    """Large-n approximation: the fitted Gamma CDF at 1/beta.

    With integer_rounded, the shape is floored to an integer and the CDF is
    evaluated as the explicit log-domain exponential sum.
    """
    y = 1.0 / (snr.beta * fit.b)
    if integer_rounded:
        shape = math.floor(fit.a)
        wer = 1.0 if shape < 1 else specfun.poisson_cdf_complement_logsum(shape, y)
        return WerPoint(snr=snr, wer=wer, method="gamma_asymptotic_int")
    return WerPoint(snr=snr, wer=specfun.reg_lower_gamma(fit.a, y), method="gamma_asymptotic")


def critical_snr(mean_l_n: float, rate: float) -> float:
    """Eb/N0 (dB) at which the asymptotic WER curve has its inflection.

    beta_c = 1 / mean(l_n), converted through beta = 2 R Eb/N0.
    """
    if mean_l_n <= 0.0:
        raise ValueError("mean_l_n must be positive")
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must be in (0, 1]")
    return 10.0 * math.log10(1.0 / (2.0 * rate * mean_l_n))


def delta_epsilon(est: SrPdfEstimate, epsilon: float) -> tuple[float, float]:
    """Width of the radius quantile range [eps, 1-eps], linear and in dB."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must be in (0, 0.5)")
    required = math.ceil(10.0 / epsilon)
    if est.count < required:
        raise ValueError(f"need at least {required} samples for epsilon={epsilon}, have {est.count}")
    q_lo, q_hi = np.quantile(est.l_n, [epsilon, 1.0 - epsilon], method="linear")
    linear = float(q_hi - q_lo)
    db = 10.0 * math.log10(q_hi / q_lo) if q_lo > 0.0 else math.inf
    return linear, db


def chebyshev_delta_bound_db(mean: float, variance: float, epsilon: float) -> float:
    """Chebyshev upper bound on the dB quantile width, from moments alone."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must be in (0, 0.5)")
    if mean <= 0.0 or variance < 0.0:
        raise ValueError("need mean > 0 and variance >= 0")
    half_width = math.sqrt(variance / (2.0 * epsilon))
    if mean - half_width <= 0.0:
        raise VacuousBoundError(
            f"bound vacuous: mean {mean} <= sigma*sqrt(1/(2 eps)) = {half_width}"
        )
    return 10.0 * math.log10((mean + half_width) / (mean - half_width))


def asymptotic_summary_from_moments(
    mean: float, variance: float, rate: float, epsilon: float = 0.01
) -> AsymptoticSummary:
    """Summary computable from moments alone; quantile widths need samples."""
    delta = delta_db = None
    if variance == 0.0:
        delta, delta_db = 0.0, 0.0
    try:
        bound = chebyshev_delta_bound_db(mean, variance, epsilon)
    except VacuousBoundError:
        bound = None
    return AsymptoticSummary(
        critical_snr_eb_n0_db=critical_snr(mean, rate),
        tau0=mean,
        delta_eps=delta,
        delta_eps_db=delta_db,
        chebyshev_bound_db=bound,
        epsilon=epsilon,
    )


def asymptotic_summary_from_estimate(est: SrPdfEstimate, rate: float, epsilon: float = 0.01) -> AsymptoticSummary:
    delta, delta_db = delta_epsilon(est, epsilon)
    base = asymptotic_summary_from_moments(est.mean, est.variance, rate, epsilon)
    return AsymptoticSummary(
        critical_snr_eb_n0_db=base.critical_snr_eb_n0_db,
        tau0=base.tau0,
        delta_eps=delta,
        delta_eps_db=delta_db,
        chebyshev_bound_db=base.chebyshev_bound_db,
        epsilon=epsilon,
    )


def write_wer_csv(points, header_lines: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in header_lines or []:
        buf.write(f"# {line}\n")
    buf.write(WER_CSV_HEADER + "\n")
    for p in points:
        std = "" if p.std_error is None else repr(float(p.std_error))
        buf.write(f"{float(p.snr.eb_n0_db)!r},{float(p.wer)!r},{std},{p.method}\n")
    return buf.getvalue()
