"""Scikit-learn style front door for the measure-then-evaluate pipeline.

fit() measures the decision-region radius distribution of the configured
code/decoder/channel triple (it generates its own Monte Carlo directions, so
X is ignored); predict() maps Eb/N0 points in dB to word error rates with
the configured evaluation method. All constructor arguments are stored
verbatim, so get_params / set_params / clone compose with the usual tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from . import wer as _wer
from .codes import LinearBlockCode, code_from_spec
from .decoders import make_decoder
from .modem import snr_from_eb_n0
from .srpdf import estimate_srpdf


class SquareRadiusWerEstimator(BaseEstimator):
    """Predict block-code WER from measured decision-region radius statistics.

    Parameters
    ----------
    code : str or LinearBlockCode
        Code spec string (e.g. "hamming74", "repetition:8", "ldpc36",
        "conv:133,171:7:282", "alist:/path/to.alist") or a built code.
    decoder : str
        One of "ml", "viterbi", "spa", "msa".
    channel : str
        "awgn" or "rayleigh" (fully interleaved, unit-power, perfect CSI).
    method : str
        Evaluation method used by predict: "sample_integral",
        "empirical_cdf", "gamma_closed", "gamma_asymptotic" or
        "gamma_asymptotic_int".
    num_samples, master_seed, probe_eb_n0_db, max_iterations, rel_tol,
    lambda_cap_ln, audit_fraction, threads :
        Passed through to the radius measurement.
    """

    def __init__(
        self,
        code="hamming74",
        decoder="ml",
        channel="awgn",
        method="sample_integral",
        num_samples=2000,
        master_seed=0,
        probe_eb_n0_db=1.0,
        max_iterations=25,
        rel_tol=1e-3,
        lambda_cap_ln=100.0,
        audit_fraction=0.05,
        threads=1,
    ):
        self.code = code
        self.decoder = decoder
        self.channel = channel
        self.method = method
        self.num_samples = num_samples
        self.master_seed = master_seed
        self.probe_eb_n0_db = probe_eb_n0_db
        self.max_iterations = max_iterations
        self.rel_tol = rel_tol
        self.lambda_cap_ln = lambda_cap_ln
        self.audit_fraction = audit_fraction
        self.threads = threads

    def fit(self, X=None, y=None):
        """Measure the radius distribution; X and y are ignored."""
        if self.method not in ("sample_integral", "empirical_cdf", "gamma_closed", "gamma_asymptotic", "gamma_asymptotic_int"):
            raise ValueError(f"unknown evaluation method {self.method!r}")
        code = self.code if isinstance(self.code, LinearBlockCode) else code_from_spec(self.code)
        decoder = make_decoder(self.decoder, code, self.max_iterations)
        self.estimate_ = estimate_srpdf(
            code,
            decoder,
            self.num_samples,
            self.master_seed,
            channel=self.channel,
            probe_eb_n0_db=self.probe_eb_n0_db,
            lambda_cap_ln=self.lambda_cap_ln,
            rel_tol=self.rel_tol,
            audit_fraction=self.audit_fraction,
            threads=self.threads,
        )
        self.code_ = code
        self.n_ = code.n
        self.rate_ = code.rate
        self.mean_ = self.estimate_.mean
        self.variance_ = self.estimate_.variance
        fit = self.estimate_.gamma_fit()
        self.shape_ = fit.a
        self.scale_ = fit.b
        self.censored_fraction_ = self.estimate_.censored_count / self.estimate_.count
        return self

    def predict(self, X):
        """WER at each Eb/N0 (dB) in X (1-d array or single column)."""
        if not hasattr(self, "estimate_"):
            raise NotFittedError("call fit before predict")
        X = check_array(X, ensure_2d=False, dtype=np.float64)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("expected a 1-d array or a single column of Eb/N0 values")
            X = X[:, 0]
        fit = self.estimate_.gamma_fit()
        out = np.empty(X.size)
        for i, db in enumerate(X):
            snr = snr_from_eb_n0(float(db), self.rate_)
            if self.method == "sample_integral":
                if self.estimate_.channel == "rayleigh":
                    point = _wer.wer_fading_average(self.estimate_, snr)
                else:
                    point = _wer.wer_sample_integral(self.estimate_, snr)
            elif self.method == "empirical_cdf":
                point = _wer.wer_asymptotic_empirical(self.estimate_, snr)
            elif self.method == "gamma_closed":
                point = _wer.wer_gamma_closed(fit, self.n_, snr)
            else:
                point = _wer.wer_gamma_asymptotic(fit, snr, integer_rounded=self.method.endswith("_int"))
            out[i] = point.wer
        return out

    def asymptotic_summary(self, epsilon: float = 0.01) -> _wer.AsymptoticSummary:
        """Critical SNR and quantile-width summary of the fitted measurement."""
        if not hasattr(self, "estimate_"):
            raise NotFittedError("call fit before asymptotic_summary")
        return _wer.asymptotic_summary_from_estimate(self.estimate_, self.rate_, epsilon)
