"""WER evaluation for soft-decision-decoded binary block codes.

The pipeline: measure the square radius of the decoder's decision region
along random noise directions, summarize the normalized radius distribution
(optionally with a two-parameter Gamma fit), then evaluate word error rate
exactly from the samples or in closed form from the fit; a direct channel
simulator provides the ground truth.
"""

from .codes import (
    LinearBlockCode,
    code_from_spec,
    convolutional_code,
    hamming_7_4,
    ldpc_from_alist,
    min_distance,
    peg_regular_ldpc,
    repetition_code,
    shipped_ldpc_1152,
)
from .decoders import (
    LdpcDecoder,
    MlExhaustiveDecoder,
    ViterbiSoftDecoder,
    make_decoder,
)
from .estimator import SquareRadiusWerEstimator
from .modem import RngStream, SnrSpec, snr_from_eb_n0
from .montecarlo import McConfig, McResult, simulate_wer
from .srpdf import (
    GammaFit,
    SrPdfEstimate,
    analytic_ml_radius,
    estimate_srpdf,
    estimate_srpdf_analytic,
    fit_gamma,
    measure_radius,
)
from .wer import (
    AsymptoticSummary,
    WerPoint,
    chebyshev_delta_bound_db,
    conditional_wer,
    critical_snr,
    delta_epsilon,
    wer_asymptotic_empirical,
    wer_fading_average,
    wer_gamma_asymptotic,
    wer_gamma_closed,
    wer_gamma_integral_oracle,
    wer_sample_integral,
)

__version__ = "0.1.0"
