"""Numerically robust special functions used by every WER formula.

All probability-valued results are plain floats in [0, 1]; quantities that
would overflow in linear space (gamma of half the codeword length, large
shape parameters) are handled in log domain, either by scipy's
implementations or by the explicit log-domain summations below.
"""

from __future__ import annotations

import numpy as np
from scipy import special


def log_gamma(x):
    """Natural log of the gamma function, ln Γ(x), for x > 0.

    Accepts scalars or arrays; raises on any nonpositive argument.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("log_gamma requires x > 0")
    out = special.gammaln(x)
    return float(out) if out.ndim == 0 else out


def reg_lower_gamma(alpha, x):
    """Regularized lower incomplete gamma function P(alpha, x) in [0, 1].

    Monotone nondecreasing in x, P(alpha, 0) = 0 and P(alpha, inf) = 1.
    """
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(alpha <= 0.0):
        raise ValueError("reg_lower_gamma requires alpha > 0")
    if np.any(x < 0.0):
        raise ValueError("reg_lower_gamma requires x >= 0")
    out = special.gammainc(alpha, x)
    return float(out) if out.ndim == 0 else out


def reg_upper_gamma(alpha, x):
    """Regularized upper incomplete gamma function Q(alpha, x) = 1 - P(alpha, x).

    Evaluated directly (not as 1 - P) so that tiny tails keep full relative
    accuracy instead of cancelling to zero.
    """
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(alpha <= 0.0):
        raise ValueError("reg_upper_gamma requires alpha > 0")
    if np.any(x < 0.0):
        raise ValueError("reg_upper_gamma requires x >= 0")
    out = special.gammaincc(alpha, x)
    return float(out) if out.ndim == 0 else out


def reg_inc_beta(a, m, u):
    """Regularized incomplete beta function I_u(a, m) with I_0 = 0, I_1 = 1."""
    a = np.asarray(a, dtype=float)
    m = np.asarray(m, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(a <= 0.0) or np.any(m <= 0.0):
        raise ValueError("reg_inc_beta requires a > 0 and m > 0")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("reg_inc_beta requires 0 <= u <= 1")
    out = special.betainc(a, m, u)
    return float(out) if out.ndim == 0 else out


def chi_square_tail(dof, x, n0):
    """P[rho^2 >= x] for rho^2 a sum of `dof` squared N(0, n0/2) variables.

    Equals Q(dof/2, x/n0); equals 1 at x = 0 and decays monotonically.
    """
    if dof < 1 or int(dof) != dof:
        raise ValueError("chi_square_tail requires integer dof >= 1")
    if n0 <= 0.0:
        raise ValueError("chi_square_tail requires n0 > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("chi_square_tail requires x >= 0")
    out = special.gammaincc(dof / 2.0, x / n0)
    return float(out) if out.ndim == 0 else out


def neg_binomial_cdf_logsum(a, num_terms, u):
    """Direct log-domain evaluation of sum_{m=0}^{num_terms-1} (1-u)^m u^a / (m B(a, m)).

    The m = 0 term is the 0/0 limit u^a. Mathematically identical to
    I_u(a, num_terms); kept as an independent second route so the two can be
    cross-checked. Stable for shape parameters of several hundred, where the
    individual gamma factors overflow in linear space.
    """
    if a <= 0.0:
        raise ValueError("shape a must be positive")
    if num_terms < 1:
        raise ValueError("num_terms must be >= 1")
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0
    m = np.arange(num_terms, dtype=float)
    log_terms = (
        special.gammaln(a + m)
        - special.gammaln(a)
        - special.gammaln(m + 1.0)
        + m * np.log1p(-u)
        + a * np.log(u)
    )
    return float(np.exp(special.logsumexp(log_terms)))


def poisson_cdf_complement_logsum(shape_int, y):
    """1 - e^{-y} sum_{m=0}^{shape_int-1} y^m / m!, summed in log domain.

    Equals P(shape_int, y) for integer shape; the explicit summation is kept
    as the second route for the integer-shape gamma CDF identity.
    """
    if shape_int < 1 or int(shape_int) != shape_int:
        raise ValueError("shape_int must be a positive integer")
    if y < 0.0:
        raise ValueError("y must be nonnegative")
    if y == 0.0:
        return 0.0
    m = np.arange(int(shape_int), dtype=float)
    log_terms = -y + m * np.log(y) - special.gammaln(m + 1.0)
    # -expm1 keeps accuracy both when the sum is ~1 (result tiny) and ~0.
    return float(-np.expm1(special.logsumexp(log_terms)))
