"""Dataset similarity measures built on domain-classification output.

Three layers:

* the proxy A-distance ``2 * (1 - 2 * e)`` mapping held-out domain error
  ``e`` to a distance in [0, 2] (0 = indistinguishable, 2 = separable);
* a two-parameter maximum-likelihood Beta fit of the pooled classification
  probabilities, describing how strongly they spread away from 0.5;
* the data representativeness criterion (DRC), the ratio of KL divergences
  from the fitted distribution to two fixed benchmark priors.  A DRC below 1
  means the fit resembles the similar-datasets prior more than the
  dissimilar-datasets one.

The DRC requires a proper fitted density.  Probabilities near 0 and 1 push
the fitted shapes at or below 1, the density becomes unbounded at an
endpoint, and the criterion is reported as undefined instead of a number.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import betaln, digamma, polygamma

from .core import BetaParams, DrcConfig, DrcOutcome, DrcStatus, ProbabilitySet, Verdict
from .exceptions import (
    DegenerateVariance,
    FitFallbackWarning,
    OutOfRangeError,
    TooFewValues,
)

DEFAULT_CLAMP_EPS = 1e-6
ZERO_DENOMINATOR_GUARD = 1e-12

_NEWTON_TOL = 1e-10
_NEWTON_MAX_ITER = 100
_MIN_SHAPE_START = 1e-3


def proxy_a_distance(cv_error: float) -> float:
    """Map a held-out domain-classification error to a distance in [0, 2].

    An error of 0 (perfectly separable domains) maps to 2, an error of 0.5
    (indistinguishable domains) maps to 0.  Worse-than-chance errors clamp
    to 0: they still signal indistinguishability.
    """
    e = float(cv_error)
    if not (math.isfinite(e) and 0.0 <= e <= 1.0):
        raise OutOfRangeError(f"cv_error must lie in [0, 1], got {cv_error!r}")
    return max(0.0, 2.0 * (1.0 - 2.0 * e))


def _clamped_values(values, clamp_eps: float) -> np.ndarray:
    if isinstance(values, ProbabilitySet):
        vals = values.values
    else:
        vals = np.asarray(values, dtype=np.float64).ravel()
    if not 0.0 < clamp_eps < 0.5:
        raise OutOfRangeError(f"clamp_eps must lie in (0, 0.5), got {clamp_eps}")
    if vals.size < 4:
        raise TooFewValues(f"need at least 4 values to fit, got {vals.size}")
    if np.any(~np.isfinite(vals)):
        raise OutOfRangeError("values must be finite")
    return np.clip(vals, clamp_eps, 1.0 - clamp_eps)


def moment_estimate(values, clamp_eps: float = DEFAULT_CLAMP_EPS) -> BetaParams:
    """Method-of-moments Beta estimate used to start the Newton refinement.

    With sample mean m and variance v the estimate is
    ``alpha = m * (m * (1 - m) / v - 1)`` and the mirrored expression for
    beta.  When the data are more spread than any Beta with positive shapes
    allows (v >= m * (1 - m)) the shapes are floored at a small positive
    value so the likelihood is still evaluable.
    """
    v = _clamped_values(values, clamp_eps)
    m = float(np.mean(v))
    var = float(np.var(v, ddof=1))
    if var <= 0.0:
        raise DegenerateVariance("all values are equal after clamping")
    common = m * (1.0 - m) / var - 1.0
    alpha = max(m * common, _MIN_SHAPE_START)
    beta = max((1.0 - m) * common, _MIN_SHAPE_START)
    return BetaParams(alpha, beta)


def beta_log_likelihood(params: BetaParams, values, clamp_eps: float = DEFAULT_CLAMP_EPS) -> float:
    """Total Beta log-likelihood of the clamped values."""
    v = _clamped_values(values, clamp_eps)
    a, b = params.alpha, params.beta
    return float(
        v.size * ((a - 1.0) * np.mean(np.log(v)) + (b - 1.0) * np.mean(np.log1p(-v)) - betaln(a, b))
    )


def fit_beta_mle(values, clamp_eps: float = DEFAULT_CLAMP_EPS) -> BetaParams:
    """Two-parameter maximum-likelihood Beta fit.

    Values are clamped into [clamp_eps, 1 - clamp_eps] first: exact 0/1
    values make the log-likelihood divergent.  The method-of-moments
    estimate seeds a Newton iteration on the log-likelihood (digamma /
    trigamma derivatives) with backtracking, so the returned parameters are
    never worse than the start.  Stops when both parameter updates fall
    below 1e-10 or after 100 iterations; if the tolerance is not reached a
    FitFallbackWarning is issued and the best point so far is returned.

    Accepts a ProbabilitySet or any array of values in [0, 1].
    """
    v = _clamped_values(values, clamp_eps)
    start = moment_estimate(v, clamp_eps)

    s1 = float(np.mean(np.log(v)))
    s2 = float(np.mean(np.log1p(-v)))

    def mean_ll(a: float, b: float) -> float:
        return (a - 1.0) * s1 + (b - 1.0) * s2 - float(betaln(a, b))

    a, b = start.alpha, start.beta
    ll = mean_ll(a, b)
    converged = False
    for _ in range(_NEWTON_MAX_ITER):
        ga = s1 - digamma(a) + digamma(a + b)
        gb = s2 - digamma(b) + digamma(a + b)
        tri_ab = polygamma(1, a + b)
        haa = tri_ab - polygamma(1, a)
        hbb = tri_ab - polygamma(1, b)
        det = haa * hbb - tri_ab * tri_ab
        if not math.isfinite(det) or det == 0.0:
            break
        # Newton ascent step: solve H s = -g for the 2x2 Hessian.
        sa = -(hbb * ga - tri_ab * gb) / det
        sb = -(haa * gb - tri_ab * ga) / det
        step = 1.0
        improved = False
        for _ in range(60):
            na, nb = a + step * sa, b + step * sb
            if na > 0.0 and nb > 0.0:
                nll = mean_ll(na, nb)
                if math.isfinite(nll) and nll >= ll:
                    improved = True
                    break
            step *= 0.5
        if not improved:
            break
        update = max(abs(na - a), abs(nb - b))
        a, b, ll = na, nb, nll
        if update < _NEWTON_TOL:
            converged = True
            break

    if not converged:
        warnings.warn(
            f"Beta fit did not reach the Newton tolerance; returning the best "
            f"point found (alpha={a:.6g}, beta={b:.6g})",
            FitFallbackWarning,
            stacklevel=2,
        )
    return BetaParams(a, b)


def kl_beta(p1: BetaParams, p2: BetaParams) -> float:
    """KL divergence KL(Beta(p1) || Beta(p2)) in closed form.

    ln B(a2, b2) - ln B(a1, b1) + (a1 - a2) psi(a1) + (b1 - b2) psi(b1)
    + (a2 - a1 + b2 - b1) psi(a1 + b1).

    Always non-negative; tiny negative rounding residue is clipped to 0.
    """
    a1, b1 = p1.alpha, p1.beta
    a2, b2 = p2.alpha, p2.beta
    value = (
        float(betaln(a2, b2))
        - float(betaln(a1, b1))
        + (a1 - a2) * float(digamma(a1))
        + (b1 - b2) * float(digamma(b1))
        + (a2 - a1 + b2 - b1) * float(digamma(a1 + b1))
    )
    return max(0.0, value)


def drc_from_params(fitted: BetaParams | None, config: DrcConfig) -> DrcOutcome:
    """Evaluate the DRC for an already-fitted separability distribution.

    ``fitted=None`` means the fit itself failed and is reported as an
    improper-fit outcome.
    """
    if fitted is None:
        return DrcOutcome(None, DrcStatus.UNDEFINED_IMPROPER_FIT, None)
    t = config.properness_threshold
    if fitted.alpha <= t or fitted.beta <= t:
        return DrcOutcome(None, DrcStatus.UNDEFINED_IMPROPER_FIT, fitted)
    denominator = kl_beta(fitted, config.bm2)
    if denominator < ZERO_DENOMINATOR_GUARD:
        return DrcOutcome(None, DrcStatus.UNDEFINED_ZERO_DENOMINATOR, fitted)
    return DrcOutcome(kl_beta(fitted, config.bm1) / denominator, DrcStatus.COMPUTED, fitted)


def drc(probabilities, config: DrcConfig, clamp_eps: float = DEFAULT_CLAMP_EPS) -> DrcOutcome:
    """Fit the pooled probabilities and form the DRC against the benchmark
    priors.

    Fit failures (degenerate or too few values) and improper fits (a shape
    at or below the properness threshold) yield an undefined outcome rather
    than an error; a vanishing denominator (the fit coincides with benchmark
    prior 2) is reported separately.
    """
    try:
        fitted = fit_beta_mle(probabilities, clamp_eps)
    except (DegenerateVariance, TooFewValues):
        fitted = None
    return drc_from_params(fitted, config)


def verdict(outcome: DrcOutcome, config: DrcConfig) -> Verdict:
    """Turn a DRC outcome into a qualitative call.

    Undefined outcomes mean the domains were separable enough to break the
    fit.  Otherwise the value is compared against 1 with a symmetric caution
    band: inside the band the comparison is inconclusive.
    """
    if not outcome.is_defined:
        return Verdict.SEPARABLE
    if outcome.value < 1.0 - config.caution_band:
        return Verdict.REPRESENTATIVE
    if outcome.value > 1.0 + config.caution_band:
        return Verdict.NOT_REPRESENTATIVE
    return Verdict.CAUTION
