"""Closed-form tail risk measures for metalog distributions.

For a feasible coefficient vector the conditional value-at-risk (CVaR,
also superquantile or expected shortfall) at level alpha is the tail
average of the quantile function,

    cvar(alpha) = (1-alpha)^{-1} * integral_alpha^1 M_n(p) dp,

and every basis term integrates in closed form, so CVaR is an explicit
finite expression in alpha and the coefficients: logarithms for the first
four terms, plain powers for odd-indexed terms, and a digamma /
hypergeometric combination for even-indexed terms from the sixth on.
First-order partial moments at a threshold w follow from CVaR evaluated at
alpha_w = F(w):

    upper = E[(X - w)^+] = (1 - alpha_w) (cvar(alpha_w) - w)
    lower = E[(w - X)^+] = w alpha_w - E[X] + (1 - alpha_w) cvar(alpha_w)

All formulas here are linear in the coefficient vector, which the tests
exploit heavily (translation, scaling, per-term decomposition).

Orientation note: with gains-convention data, the upper tail of X is the
favourable side.  For a loss-tail CVaR of gains, negate the coefficient
vector (X -> -X maps a_j -> -a_j with basis indices 3 and 4 swapped under
p -> 1-p symmetry; simplest is to fit the negated sample directly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._format import dumps as _dumps
from .metalog import MetalogCoefficients, ProbLevel, cdf, quantile
from .special import EULER_GAMMA, digamma_half_int, hyp2f1_special

__all__ = [
    "ALPHA_MAX",
    "CVaRBreakdown",
    "PartialMoments",
    "cvar",
    "cvar6_corollary",
    "mean",
    "mean_via_basis_integrals",
    "partial_moments",
    "upper_partial_moment",
    "lower_partial_moment",
    "upper_quantile_fn",
    "lower_quantile_fn",
    "risk_report",
    "risk_report_json",
]

#: Largest admissible CVaR level.  As alpha -> 1 the tail average tends to
#: the essential supremum, which is +inf whenever a_2 > 0; beyond this cap
#: the 1/(1-alpha) factors also lose all floating-point meaning.
ALPHA_MAX = 1.0 - 1e-9

_TWO_LN2 = 2.0 * math.log(2.0)
_LN2 = math.log(2.0)

# Width of the alpha = 1/2 window inside which the even-term bracket is
# dropped: the bracket piece is O(|alpha - 1/2|^{k+2}) with k >= 2, i.e.
# below 1e-24 inside the window, far under double rounding of the term.
_HALF_WINDOW = 1e-8


@dataclass(frozen=True)
class CVaRBreakdown:
    """CVaR value together with its per-coefficient contributions.

    ``total`` is the exact (fsum) sum of ``per_term``; term j is the full
    closed-form contribution of coefficient a_j, so dropping the last entry
    gives the CVaR of the truncated vector (a_1, ..., a_{n-1}).
    """

    total: float
    per_term: np.ndarray


@dataclass(frozen=True)
class PartialMoments:
    """First-order partial moments of X about ``threshold``.

    ``alpha_w`` is the CDF value actually used in the closed forms (the
    inverted level, capped at ALPHA_MAX).  ``upper`` is E[(X-w)^+], the
    expected exceedance; ``lower`` is E[(w-X)^+], the expected shortfall
    below w.  Both are clamped at zero from below (the closed forms can go
    negative by ~1e-12 through rounding).
    """

    threshold: float
    alpha_w: float
    upper: float
    lower: float


def _validate_alpha(alpha) -> float:
    alpha = float(ProbLevel(alpha))
    if alpha > ALPHA_MAX:
        raise ValueError(
            f"alpha must not exceed 1 - 1e-9 (got {alpha}); the alpha -> 1 "
            "limit is the essential supremum, which is unbounded whenever "
            "a_2 > 0"
        )
    return alpha


def _cvar_terms(a: np.ndarray, alpha: float) -> np.ndarray:
    """Per-coefficient closed-form contributions to CVaR at level alpha."""
    n = a.size
    log_a = math.log(alpha)
    log_1a = math.log1p(-alpha)
    log_ratio = log_a - log_1a          # ln(alpha / (1-alpha))
    tail = 1.0 - alpha
    d = alpha - 0.5

    out = np.empty(n)
    out[0] = a[0]
    # a2 ( -ln[(1-alpha) alpha^{alpha/(1-alpha)}] )
    out[1] = -a[1] * (log_1a + alpha / tail * log_a)
    if n >= 3:
        out[2] = 0.5 * a[2] * (alpha * log_ratio + 1.0)
    if n >= 4:
        out[3] = 0.5 * a[3] * alpha
    for j in range(5, n + 1):
        if j % 2:
            m = (j + 1) // 2
            out[j - 1] = a[j - 1] / tail * (2.0 / (j + 1)) * (0.5**m - d**m)
        else:
            k = j // 2 - 1
            b_k = digamma_half_int(k + 2) + EULER_GAMMA + _TWO_LN2
            lead = 0.5 ** (k + 1) / (k + 1) * b_k
            if abs(d) < _HALF_WINDOW:
                second = 0.0
            else:
                bracket = (
                    hyp2f1_special(k, -2.0 * d)
                    - hyp2f1_special(k, 2.0 * d)
                    + (k + 1) * log_ratio
                )
                second = d ** (k + 1) / (k + 1) ** 2 * bracket
            out[j - 1] = a[j - 1] / tail * (lead - second)
    return out


def cvar(c: MetalogCoefficients, alpha) -> CVaRBreakdown:
    """Conditional value-at-risk of the upper tail at level alpha.

    The closed form is an identity in the coefficients, so it is defined
    (and exact as an integral of M_n) for any vector, feasible or not; for
    infeasible vectors it no longer equals a conditional expectation of a
    real random variable.

    Parameters
    ----------
    c : MetalogCoefficients
    alpha : float
        Tail level in (0, 1 - 1e-9].

    Returns
    -------
    CVaRBreakdown
        Total plus the n per-coefficient contributions.
    """
    alpha = _validate_alpha(alpha)
    terms = _cvar_terms(c.a, alpha)
    terms.flags.writeable = False
    return CVaRBreakdown(total=math.fsum(terms), per_term=terms)


def cvar6_corollary(c: MetalogCoefficients, alpha) -> float:
    """CVaR for n = 6 via the hypergeometric-free six-term expression.

    Algebraically identical to ``cvar`` at n = 6, but the sixth term is
    written with elementary logarithms only:

        cvar_6 = cvar_5 - a_6/(1-alpha) * [ alpha ((alpha^2/3 - alpha/2
                 + 1/4) ln(alpha/(1-alpha)) + (alpha-1)/6) + ln(1-alpha)/12 ]

    Exists as an independent formulation purely to cross-check the general
    even-term path.
    """
    if c.n != 6:
        raise ValueError(f"this expression is specific to n = 6, got n = {c.n}")
    alpha = _validate_alpha(alpha)
    terms5 = _cvar_terms(c.a[:5], alpha)
    log_ratio = math.log(alpha) - math.log1p(-alpha)
    piece = alpha * (
        (alpha * alpha / 3.0 - alpha / 2.0 + 0.25) * log_ratio
        + (alpha - 1.0) / 6.0
    ) + math.log1p(-alpha) / 12.0
    return float(math.fsum(terms5) - c.a[5] / (1.0 - alpha) * piece)


def _harmonic(k: int) -> float:
    return math.fsum(1.0 / q for q in range(1, k + 1))


def _alt_harmonic(k: int) -> float:
    return math.fsum((-1.0) ** (q + 1) / q for q in range(1, k + 1))


def mean(c: MetalogCoefficients) -> float:
    """E[X] as the alpha -> 0 limit of the closed-form CVaR.

    Term by term: a_1 survives whole, a_2 and a_4 integrate to zero by
    symmetry, a_3 contributes a_3/2, odd terms keep their power expression
    at d = -1/2, and for even terms the divergent pieces of the
    hypergeometric bracket cancel against (k+1) ln(alpha/(1-alpha)),
    leaving the finite limit

        L0(k) = -(k+1) (ln 2 + H_k + A_k),
        A_k   = (-1)^k (ln 2 - sum_{q<=k} (-1)^{q+1}/q),

    so the even term becomes
        0.5^{k+1}/(k+1) * (psi(1+k/2) + gamma + 2 ln 2)
        - (-0.5)^{k+1}/(k+1)^2 * L0(k).
    """
    a = c.a
    n = c.n
    terms = [float(a[0])]
    if n >= 3:
        terms.append(0.5 * a[2])
    for j in range(5, n + 1):
        if j % 2:
            m = (j + 1) // 2
            terms.append(a[j - 1] * (2.0 / (j + 1)) * (0.5**m - (-0.5) ** m))
        else:
            k = j // 2 - 1
            b_k = digamma_half_int(k + 2) + EULER_GAMMA + _TWO_LN2
            a_k = (-1.0) ** k * (_LN2 - _alt_harmonic(k))
            l0 = -(k + 1) * (_LN2 + _harmonic(k) + a_k)
            terms.append(
                a[j - 1]
                * (0.5 ** (k + 1) / (k + 1) * b_k - (-0.5) ** (k + 1) / (k + 1) ** 2 * l0)
            )
    return math.fsum(terms)


def _basis_integral(j: int) -> float:
    """integral_0^1 g_j(p) dp in closed form."""
    if j == 1:
        return 1.0
    if j in (2, 4):
        return 0.0
    if j == 3:
        return 0.5
    if j % 2:
        m = (j + 1) // 2
        return (2.0 / (j + 1)) * (0.5**m - (-0.5) ** m)
    k = j // 2 - 1
    if k % 2 == 0:
        # r^k ln(p/(1-p)) is odd about p = 1/2 for even k.
        return 0.0
    return (_harmonic(k + 1) + _alt_harmonic(k + 1)) / (2.0**k * (k + 1))


def mean_via_basis_integrals(c: MetalogCoefficients) -> float:
    """E[X] as sum_j a_j * integral_0^1 g_j(p) dp.

    A second, independently derived route to the mean (direct term
    integrals instead of the CVaR limit); the two must agree to rounding
    and are cross-checked in the test suite.
    """
    return math.fsum(a_j * _basis_integral(j) for j, a_j in enumerate(c.a, start=1))


def partial_moments(c: MetalogCoefficients, w: float) -> PartialMoments:
    """Both first-order partial moments of X about the threshold w.

    Requires a feasible vector: the CDF inversion assumes a monotone
    quantile function.  The inverted level is capped at ALPHA_MAX before
    entering the CVaR closed form, which distorts the moments by at most
    the mass beyond the cap (about 1e-9 times the local quantile scale).
    """
    w = float(w)
    if not math.isfinite(w):
        raise ValueError(f"threshold must be finite, got {w}")
    alpha_w = min(float(cdf(c, w)), ALPHA_MAX)
    tail = 1.0 - alpha_w
    q_bar = cvar(c, alpha_w).total
    upper = tail * (q_bar - w)
    lower = w * alpha_w - mean(c) + tail * q_bar
    return PartialMoments(
        threshold=w,
        alpha_w=alpha_w,
        upper=max(upper, 0.0),
        lower=max(lower, 0.0),
    )


def upper_partial_moment(c: MetalogCoefficients, w: float) -> float:
    """E[(X - w)^+], the expected exceedance above w."""
    return partial_moments(c, w).upper


def lower_partial_moment(c: MetalogCoefficients, w: float) -> float:
    """E[(w - X)^+], the expected shortfall below w."""
    return partial_moments(c, w).lower


def upper_quantile_fn(c: MetalogCoefficients, w: float, p):
    """max(M_n(p) - w, 0): integrating this over (0,1) gives the upper
    partial moment.  Convex in the coefficient vector for every fixed p."""
    return np.maximum(quantile(c, p) - w, 0.0)


def lower_quantile_fn(c: MetalogCoefficients, w: float, p):
    """max(w - M_n(p), 0): integrand form of the lower partial moment."""
    return np.maximum(w - quantile(c, p), 0.0)


def risk_report(c: MetalogCoefficients, alphas, thresholds=()) -> dict:
    """Assemble the standard risk summary as a plain dict.

    Key order is fixed (alpha, var, cvar, mean, partial_moments) so that
    serialized reports are stable.
    """
    levels = [_validate_alpha(a) for a in alphas]
    if not levels:
        raise ValueError("need at least one alpha level")
    moments = []
    for w in thresholds:
        pm = partial_moments(c, w)
        moments.append({"w": float(w), "upper": pm.upper, "lower": pm.lower})
    return {
        "alpha": [float(a) for a in levels],
        "var": [quantile(c, a) for a in levels],
        "cvar": [cvar(c, a).total for a in levels],
        "mean": mean(c),
        "partial_moments": moments,
    }


def risk_report_json(c: MetalogCoefficients, alphas, thresholds=()) -> str:
    """The risk summary serialized deterministically (17-digit reals)."""
    return _dumps(risk_report(c, alphas, thresholds))
