"""Adaptive Gauss-Kronrod quadrature over subintervals of (0, 1).

This is the numerical cross-check for the closed-form tail expectations, so
it deliberately shares nothing with them beyond quantile evaluation.  The
engine is a 7/15-point Gauss-Kronrod rule with greedy bisection of the
worst-error panel.  All Kronrod nodes are interior, so the integrand is
never sampled at panel endpoints; on top of that, when the requested range
touches 0 or 1 the variable changes p = u^2 (near 0) and p = 1 - u^2
(near 1) are applied, which tame the integrable ln(p/(1-p)) endpoint
singularities of metalog quantile functions.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .metalog import MetalogCoefficients, ProbLevel, quantile

__all__ = [
    "IntegrationResult",
    "ToleranceNotReachedError",
    "integrate",
    "cvar_numeric",
]

# 15-point Kronrod extension of 7-point Gauss-Legendre on [-1, 1].
# Positive abscissae; even indices are the embedded Gauss-7 nodes.
_XGK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node tables: [-x6, ..., -x0, 0, x0, ..., x6] ordering.
_XGK = np.concatenate((-_XGK_HALF[:-1], _XGK_HALF[::-1]))
_WGK = np.concatenate((_WGK_HALF[:-1], _WGK_HALF[::-1]))
_WG15 = np.zeros(15)
_WG15[1:-1:2] = np.concatenate((_WG_HALF[:-1], _WG_HALF[::-1]))

_DEFAULT_BUDGET = 1_000_000
_MIN_PANEL_WIDTH = 1e-15

# Substitution segments extend to these interior cut points.
_LEFT_CUT = 0.25
_RIGHT_CUT = 0.75


@dataclass(frozen=True)
class IntegrationResult:
    """Integral estimate with a conservative error bound and the eval count."""

    value: float
    abs_error_estimate: float
    evaluations: int


class ToleranceNotReachedError(RuntimeError):
    """Budget exhausted before the error estimate met the tolerance.

    The best estimate obtained so far is attached as ``result``.
    """

    def __init__(self, message: str, result: IntegrationResult):
        super().__init__(message)
        self.result = result


def _gk15(f, a: float, b: float):
    """One Gauss-Kronrod panel on [a, b]: (kronrod, |kronrod - gauss|)."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = f(center + half * _XGK)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (15,):
        raise ValueError("integrand must map a shape-(15,) array to the same shape")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"integrand returned a non-finite value on [{a}, {b}]")
    kron = half * float(y @ _WGK)
    gauss = half * float(y @ _WG15)
    return kron, abs(kron - gauss)


def _adaptive(f, a: float, b: float, tol: float, budget: int):
    """Greedy adaptive GK on one segment.  Returns (value, err, evals, ok).

    Panels live on a max-heap keyed by error estimate; the worst panel is
    bisected until the summed error meets ``tol``.  Panels that cannot be
    improved (width at the floating-point floor, or error already at
    rounding level) are retired to a frozen list so the remaining panels
    can still be refined.  ok=False means the evaluation budget ran out.
    """
    value, err = _gk15(f, a, b)
    evals = 15
    # heap entries: (-panel_err, tiebreak, a, b, panel_value)
    heap = [(-err, 0, a, b, value)]
    counter = 1
    frozen: list[tuple[float, float]] = []  # (value, err) of retired panels
    total_val = value
    total_err = err
    while total_err > tol and heap:
        neg_err, _, pa, pb, pval = heap[0]
        perr = -neg_err
        if (pb - pa) <= _MIN_PANEL_WIDTH or perr <= 1e-16 * (1.0 + abs(total_val)):
            heapq.heappop(heap)
            frozen.append((pval, perr))
            continue
        if evals + 30 > budget:
            return total_val, total_err, evals, False
        heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        v1, e1 = _gk15(f, pa, mid)
        v2, e2 = _gk15(f, mid, pb)
        evals += 30
        heapq.heappush(heap, (-e1, counter, pa, mid, v1))
        heapq.heappush(heap, (-e2, counter + 1, mid, pb, v2))
        counter += 2
        total_val += v1 + v2 - pval
        total_err += e1 + e2 - perr
        if counter % 512 == 0:
            # Rebuild the running sums so rounding drift in the incremental
            # updates cannot mask (or fake) convergence.
            total_val = math.fsum(e[4] for e in heap) + math.fsum(v for v, _ in frozen)
            total_err = math.fsum(-e[0] for e in heap) + math.fsum(e for _, e in frozen)
    total_val = math.fsum(e[4] for e in heap) + math.fsum(v for v, _ in frozen)
    total_err = math.fsum(-e[0] for e in heap) + math.fsum(e for _, e in frozen)
    return total_val, total_err, evals, True


def _wrap_left(f):
    """Integrand for p = u^2: contributes f(u^2) * 2u on the u-interval."""

    def g(u):
        return f(u * u) * (2.0 * u)

    return g


def _wrap_right(f):
    """Integrand for p = 1 - u^2, with a guard for u so small that 1 - u^2
    rounds to 1.0 exactly: there the factor 2u has already driven the
    product to zero for any integrable f, so the limit value 0 is used."""

    def g(u):
        p = 1.0 - u * u
        out = np.zeros_like(u)
        inside = p < 1.0
        if np.any(inside):
            out[inside] = f(p[inside]) * (2.0 * u[inside])
        return out

    return g


def integrate(f, lo: float, hi: float, tol: float,
              max_evals: int = _DEFAULT_BUDGET) -> IntegrationResult:
    """Integrate f over [lo, hi] inside [0, 1] to absolute tolerance tol.

    Parameters
    ----------
    f : callable
        Vectorized integrand: must accept a float64 ndarray of levels in
        (0, 1) and return an array of the same shape.  f is never called
        at 0 or 1.
    lo, hi : float
        Integration range with 0 <= lo < hi <= 1.  When lo == 0 or
        hi == 1, the corresponding endpoint region is integrated in the
        substituted variable (p = u^2, respectively p = 1 - u^2).
    tol : float
        Absolute error target for the summed estimate.
    max_evals : int, optional
        Total integrand evaluation budget, default 10**6.

    Raises
    ------
    ToleranceNotReachedError
        If the budget runs out first; the best estimate is attached.
    """
    lo = float(lo)
    hi = float(hi)
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError(f"need 0 <= lo < hi <= 1, got lo={lo}, hi={hi}")
    tol = float(tol)
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    max_evals = int(max_evals)

    # Plan segments: (wrapped integrand, left, right) in the working variable.
    segments = []
    direct_lo = lo
    direct_hi = hi
    if lo == 0.0:
        cut = min(_LEFT_CUT, hi)
        segments.append((_wrap_left(f), 0.0, math.sqrt(cut)))
        direct_lo = cut
    if hi == 1.0:
        cut = max(_RIGHT_CUT, lo)
        # p in [cut, 1] maps to u in [0, sqrt(1-cut)] with orientation
        # flipped by the substitution; the 2u factor keeps the sign right.
        segments.append((_wrap_right(f), 0.0, math.sqrt(1.0 - cut)))
        direct_hi = cut
    if direct_lo < direct_hi:
        segments.append((f, direct_lo, direct_hi))

    seg_tol = tol / len(segments)
    total_val = 0.0
    total_err = 0.0
    evals = 0
    ok = True
    for g, a, b in segments:
        v, e, used, seg_ok = _adaptive(g, a, b, seg_tol, max_evals - evals)
        total_val += v
        total_err += e
        evals += used
        ok = ok and seg_ok
    result = IntegrationResult(float(total_val), float(total_err), evals)
    if total_err > tol:
        reason = "evaluation budget exhausted" if not ok else "estimate stagnated"
        raise ToleranceNotReachedError(
            f"{reason}: error estimate {total_err:.3e} above tolerance "
            f"{tol:.3e} after {evals} evaluations",
            result,
        )
    return result


def cvar_numeric(c: MetalogCoefficients, alpha, tol: float = 1e-10,
                 max_evals: int = _DEFAULT_BUDGET) -> float:
    """Tail expectation (1-alpha)^{-1} * integral_alpha^1 M_n(p) dp by quadrature.

    Independent of the closed-form route: only the quantile evaluation is
    shared.  The integral is computed to absolute tolerance tol * (1-alpha)
    so the returned conditional expectation is accurate to about tol.
    """
    alpha = ProbLevel(alpha)
    res = integrate(lambda p: quantile(c, p), float(alpha), 1.0,
                    tol * (1.0 - alpha), max_evals)
    return res.value / (1.0 - alpha)
