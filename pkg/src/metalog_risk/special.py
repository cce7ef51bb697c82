"""Special-function helpers for the closed-form tail expectations.

Only the exact argument patterns that the superquantile formulas need are
implemented here: the digamma function at positive integer and half-integer
points, where it collapses to finite harmonic sums, and the Gauss
hypergeometric function in the pattern 2F1(1, k+1; k+2, z) for integer
k >= 1, where it reduces to elementary logarithms.  Nothing in this module
is a general-purpose special-function evaluator.
"""

from __future__ import annotations

import math
import operator

__all__ = [
    "EULER_GAMMA",
    "euler_gamma",
    "digamma_half_int",
    "hyp2f1_special",
    "bracket_at_half",
]

#: Euler-Mascheroni constant, the double nearest to 0.57721566490153286...
EULER_GAMMA = 0.5772156649015329

_TWO_LN2 = 2.0 * math.log(2.0)

# The elementary log reduction of 2F1 subtracts the leading terms of
# ln(1 - z) against a polynomial; it is only used when the estimated
# cancellation keeps at least ~13 significant digits.
_REDUCTION_MAX_RELERR = 1e-13
_SERIES_CUTOFF = 0.05
_SERIES_MAX_TERMS = 2_000_000


def euler_gamma() -> float:
    """The Euler-Mascheroni constant gamma = lim_n (H_n - ln n)."""
    return EULER_GAMMA


def digamma_half_int(twice_value: int) -> float:
    """Digamma psi(x) at x = twice_value / 2.

    Arguments restricted to positive integers and half-integers admit exact
    finite forms,

        psi(m)       = -gamma + sum_{j=1}^{m-1} 1/j
        psi(m + 1/2) = -gamma - 2 ln 2 + 2 sum_{j=1}^{m} 1/(2j - 1)

    so the only error is the final rounding of the sum.

    Parameters
    ----------
    twice_value : int
        Twice the digamma argument; must be >= 1.  Even values give integer
        arguments, odd values half-integer ones.
    """
    twice_value = operator.index(twice_value)
    if twice_value < 1:
        raise ValueError(f"twice_value must be a positive integer, got {twice_value}")
    if twice_value % 2 == 0:
        m = twice_value // 2
        return -EULER_GAMMA + math.fsum(1.0 / j for j in range(1, m))
    m = (twice_value - 1) // 2
    return -EULER_GAMMA - _TWO_LN2 + 2.0 * math.fsum(
        1.0 / (2 * j - 1) for j in range(1, m + 1)
    )


def _gauss_series(k: int, z: float) -> float:
    # 2F1(1, k+1; k+2; z) = (k+1) sum_{j>=0} z^j / (k+1+j).  Terms decay
    # geometrically with ratio |z|; the stopping rule bounds the omitted
    # tail by the geometric envelope, not just the last term.
    m = float(k + 1)
    acc = 1.0
    zj = 1.0
    tail_factor = 1.0 / max(1.0 - abs(z), 1e-9)
    for j in range(1, _SERIES_MAX_TERMS):
        zj *= z
        term = m / (m + j) * zj
        acc += term
        if abs(term) * tail_factor <= 1e-17 * abs(acc):
            return acc
    raise ArithmeticError(
        f"hypergeometric series did not converge for k={k}, z={z}"
    )


def hyp2f1_special(k: int, z: float) -> float:
    """Gauss hypergeometric 2F1(1, k+1; k+2; z) for integer k >= 1.

    Two evaluation routes are used.  Near the origin the defining series

        (k+1) sum_{j>=0} z^j / (k+1+j)

    converges in a handful of terms.  Away from the origin the function
    reduces to elementary operations: with m = k+1,

        2F1(1, m; m+1; z) = -m z^{-m} (ln(1-z) + sum_{q=1}^{m-1} z^q / q).

    The reduction cancels ln(1-z) against the polynomial head, which for
    small |z| and large k destroys precision, so the implementation
    estimates the cancellation and falls back to the series whenever the
    reduction would keep fewer than ~13 significant digits.  (The fallback
    only triggers at moderate |z|, where the series is still cheap.)

    Parameters
    ----------
    k : int
        Integer parameter, k >= 1.
    z : float
        Argument in [-1, 1).  The value at z = -1 is the convergent
        alternating boundary case; z >= 1 is outside the disc of
        convergence and rejected.
    """
    k = operator.index(k)
    if k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k}")
    z = float(z)
    if not -1.0 <= z < 1.0:
        raise ValueError(f"z must lie in [-1, 1), got {z}")
    if z == 0.0:
        return 1.0
    if abs(z) < _SERIES_CUTOFF:
        return _gauss_series(k, z)

    m = k + 1
    log_term = math.log1p(-z)
    head = 0.0
    head_abs = 0.0
    zq = 1.0
    for q in range(1, m):
        zq *= z
        t = zq / q
        head += t
        head_abs += abs(t)
    s = log_term + head
    cancellation = (abs(log_term) + head_abs) * 2.3e-16
    if s != 0.0 and cancellation <= _REDUCTION_MAX_RELERR * abs(s):
        return -m * z ** (-m) * s
    return _gauss_series(k, z)


def bracket_at_half(k: int) -> float:
    """Finite value of the even-term hypergeometric bracket at r = 1/2.

    The combination

        2F1(1, k+1; k+2; -2r) - 2F1(1, k+1; k+2; 2r) + (k+1) ln((1+2r)/(1-2r))

    has divergent pieces as r -> 1/2, but their sum tends to the finite
    limit (k+1) (psi(1 + k/2) + gamma + 2 ln 2), which is what this
    returns.  Used by the even-order tail terms at alpha = 0 and 1/2.
    """
    k = operator.index(k)
    if k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k}")
    return (k + 1) * (digamma_half_int(k + 2) + EULER_GAMMA + _TWO_LN2)
