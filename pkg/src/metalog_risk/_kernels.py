"""Hot evaluation loops: metalog quantile and quantile density over arrays.

Two interchangeable implementations exist.  When numba is importable the
compiled loops are bound to ``metalog_eval`` / ``metalog_deriv``; otherwise,
or when the environment variable ``METALOG_RISK_DISABLE_NUMBA`` is set to a
non-empty value other than ``0``, the vectorised numpy versions are used.
Both are exposed unconditionally (the numba pair is ``None`` when absent) so
benchmarks and parity tests can compare them directly.

Basis recap for coefficient index j (1-based), with t = ln(p/(1-p)) and
r = p - 1/2:

    g1 = 1, g2 = t, g3 = r t, g4 = r,
    g_j = r^e        for odd  j >= 5,
    g_j = r^e t      for even j >= 6,       e = (j - 1) // 2.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "metalog_eval",
    "metalog_deriv",
    "metalog_eval_numpy",
    "metalog_deriv_numpy",
    "metalog_eval_numba",
    "metalog_deriv_numba",
]


def _numba_disabled() -> bool:
    return os.environ.get("METALOG_RISK_DISABLE_NUMBA", "").strip() not in ("", "0")


def metalog_eval_numpy(a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Quantile values M_n(p) for every entry of p, 0 < p < 1."""
    t = np.log(p / (1.0 - p))
    r = p - 0.5
    n = a.shape[0]
    out = a[0] + a[1] * t
    if n >= 3:
        out = out + a[2] * (r * t)
    if n >= 4:
        out = out + a[3] * r
    if n >= 5:
        rp = r * r
        e = 2
        for j in range(5, n + 1):
            if (j - 1) // 2 != e:
                rp = rp * r
                e += 1
            out = out + (a[j - 1] * rp if j % 2 else a[j - 1] * (rp * t))
    return out


def metalog_deriv_numpy(a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Quantile density dM_n/dp for every entry of p, 0 < p < 1."""
    t = np.log(p / (1.0 - p))
    u = 1.0 / (p * (1.0 - p))
    r = p - 0.5
    n = a.shape[0]
    out = a[1] * u
    if n >= 3:
        out = out + a[2] * (t + r * u)
    if n >= 4:
        out = out + a[3]
    if n >= 5:
        rpm1 = r  # r^(e-1)
        e = 2
        for j in range(5, n + 1):
            if (j - 1) // 2 != e:
                rpm1 = rpm1 * r
                e += 1
            if j % 2:
                out = out + a[j - 1] * (e * rpm1)
            else:
                out = out + a[j - 1] * (e * rpm1 * t + (rpm1 * r) * u)
    return out


metalog_eval_numba = None
metalog_deriv_numba = None
_njit = None

if not _numba_disabled():
    try:
        from numba import njit as _njit
    except ImportError:
        _njit = None

if _njit is not None:

    @_njit(cache=True)
    def _eval_nb(a, p):  # pragma: no cover - exercised via parity tests
        n = a.shape[0]
        out = np.empty(p.shape[0])
        for i in range(p.shape[0]):
            pi = p[i]
            t = np.log(pi / (1.0 - pi))
            r = pi - 0.5
            acc = a[0] + a[1] * t
            if n >= 3:
                acc += a[2] * r * t
            if n >= 4:
                acc += a[3] * r
            if n >= 5:
                rp = r * r
                e = 2
                for j in range(5, n + 1):
                    if (j - 1) // 2 != e:
                        rp *= r
                        e += 1
                    if j % 2:
                        acc += a[j - 1] * rp
                    else:
                        acc += a[j - 1] * rp * t
            out[i] = acc
        return out

    @_njit(cache=True)
    def _deriv_nb(a, p):  # pragma: no cover - exercised via parity tests
        n = a.shape[0]
        out = np.empty(p.shape[0])
        for i in range(p.shape[0]):
            pi = p[i]
            t = np.log(pi / (1.0 - pi))
            u = 1.0 / (pi * (1.0 - pi))
            r = pi - 0.5
            acc = a[1] * u
            if n >= 3:
                acc += a[2] * (t + r * u)
            if n >= 4:
                acc += a[3]
            if n >= 5:
                rpm1 = r
                e = 2
                for j in range(5, n + 1):
                    if (j - 1) // 2 != e:
                        rpm1 *= r
                        e += 1
                    if j % 2:
                        acc += a[j - 1] * e * rpm1
                    else:
                        acc += a[j - 1] * (e * rpm1 * t + rpm1 * r * u)
            out[i] = acc
        return out

    metalog_eval_numba = _eval_nb
    metalog_deriv_numba = _deriv_nb

USING_NUMBA = metalog_eval_numba is not None

if USING_NUMBA:
    metalog_eval = metalog_eval_numba
    metalog_deriv = metalog_deriv_numba
else:
    metalog_eval = metalog_eval_numpy
    metalog_deriv = metalog_deriv_numpy
