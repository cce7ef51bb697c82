"""Metalog distribution core.

A metalog distribution is parameterized directly in quantile space: the
quantile function is a linear combination

    M_n(p) = sum_{j=1}^{n} a_j g_j(p),   0 < p < 1,

of logistic-flavoured basis functions (see ``basis_term``).  Not every
coefficient vector yields a valid distribution; the vector is *feasible*
exactly when M_n is strictly increasing, i.e. the quantile density
dM_n/dp stays positive on (0, 1).  This module provides evaluation of the
quantile function and its density, the numerically inverted CDF, a grid
feasibility check, and JSON persistence of coefficient vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._format import dumps as _dumps
from ._kernels import metalog_eval, metalog_deriv

__all__ = [
    "MAX_TERMS",
    "ProbLevel",
    "MetalogCoefficients",
    "InfeasibleError",
    "FeasibilityReport",
    "basis_term",
    "basis_matrix",
    "quantile",
    "quantile_density",
    "pdf_at_level",
    "cdf",
    "is_feasible",
]

#: Largest supported number of terms.  Fitting beyond this is numerically
#: pointless: the basis functions become nearly collinear and the design
#: matrix condition number explodes.
MAX_TERMS = 32

_CDF_EPS = 1e-12
_CDF_WIDTH_TOL = 1e-14
_CDF_RESIDUAL_TOL = 1e-10


class InfeasibleError(ValueError):
    """The coefficient vector does not define an increasing quantile function."""


class ProbLevel(float):
    """A probability strictly inside (0, 1).

    Subclasses float so instances participate in arithmetic directly; the
    open-interval constraint is enforced once, at construction (NaN is
    rejected too, since it fails the comparison).
    """

    __slots__ = ()

    def __new__(cls, p) -> "ProbLevel":
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ValueError(f"probability level must lie strictly in (0, 1), got {p}")
        return super().__new__(cls, p)


@dataclass(frozen=True, eq=False)
class MetalogCoefficients:
    """Immutable coefficient vector (a_1, ..., a_n), n >= 2.

    The vector is stored as a read-only float64 array.  Feasibility is *not*
    checked at construction: infeasible vectors are legitimate objects (they
    arise from unconstrained fits) and are only rejected by the operations
    that genuinely require an increasing quantile function.
    """

    a: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.a, dtype=np.float64, copy=True).reshape(-1)
        if arr.size < 2:
            raise ValueError(f"a metalog needs at least 2 coefficients, got {arr.size}")
        if arr.size > MAX_TERMS:
            raise ValueError(
                f"at most {MAX_TERMS} coefficients are supported, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must all be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "a", arr)

    @property
    def n(self) -> int:
        return int(self.a.size)

    def to_dict(self) -> dict:
        return {"n": self.n, "a": [float(x) for x in self.a]}

    @classmethod
    def from_dict(cls, data: dict) -> "MetalogCoefficients":
        if not isinstance(data, dict) or "n" not in data or "a" not in data:
            raise ValueError('coefficient JSON must be an object with "n" and "a"')
        n, a = data["n"], data["a"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ValueError(f'"n" must be an integer, got {n!r}')
        if not isinstance(a, list):
            raise ValueError('"a" must be a list of reals')
        if len(a) != n:
            raise ValueError(f'"n" is {n} but "a" has {len(a)} entries')
        try:
            values = [float(x) for x in a]
        except (TypeError, ValueError) as exc:
            raise ValueError(f'"a" must contain only reals: {exc}') from None
        return cls(np.asarray(values))

    def to_json(self) -> str:
        """Serialize as {"n": ..., "a": [...]} with 17-significant-digit reals.

        17 decimal digits uniquely identify a double, so a dump/load cycle
        reproduces the coefficients bit-exactly.
        """
        return _dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MetalogCoefficients":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid coefficient JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a grid feasibility scan.

    ``p_min`` is the grid point where the quantile density was smallest and
    ``density_min`` the value there; together they locate where an
    infeasible vector first folds back.
    """

    feasible: bool
    p_min: float
    density_min: float

    def __bool__(self) -> bool:
        return self.feasible


def basis_term(j: int, p) -> float:
    """The j-th metalog basis function g_j evaluated at level p.

    With t = ln(p/(1-p)) and r = p - 1/2:

        g_1 = 1, g_2 = t, g_3 = r t, g_4 = r,
        g_j = r^((j-1)/2)      for odd  j >= 5,
        g_j = r^(j/2 - 1) t    for even j >= 6.
    """
    j = int(j)
    if j < 1:
        raise ValueError(f"basis index must be >= 1, got {j}")
    p = ProbLevel(p)
    r = p - 0.5
    if j == 1:
        return 1.0
    t = math.log(p / (1.0 - p))
    if j == 2:
        return t
    if j == 3:
        return r * t
    if j == 4:
        return r
    e = (j - 1) // 2
    return r**e if j % 2 else r**e * t


def basis_matrix(p, n: int) -> np.ndarray:
    """Design matrix Y with Y[i, j-1] = g_j(p[i]), shape (len(p), n)."""
    n = int(n)
    if n < 2:
        raise ValueError(f"need n >= 2 basis terms, got {n}")
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.size and not (p.min() > 0.0 and p.max() < 1.0):
        raise ValueError("all probability levels must lie strictly in (0, 1)")
    t = np.log(p / (1.0 - p))
    r = p - 0.5
    cols = [np.ones_like(p), t]
    if n >= 3:
        cols.append(r * t)
    if n >= 4:
        cols.append(r)
    for j in range(5, n + 1):
        e = (j - 1) // 2
        cols.append(r**e if j % 2 else r**e * t)
    return np.column_stack(cols)


def _levels_array(p):
    """Common scalar/array handling: returns (flat array, scalar flag, shape)."""
    arr = np.asarray(p, dtype=np.float64)
    scalar = arr.ndim == 0
    flat = np.ascontiguousarray(arr.reshape(-1))
    if flat.size == 0:
        raise ValueError("need at least one probability level")
    if not (flat.min() > 0.0 and flat.max() < 1.0):
        raise ValueError("all probability levels must lie strictly in (0, 1)")
    return flat, scalar, arr.shape


def quantile(c: MetalogCoefficients, p):
    """Quantile M_n(p); accepts a scalar level or an array of levels."""
    flat, scalar, shape = _levels_array(p)
    out = metalog_eval(c.a, flat)
    return float(out[0]) if scalar else out.reshape(shape)


def quantile_density(c: MetalogCoefficients, p):
    """Quantile density dM_n/dp; positive everywhere iff c is feasible."""
    flat, scalar, shape = _levels_array(p)
    out = metalog_deriv(c.a, flat)
    return float(out[0]) if scalar else out.reshape(shape)


def pdf_at_level(c: MetalogCoefficients, p):
    """Density of the distribution at the point x = M_n(p).

    The metalog density in x-space is available in closed form only along
    the quantile parameterization: f(M_n(p)) = 1 / M_n'(p).
    """
    d = quantile_density(c, p)
    if np.any(np.asarray(d) <= 0.0):
        raise InfeasibleError(
            "quantile density is not positive at the requested level(s); "
            "the coefficient vector is infeasible there"
        )
    return 1.0 / d


def cdf(c: MetalogCoefficients, x: float) -> ProbLevel:
    """Numerically inverted quantile function.

    Returns the level p with M_n(p) = x, clamped into
    [1e-12, 1 - 1e-12]; x at or beyond the quantile values of those
    endpoints maps to the endpoint itself.  Bisection runs until the
    residual satisfies |M_n(p) - x| <= 1e-10 (1 + |x|) or the bracket
    width falls below 1e-14, then one Newton step is attempted as a
    polish and kept only if it reduces the residual.

    Raises
    ------
    InfeasibleError
        If a monotonicity violation is detected during the search (the
        midpoint quantile leaving the bracket's value range).
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    lo, hi = _CDF_EPS, 1.0 - _CDF_EPS
    q_lo = quantile(c, lo)
    q_hi = quantile(c, hi)
    if not q_lo < q_hi:
        raise InfeasibleError(
            "quantile function is non-increasing between the clamp endpoints"
        )
    if x <= q_lo:
        return ProbLevel(lo)
    if x >= q_hi:
        return ProbLevel(hi)

    residual_tol = _CDF_RESIDUAL_TOL * (1.0 + abs(x))
    p = 0.5 * (lo + hi)
    while hi - lo > _CDF_WIDTH_TOL:
        p = 0.5 * (lo + hi)
        q_mid = quantile(c, p)
        slack = 1e-12 * (1.0 + abs(q_mid))
        if q_mid < q_lo - slack or q_mid > q_hi + slack:
            raise InfeasibleError(
                f"quantile function is not monotone near p = {p:.6g}"
            )
        if abs(q_mid - x) <= residual_tol:
            break
        if q_mid < x:
            lo, q_lo = p, q_mid
        else:
            hi, q_hi = p, q_mid

    # One Newton polish, accepted only on improvement.
    d = quantile_density(c, p)
    if d > 0.0:
        p_new = p - (quantile(c, p) - x) / d
        if _CDF_EPS <= p_new <= 1.0 - _CDF_EPS and abs(
            quantile(c, p_new) - x
        ) < abs(quantile(c, p) - x):
            p = p_new
    return ProbLevel(min(max(p, _CDF_EPS), 1.0 - _CDF_EPS))


def is_feasible(c: MetalogCoefficients, grid_size: int = 1000) -> FeasibilityReport:
    """Grid check that the quantile density is positive on (0, 1).

    The density is evaluated on ``grid_size`` Chebyshev-spaced points (which
    cluster towards both endpoints, where metalog densities first go
    negative) plus the near-boundary points 1e-9 and 1 - 1e-9.  This is a
    sampling check: a vector passing it can still dip negative between grid
    points, but for the node counts enforced here that requires contrived
    coefficients.

    Parameters
    ----------
    c : MetalogCoefficients
    grid_size : int, optional
        Number of Chebyshev nodes, at least 100.
    """
    grid_size = int(grid_size)
    if grid_size < 100:
        raise ValueError(f"grid_size must be at least 100, got {grid_size}")
    i = np.arange(1, grid_size + 1, dtype=np.float64)
    nodes = 0.5 - 0.5 * np.cos(np.pi * (2.0 * i - 1.0) / (2.0 * grid_size))
    p = np.concatenate(([1e-9], nodes, [1.0 - 1e-9]))
    d = quantile_density(c, p)
    idx = int(np.argmin(d))
    return FeasibilityReport(
        feasible=bool(d[idx] > 0.0),
        p_min=float(p[idx]),
        density_min=float(d[idx]),
    )
