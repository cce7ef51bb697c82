"""Least-squares fitting of metalog coefficients to quantile data.

Given m observed quantile pairs (p_i, x_i), the coefficients solve

    min_a || Y a - x ||_2,    Y[i, j-1] = g_j(p_i),

an ordinary linear least-squares problem in the basis-function design
matrix.  The solve goes through a QR factorization; forming the normal
equations Y'Y would square the condition number, which for metalog bases
beyond a handful of terms is already painful.

Fits are unconstrained: nothing forces the solution to be a feasible
(strictly increasing) metalog, so the result carries a feasibility verdict
rather than hiding the problem.  Callers who need a feasible distribution
can reject (or re-fit with fewer terms) based on that flag.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .metalog import MetalogCoefficients, ProbLevel, basis_matrix, is_feasible

__all__ = [
    "COND_WARN_THRESHOLD",
    "QuantilePoint",
    "FitResult",
    "RankDeficiencyError",
    "CsvFormatError",
    "fit",
    "read_quantile_csv",
]

#: Design-matrix condition number above which the fit is flagged: the
#: solution is still returned, but trailing digits are garbage.
COND_WARN_THRESHOLD = 1e10

_FEASIBILITY_GRID = 1000


class RankDeficiencyError(ValueError):
    """Design matrix is numerically rank deficient.

    ``rank`` holds the numerical rank found (< number of coefficients).
    """

    def __init__(self, rank: int, n: int):
        super().__init__(
            f"design matrix is rank deficient: numerical rank {rank} < n = {n}; "
            "the probability levels do not determine that many coefficients"
        )
        self.rank = rank


class CsvFormatError(ValueError):
    """Malformed quantile CSV; the message carries the offending line number."""


@dataclass(frozen=True)
class QuantilePoint:
    """One observed quantile pair: level p in (0, 1), value x."""

    p: float
    x: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", float(ProbLevel(self.p)))
        x = float(self.x)
        if not math.isfinite(x):
            raise ValueError(f"quantile value must be finite, got {x}")
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a least-squares fit.

    ``residual_norm`` is || Y a - x ||_2 at the solution.  ``feasible`` is
    the grid feasibility verdict for the fitted vector.
    ``condition_warning`` is set when cond(Y) exceeded COND_WARN_THRESHOLD.
    """

    coefficients: MetalogCoefficients
    residual_norm: float
    feasible: bool
    condition_warning: bool

    def to_dict(self) -> dict:
        d = self.coefficients.to_dict()
        d["residual_norm"] = self.residual_norm
        d["feasible"] = self.feasible
        d["condition_warning"] = self.condition_warning
        return d


def _back_substitute(r: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = y.size
    out = np.zeros(n)
    for i in range(n - 1, -1, -1):
        out[i] = (y[i] - r[i, i + 1 :] @ out[i + 1 :]) / r[i, i]
    return out


def fit(points, n: int) -> FitResult:
    """Least-squares metalog coefficients from quantile data.

    Parameters
    ----------
    points : sequence of QuantilePoint
        At least n points with pairwise distinct levels.
    n : int
        Number of coefficients to fit, 2 <= n <= 32.

    Raises
    ------
    ValueError
        Fewer than n points, or duplicate probability levels.
    RankDeficiencyError
        Design matrix numerically rank deficient (levels too clustered
        for the requested n).
    """
    points = list(points)
    n = int(n)
    if n < 2:
        raise ValueError(f"need n >= 2 coefficients, got {n}")
    m = len(points)
    if m < n:
        raise ValueError(f"need at least n points for an n-term fit: m = {m} < n = {n}")
    p = np.array([pt.p for pt in points], dtype=np.float64)
    x = np.array([pt.x for pt in points], dtype=np.float64)
    if np.unique(p).size < m:
        raise ValueError("duplicate probability levels in the data")

    design = basis_matrix(p, n)
    rank = int(np.linalg.matrix_rank(design))
    if rank < n:
        raise RankDeficiencyError(rank, n)
    cond = float(np.linalg.cond(design))

    q, r = np.linalg.qr(design, mode="reduced")
    coef = _back_substitute(r, q.T @ x)
    residual = float(np.linalg.norm(design @ coef - x))

    c = MetalogCoefficients(coef)
    verdict = is_feasible(c, _FEASIBILITY_GRID)
    return FitResult(
        coefficients=c,
        residual_norm=residual,
        feasible=bool(verdict.feasible),
        condition_warning=cond > COND_WARN_THRESHOLD,
    )


def read_quantile_csv(source) -> list[QuantilePoint]:
    """Parse quantile data from CSV with header ``p,x``.

    ``source`` is a path or an open text stream.  Each data row holds two
    decimal-dot reals; rows with p outside (0, 1) are rejected.  Blank
    lines are ignored.  All format errors raise CsvFormatError with the
    1-based line number.
    """
    if hasattr(source, "read"):
        return _parse_csv(source, getattr(source, "name", "<stream>"))
    with open(os.fspath(source), "r", encoding="utf-8", newline="") as handle:
        return _parse_csv(handle, os.fspath(source))


def _parse_csv(handle, name: str) -> list[QuantilePoint]:
    reader = csv.reader(handle)
    points: list[QuantilePoint] = []
    header_seen = False
    for line_no, row in enumerate(reader, start=1):
        cells = [cell.strip() for cell in row]
        if not cells or all(cell == "" for cell in cells):
            continue
        if not header_seen:
            if cells != ["p", "x"]:
                raise CsvFormatError(
                    f"{name}: line {line_no}: expected header 'p,x', got {','.join(cells)!r}"
                )
            header_seen = True
            continue
        if len(cells) != 2:
            raise CsvFormatError(
                f"{name}: line {line_no}: expected 2 fields, got {len(cells)}"
            )
        try:
            p_val = float(cells[0])
            x_val = float(cells[1])
        except ValueError:
            raise CsvFormatError(
                f"{name}: line {line_no}: fields must be decimal reals, "
                f"got {cells[0]!r}, {cells[1]!r}"
            ) from None
        try:
            points.append(QuantilePoint(p_val, x_val))
        except ValueError as exc:
            raise CsvFormatError(f"{name}: line {line_no}: {exc}") from None
    if not header_seen:
        raise CsvFormatError(f"{name}: line 1: empty file, expected header 'p,x'")
    return points
