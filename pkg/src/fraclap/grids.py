"""Interval domains, order classification, and uniformly sampled functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ArgumentError, SupportError


class Regime(Enum):
    """Which branch of the order axis a given s falls into."""

    NEGATIVE = "negative"      # -1 < s < 0
    ZERO_ONE = "zero-one"      # 0 < s < 1
    REDUCED = "reduced"        # s > 1, s not an integer
    INTEGER = "integer"        # s in {0, 1, 2, ...}
    INVALID = "invalid"        # s <= -1 (or non-finite)


def classify_order(s: float) -> Regime:
    """Pure classification of the order s."""
    if not math.isfinite(s) or s <= -1.0:
        return Regime.INVALID
    if s >= 0.0 and float(s).is_integer():
        return Regime.INTEGER
    if s < 0.0:
        return Regime.NEGATIVE
    if s < 1.0:
        return Regime.ZERO_ONE
    return Regime.REDUCED


@dataclass(frozen=True, eq=False)
class FractionalOrder:
    """Real order s together with its regime and reduction index."""

    s: float

    @property
    def regime(self) -> Regime:
        return classify_order(self.s)

    @property
    def k(self) -> Optional[int]:
        """Reduction index floor((s-1)/2); populated only above order 1."""
        if self.regime is Regime.REDUCED:
            return int(math.floor((self.s - 1.0) / 2.0))
        return None

    @property
    def sigma(self) -> Optional[float]:
        """For negative orders, sigma = -s in (0, 1)."""
        if self.regime is Regime.NEGATIVE:
            return -self.s
        return None

    def require_valid(self) -> "FractionalOrder":
        if self.regime is Regime.INVALID:
            raise ArgumentError(f"order s={self.s} out of range; need s > -1")
        return self


@dataclass(frozen=True, eq=False)
class IntervalDomain:
    """Bounded interval (a, b) with a dilation factor alpha >= 1.

    The dilated interval keeps the center of (a, b) and has length
    alpha*(b - a), so that growing alpha exhausts the whole line.  The
    zero-boundary eigenpairs of the dilated interval are

        lambda_j = (j pi / (alpha (b-a)))^2,
        phi_j(x) = sqrt(2 / (alpha (b-a))) sin(j pi (x - left) / (alpha (b-a))),

    with phi_j == 0 outside the dilated interval.
    """

    a: float
    b: float
    alpha: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise ArgumentError(f"invalid interval ({self.a}, {self.b})")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ArgumentError(f"invalid dilation alpha={self.alpha}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def dilated_length(self) -> float:
        return self.alpha * self.length

    @property
    def dilated_bounds(self) -> Tuple[float, float]:
        half = 0.5 * self.dilated_length
        return self.center - half, self.center + half

    def dilate(self, factor: float) -> "IntervalDomain":
        return IntervalDomain(self.a, self.b, self.alpha * factor)

    def eigenvalues(self, j: np.ndarray) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        return (j * np.pi / self.dilated_length) ** 2

    def eigenfunctions(self, j: np.ndarray, x: np.ndarray) -> np.ndarray:
        """phi_j sampled at x, zero outside the dilated interval.

        Returns an array of shape (len(j), len(x)).
        """
        j = np.asarray(j, dtype=float)
        x = np.asarray(x, dtype=float)
        left, right = self.dilated_bounds
        L = self.dilated_length
        vals = np.sqrt(2.0 / L) * np.sin(np.outer(j, (x - left)) * (np.pi / L))
        vals[:, (x < left) | (x > right)] = 0.0
        return vals


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(arr, dtype=float))
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples on the uniform grid linspace(a, b, n) of a domain.

    Values must vanish identically outside the declared support, and the
    object is immutable after construction; every operation in the library
    treats it as a pure value.
    """

    domain: IntervalDomain
    values: np.ndarray
    support: Tuple[float, float]

    def __post_init__(self):
        vals = _as_readonly(self.values)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 8:
            raise ArgumentError("values must be a 1-d array with at least 8 samples")
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("values must be finite")
        s0, s1 = self.support
        if not (self.domain.a - 1e-12 <= s0 < s1 <= self.domain.b + 1e-12):
            raise SupportError(f"support ({s0}, {s1}) not inside the domain")
        x = self.x
        outside = (x < s0 - 1e-12) | (x > s1 + 1e-12)
        if np.any(vals[outside] != 0.0):
            raise SupportError("nonzero samples outside the declared support")

    @property
    def n_pts(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.domain.a, self.domain.b, self.values.size)

    @property
    def h(self) -> float:
        return (self.domain.b - self.domain.a) / (self.values.size - 1)

    @property
    def support_width(self) -> float:
        return self.support[1] - self.support[0]

    @property
    def support_center(self) -> float:
        return 0.5 * (self.support[0] + self.support[1])

    def integral(self) -> float:
        """Trapezoid rule integral over the grid."""
        return float(np.trapezoid(self.values, dx=self.h))

    def norm_l2(self) -> float:
        return math.sqrt(max(self.norm_l2_sq(), 0.0))

    def norm_l2_sq(self) -> float:
        return float(np.trapezoid(self.values**2, dx=self.h))

    def with_values(self, values: np.ndarray,
                    support: Optional[Tuple[float, float]] = None) -> "GridFunction":
        return GridFunction(self.domain, values, support or self.support)

    def resampled(self, n_pts: int) -> "GridFunction":
        """Linear resample onto linspace(a, b, n_pts)."""
        xs = np.linspace(self.domain.a, self.domain.b, n_pts)
        return GridFunction(self.domain, np.interp(xs, self.x, self.values), self.support)


def sample(domain: IntervalDomain, func: Callable[[np.ndarray], np.ndarray],
           n_pts: int = 4096,
           support: Optional[Tuple[float, float]] = None) -> GridFunction:
    """Sample a callable onto the domain grid, snapping tiny edge values to 0."""
    x = np.linspace(domain.a, domain.b, n_pts)
    vals = np.asarray(func(x), dtype=float)
    if support is None:
        support = (domain.a, domain.b)
    s0, s1 = support
    vals = vals.copy()
    vals[(x < s0 - 1e-12) | (x > s1 + 1e-12)] = 0.0
    return GridFunction(domain, vals, (s0, s1))
