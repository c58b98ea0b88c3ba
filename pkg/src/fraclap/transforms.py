"""Sine-basis and whole-line transforms with their membership validations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import ArgumentError, SmoothnessError, SupportError
from .grids import FractionalOrder, GridFunction, IntervalDomain, Regime
from .quadrature import (FormGrid, estimate_decay, fit_tail_model, form_grid,
                         line_transform, multiplier_weights, power_tail)

__all__ = [
    "SineSpectrum", "FourierGrid", "MeanZeroVerdict", "MeanZeroCheck",
    "sine_coefficients", "fourier_transform", "check_mean_zero",
    "laplacian_power_int", "plancherel_integral",
]


# ---------------------------------------------------------------------------
# sine side
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SineSpectrum:
    """Coefficients against the orthonormal zero-boundary sine basis."""

    domain: IntervalDomain
    coeffs: np.ndarray
    eigenvalues: np.ndarray
    parseval_defect: float

    @property
    def n_modes(self) -> int:
        return self.coeffs.size


def restricted_sine_coefficients(u: GridFunction, dom: IntervalDomain,
                                 n_modes: int) -> np.ndarray:
    """(u, phi_j) over dom's grid window by the trapezoid rule.

    No support screen: samples outside the dilated interval are simply not
    seen, which realizes the restriction of u to a functional on the basis.
    """
    if n_modes < 1:
        raise ArgumentError("need at least one mode")
    j = np.arange(1, n_modes + 1)
    phi = dom.eigenfunctions(j, u.x)
    return np.trapezoid(phi * u.values[None, :], dx=u.h, axis=1)


def sine_coefficients(u: GridFunction, n_modes: int = 512) -> SineSpectrum:
    """First coefficients of u in its own domain's sine basis."""
    dom = u.domain
    left, right = dom.dilated_bounds
    if u.support[0] < left - 1e-12 or u.support[1] > right + 1e-12:
        raise SupportError("support sticks out of the basis interval")
    coeffs = restricted_sine_coefficients(u, dom, n_modes)
    defect = abs(float(np.sum(coeffs**2)) - u.norm_l2_sq())
    j = np.arange(1, n_modes + 1)
    return SineSpectrum(dom, coeffs, dom.eigenvalues(j), defect)


# ---------------------------------------------------------------------------
# whole-line side
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FourierGrid:
    """Transform samples on a symmetric graded frequency grid.

    Negative-frequency values are the conjugates of the positive ones by
    construction, so Hermitian symmetry is exact.
    """

    xi_max: float
    nodes: np.ndarray
    values: np.ndarray
    tail_exponent: Optional[float]

    @property
    def positive_nodes(self) -> np.ndarray:
        n = self.nodes.size // 2
        return self.nodes[n:]

    @property
    def positive_values(self) -> np.ndarray:
        n = self.nodes.size // 2
        return self.values[n:]


def fourier_transform(u: GridFunction, xi_max: Optional[float] = None,
                      n_nodes: int = 8192, adapt_tol: float = 1e-8,
                      max_doublings: int = 6) -> FourierGrid:
    """Sampled transform of u on a graded grid over [-Xi, Xi].

    When ``xi_max`` is omitted the truncation doubles until the algebraic
    tail bound (decay at least xi^-4 in |Fu|^2 for Lipschitz input) moves the
    Plancherel integral by less than ``adapt_tol`` relative.
    """
    tr = line_transform(u)
    target = max(u.norm_l2_sq(), 1e-300)
    if xi_max is None:
        xi = 64.0 * math.pi / u.support_width
        for _ in range(max_doublings):
            if 2.0 * xi > 0.9 * tr.xi_capacity:
                break
            probe = np.linspace(0.5 * xi, xi, 257)
            c_hat = float(np.max(np.abs(tr(probe)) ** 2 * probe**4))
            if c_hat * xi ** (-3) / 3.0 < adapt_tol * target:
                break
            xi *= 2.0
        xi_max = xi
    j = np.arange(n_nodes + 1)
    pos = xi_max * (j / n_nodes) ** 2
    vals_pos = tr(pos)
    nodes = np.concatenate([-pos[:0:-1], pos])
    values = np.concatenate([np.conj(vals_pos[:0:-1]), vals_pos])
    f2 = np.abs(vals_pos) ** 2
    win = pos >= 0.5 * xi_max
    decay = estimate_decay(pos[win], f2[win], peak=float(np.max(f2)))
    return FourierGrid(float(xi_max), nodes, values, decay)


def plancherel_integral(fg: FourierGrid, support_width: float) -> float:
    """int |Fu|^2 over the line: trapezoid on the grid plus a fitted tail."""
    pos = fg.positive_nodes
    f2 = np.abs(fg.positive_values) ** 2
    base = 2.0 * float(np.trapezoid(f2, pos))
    win = pos >= 0.5 * fg.xi_max
    model = fit_tail_model(pos[win], f2[win], support_width, float(np.max(f2)))
    return base + 2.0 * model.integral(0.0, fg.xi_max, support_width)


# ---------------------------------------------------------------------------
# mean-zero rule
# ---------------------------------------------------------------------------

class MeanZeroVerdict(Enum):
    REQUIRED_PASS = "required-pass"
    REQUIRED_FAIL = "required-fail"
    NOT_REQUIRED = "not-required"


@dataclass(frozen=True)
class MeanZeroCheck:
    verdict: MeanZeroVerdict
    integral: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.verdict is not MeanZeroVerdict.REQUIRED_FAIL


def mean_zero_required(s: float) -> bool:
    """The zero-total-mass rule applies for negative orders with -s >= 1/2."""
    return -1.0 < s <= -0.5


def check_mean_zero(u: GridFunction, order: FractionalOrder) -> MeanZeroCheck:
    """Validate membership in the restricted form domain at negative order."""
    m = u.integral()
    tol = 1e-9 * (u.norm_l2() * math.sqrt(u.support_width) + 1e-30)
    if not mean_zero_required(order.s):
        return MeanZeroCheck(MeanZeroVerdict.NOT_REQUIRED, m, tol)
    if abs(m) <= tol:
        return MeanZeroCheck(MeanZeroVerdict.REQUIRED_PASS, m, tol)
    return MeanZeroCheck(MeanZeroVerdict.REQUIRED_FAIL, m, tol)


# ---------------------------------------------------------------------------
# integer Laplacian powers
# ---------------------------------------------------------------------------

def spectral_decay_exponent(u: GridFunction) -> Optional[float]:
    """Decay rate q of |Fu| ~ xi^-q over a high-frequency band, or None when
    the band is pure rounding noise (effectively infinite decay)."""
    tr = line_transform(u)
    xi_hi = min(0.8 * math.pi / u.h, tr.xi_capacity)
    band = np.linspace(0.1 * xi_hi, xi_hi, 513)
    amp = np.abs(tr(band))
    peak = np.abs(tr(np.linspace(0.0, 8.0 * math.pi / u.support_width, 257))).max()
    if amp.max() < 1e-12 * peak:
        return None
    q2 = estimate_decay(band, amp**2, floor_rel=1e-24)
    return None if q2 is None else 0.5 * q2


def laplacian_power_int(u: GridFunction, k: int) -> GridFunction:
    """v = (-d^2/dx^2)^k u by spectral differentiation on a padded window.

    The input must be smooth enough that v stays square integrable, which is
    screened through the measured transform decay; interior compact support
    keeps the periodic window consistent with the whole-line operator.
    """
    if k < 0:
        raise ArgumentError("power k must be a nonnegative integer")
    if k == 0:
        return u
    q = spectral_decay_exponent(u)
    if q is not None and q <= 2 * k + 2:
        raise SmoothnessError(
            f"measured transform decay {q:.2f} too slow for k={k} "
            f"(needs more than {2 * k + 2})")
    x = u.x
    eps = 4.0 * u.h
    if abs(u.values[0]) > 0 or abs(u.values[-1]) > 0 or \
            u.support[0] < u.domain.a + eps or u.support[1] > u.domain.b - eps:
        raise SupportError("need support strictly inside the domain")
    n = u.n_pts
    pad = 2 * n
    kappa = 2.0 * math.pi * np.fft.rfftfreq(pad, d=u.h)
    spec = np.fft.rfft(u.values, n=pad)
    v = np.fft.irfft(spec * kappa ** (2 * k), n=pad)[:n]
    # clip truncation dust outside the inherited support
    keep = (x >= u.support[0] - 1e-12) & (x <= u.support[1] + 1e-12)
    v[~keep] = 0.0
    return GridFunction(u.domain, v, u.support)
