"""Spectral ("Navier") fractional Laplacian: powers of the zero-boundary
Laplacian of an interval acting through its sine eigenbasis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ArgumentError, FormDivergence
from .grids import FractionalOrder, GridFunction, IntervalDomain
from .quadrature import estimate_decay
from .transforms import restricted_sine_coefficients

__all__ = ["NavierFormResult", "q_form_navier", "apply_navier",
           "q_form_navier_dilated"]

MODE_CAP = 20000


@dataclass(frozen=True)
class NavierFormResult:
    q_value: float
    truncation_K: int
    tail_estimate: float


def _coefficient_decay(coeffs: np.ndarray) -> Optional[float]:
    """Fitted p with |c_j| ~ j^-p over the top half of the modes."""
    j = np.arange(1, coeffs.size + 1)
    win = j >= coeffs.size // 2
    q2 = estimate_decay(j[win].astype(float), coeffs[win] ** 2,
                        peak=float(np.max(coeffs**2)))
    return None if q2 is None else 0.5 * q2


def _tail_bound(coeffs: np.ndarray, lam: np.ndarray, s: float) -> float:
    """Bound on the dropped sum past the truncation, from the fitted decay.

    Raises FormDivergence when the fitted decay says the series cannot
    converge (input outside the form domain at this order).
    """
    p = _coefficient_decay(coeffs)
    if p is None:
        return 0.0
    K = coeffs.size
    expo = 2.0 * s - 2.0 * p
    if expo >= -1.0:
        raise FormDivergence(
            f"sine coefficients decay like j^-{p:.2f}: the order-{s} form "
            "diverges")
    # sum_{j>K} lam_j^s C^2 j^-2p ~ (pi/L)^{2s} C^2 K^{expo+1} / |expo+1|
    scale = lam[-1] ** s * coeffs[-1] ** 2 if coeffs[-1] != 0 else 0.0
    c2 = float(np.mean((coeffs[K // 2:] ** 2) *
                       (np.arange(K // 2 + 1, K + 1) ** (2.0 * p))))
    lam1 = lam[0]
    return abs(c2 * lam1 ** s * K ** (expo + 1.0) / (expo + 1.0)) + abs(scale)


def q_form_navier(u: GridFunction, order: FractionalOrder,
                  dom: Optional[IntervalDomain] = None,
                  n_modes: int = 512) -> NavierFormResult:
    """Quadratic form sum_j lambda_j^s (u, phi_j)^2 against dom's basis.

    Inputs supported outside dom are allowed: the coefficients are computed
    by quadrature over dom's basis regardless, realizing the restriction of
    u to a functional on that interval.
    """
    order.require_valid()
    dom = dom or u.domain
    coeffs = restricted_sine_coefficients(u, dom, n_modes)
    j = np.arange(1, n_modes + 1)
    lam = dom.eigenvalues(j)
    tail = _tail_bound(coeffs, lam, order.s)
    q = float(np.sum(lam ** order.s * coeffs**2))
    return NavierFormResult(q, n_modes, tail)


def apply_navier(u: GridFunction, order: FractionalOrder,
                 dom: Optional[IntervalDomain] = None,
                 n_modes: int = 512) -> GridFunction:
    """sum_j lambda_j^s (u, phi_j) phi_j sampled on dom's grid."""
    order.require_valid()
    dom = dom or u.domain
    coeffs = restricted_sine_coefficients(u, dom, n_modes)
    j = np.arange(1, n_modes + 1)
    lam = dom.eigenvalues(j)
    _tail_bound(coeffs, lam, order.s)   # divergence screen
    out_dom = IntervalDomain(dom.a, dom.b)
    x = np.linspace(dom.a, dom.b, u.n_pts)
    phi = dom.eigenfunctions(j, x)
    vals = (lam ** order.s * coeffs) @ phi
    return GridFunction(out_dom, vals, (dom.a, dom.b))


def q_form_navier_dilated(u: GridFunction, order: FractionalOrder,
                          dom: IntervalDomain, alpha: float,
                          n_modes: int = 512) -> NavierFormResult:
    """Form on the concentrically dilated interval alpha*dom.

    The mode count grows with alpha so that the dilated basis covers the same
    frequency band that ``n_modes`` covers on dom itself.
    """
    if alpha < 1.0:
        raise ArgumentError("dilation factor must be >= 1")
    big = dom.dilate(alpha)
    left, right = big.dilated_bounds
    if u.support[0] < left - 1e-12 or u.support[1] > right + 1e-12:
        raise ArgumentError("support must stay inside the dilated interval")
    k_eff = min(int(math.ceil(n_modes * alpha)), MODE_CAP)
    res = q_form_navier(u, order, dom=big, n_modes=k_eff)
    return res
