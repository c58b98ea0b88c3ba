"""Frequency-side quadrature engine.

The transform of a sampled function is taken to be the exact transform of its
piecewise-linear model: a padded FFT gives the lattice values, a demodulated
local Lagrange interpolation evaluates them at arbitrary frequencies, and the
triangular-window factor sinc^2(xi h / 2) is applied analytically.  Form and
multiplier integrals run on a graded grid xi_j = Xi (j/N)^2 whose near-origin
cells use a product rule that integrates the weight |xi|^p in closed form,
while the remaining cells carry two-point Gauss nodes.  Truncated tails are
restored from fitted decay models.
"""

from __future__ import annotations

import math
import threading
import weakref
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ArgumentError, FormDivergence
from .grids import GridFunction

SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# transform of the piecewise-linear model
# ---------------------------------------------------------------------------

class LineTransform:
    """Evaluate F u(xi) = (2 pi)^{-1/2} int e^{-i xi x} u(x) dx for xi >= 0,
    exactly for the piecewise-linear interpolant of the samples."""

    def __init__(self, u: GridFunction, pad_factor: int = 512):
        x = u.x
        vals = u.values
        self.h = u.h
        self._center = u.support_center
        # pad so that the lattice spacing resolves the demodulated phase
        n = vals.size
        P = 1
        while P < pad_factor * n:
            P *= 2
        spec = np.fft.rfft(vals, n=P)
        self.dxi = 2.0 * math.pi / (P * self.h)
        k = np.arange(spec.size)
        spec = spec * np.exp(-1j * (k * self.dxi) * (x[0] - self._center))
        self._table = spec
        self.xi_capacity = (spec.size - 8) * self.dxi

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.size and xi.max() > self.xi_capacity:
            raise ArgumentError("requested frequency beyond transform capacity")
        pos = xi / self.dxi
        i0 = np.clip(np.floor(pos).astype(np.int64) - 2, 0, self._table.size - 6)
        frac = pos - i0
        out = np.zeros(xi.shape, dtype=complex)
        nodes = np.arange(6.0)
        for j in range(6):
            w = np.ones_like(frac)
            for m in range(6):
                if m != j:
                    w *= (frac - nodes[m]) / (nodes[j] - nodes[m])
            out += w * self._table[i0 + j]
        out *= np.exp(-1j * xi * self._center)
        t = 0.5 * xi * self.h
        sinc = np.ones_like(xi)
        nz = np.abs(t) > 1e-12
        sinc[nz] = np.sin(t[nz]) / t[nz]
        return out * (self.h / SQRT2PI) * sinc**2


_transform_cache: "weakref.WeakKeyDictionary[GridFunction, LineTransform]" = \
    weakref.WeakKeyDictionary()
_cache_lock = threading.Lock()


def line_transform(u: GridFunction) -> LineTransform:
    """Shared, cached transform evaluator for a grid function."""
    with _cache_lock:
        tr = _transform_cache.get(u)
    if tr is None:
        tr = LineTransform(u)
        with _cache_lock:
            _transform_cache[u] = tr
    return tr


# ---------------------------------------------------------------------------
# graded node set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormGrid:
    """Graded quadrature node set on [0, Xi].

    The first ``n_product`` cells (up to the switch point) are integrated by a
    weighted two-point product rule using values at the graded cell edges; the
    remaining cells use two-point Gauss nodes with the weight evaluated there.
    ``nodes`` concatenates the product-cell edges and the Gauss nodes.
    """

    xi_max: float
    edges: np.ndarray
    n_product: int
    nodes: np.ndarray
    gauss_half: np.ndarray

    @property
    def gauss_nodes(self) -> np.ndarray:
        return self.nodes[self.n_product + 1:]


def form_grid(xi_max: float, n_cells: int, switch: Optional[float] = None) -> FormGrid:
    if xi_max <= 0 or n_cells < 16:
        raise ArgumentError("need xi_max > 0 and n_cells >= 16")
    j = np.arange(n_cells + 1)
    edges = xi_max * (j / n_cells) ** 2
    if switch is None:
        switch = 1.0
    k0 = int(np.searchsorted(edges, min(switch, xi_max / 4.0)))
    k0 = min(max(k0, 1), n_cells - 8)
    A, B = edges[k0:-1], edges[k0 + 1:]
    half = 0.5 * (B - A)
    mid = 0.5 * (A + B)
    d = half / math.sqrt(3.0)
    gnodes = np.stack([mid - d, mid + d], axis=1).ravel()
    nodes = np.concatenate([edges[:k0 + 1], gnodes])
    return FormGrid(xi_max, edges, k0, nodes, np.repeat(half, 2))


def power_cell_integral(p: float, a: float, b: float) -> float:
    """int_a^b xi^p dxi with the log branch at p = -1 (requires a > 0 there)."""
    if a == 0.0:
        if p <= -1.0:
            raise FormDivergence(f"divergent weight xi^{p} at the origin")
        return b ** (p + 1) / (p + 1)
    if abs(p + 1.0) < 1e-12:
        return math.log(b / a)
    return (b ** (p + 1) - a ** (p + 1)) / (p + 1)


def multiplier_weights(grid: FormGrid, p: float, vanish_order: int = 2) -> np.ndarray:
    """Weights w with sum_j w_j F(nodes_j) ~ int_0^Xi xi^p F(xi) dxi.

    ``vanish_order`` is the vanishing rate of F at 0 assumed on the first cell
    when the weight alone is not integrable there (mean-zero inputs).
    """
    k0 = grid.n_product
    pe = grid.edges[:k0 + 1]
    wp = np.zeros(k0 + 1)
    for c in range(k0):
        a, b = pe[c], pe[c + 1]
        if a == 0.0 and p <= -1.0 + 1e-12:
            m = float(vanish_order)
            if p + m <= -1.0:
                raise FormDivergence(f"weight xi^{p} not integrable at 0")
            wp[c + 1] += b ** (p + 1) / (p + m + 1.0)
            continue
        I0 = power_cell_integral(p, a, b)
        I1 = power_cell_integral(p + 1.0, a, b)
        wb = (I1 - a * I0) / (b - a)
        wp[c] += I0 - wb
        wp[c + 1] += wb
    wg = grid.gauss_half * grid.gauss_nodes ** p
    return np.concatenate([wp, wg])


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------

def power_tail(q: float, xi_max: float) -> float:
    """int_Xi^inf xi^q dxi, requiring q < -1."""
    if q >= -1.0:
        raise FormDivergence(f"non-integrable tail exponent {q}")
    return -xi_max ** (q + 1) / (q + 1)


def oscillatory_tails(q: float, freq: float, xi_max: float,
                      depth: int = 5) -> Tuple[float, float]:
    """(int_Xi^inf xi^q cos(freq xi), same with sin) by integration by parts."""
    sn, cs = math.sin(freq * xi_max), math.cos(freq * xi_max)
    ic = is_ = 0.0
    for k in reversed(range(depth)):
        qq = q - k
        ic, is_ = (-xi_max ** qq * sn / freq - (qq / freq) * is_,
                   xi_max ** qq * cs / freq + (qq / freq) * ic)
    return ic, is_


def estimate_decay(xi: np.ndarray, g: np.ndarray,
                   floor_rel: float = 1e-26,
                   peak: Optional[float] = None) -> Optional[float]:
    """Fitted decay exponent q of g ~ xi^-q over the data, or None when the
    window sits at the numerical noise floor relative to ``peak`` (the global
    maximum of the quantity, defaulting to the window's own)."""
    if g.size == 0:
        return None
    gmax = float(np.max(g))
    peak = gmax if peak is None else peak
    if gmax <= 0.0 or peak <= 0.0 or gmax < 1e-24 * peak:
        return None
    mask = g > floor_rel * peak
    if np.count_nonzero(mask) < 8:
        return None
    slope, _ = np.polyfit(np.log(xi[mask]), np.log(g[mask]), 1)
    return -float(slope)


@dataclass(frozen=True)
class TailModel:
    """Fitted large-frequency model of |F u|^2 and its integrated tail."""

    kind: str                # "negligible" | "kink" | "power"
    decay: Optional[float]   # exponent q of |Fu|^2 ~ xi^-q
    coeffs: Optional[np.ndarray]

    def integral(self, p: float, xi_max: float, freq: float) -> float:
        """int_Xi^inf xi^p * model(xi) dxi."""
        if self.kind == "negligible":
            return 0.0
        if self.kind == "kink":
            q4 = p - 4.0
            ic4, is4 = oscillatory_tails(q4, freq, xi_max)
            ic5, is5 = oscillatory_tails(q4 - 1.0, freq, xi_max)
            parts = np.array([power_tail(q4, xi_max), ic4, is4,
                              power_tail(q4 - 1.0, xi_max), ic5, is5])
            return float(self.coeffs @ parts)
        amp, q = self.coeffs
        return amp * power_tail(p - q, xi_max)


def fit_tail_model(xi: np.ndarray, f2: np.ndarray, freq: float,
                   peak: float) -> TailModel:
    """Model |Fu|^2 on a high-frequency window.

    Compactly supported inputs with edge kinks have |Fu|^2 ~ xi^-4 modulated
    at the support-width frequency; that case gets a six-parameter fit whose
    tail integrates in closed form.  Other algebraic rates get a plain power
    fit, and windows at the noise floor contribute nothing.
    """
    if f2.size < 16 or float(np.max(f2)) < 1e-24 * peak:
        return TailModel("negligible", None, None)
    q = estimate_decay(xi, f2, peak=peak)
    if q is None:
        return TailModel("negligible", None, None)
    if abs(q - 4.0) <= 0.7:
        g = f2 * xi**4
        cosw, sinw = np.cos(freq * xi), np.sin(freq * xi)
        X = np.stack([np.ones_like(xi), cosw, sinw,
                      1.0 / xi, cosw / xi, sinw / xi], axis=1)
        coef, *_ = np.linalg.lstsq(X, g, rcond=None)
        return TailModel("kink", 4.0, coef)
    # plain power model fitted in log space: f2 ~ amp * xi^-q
    mask = f2 > 1e-26 * peak
    slope, intercept = np.polyfit(np.log(xi[mask]), np.log(f2[mask]), 1)
    return TailModel("power", -float(slope),
                     np.array([math.exp(intercept), -float(slope)]))
