"""Named test functions used by the verification harness and the CLI.

Every entry is a callable factory: given a domain and resolution it returns a
GridFunction.  The battery spans rough (edge-kinked sines) and smooth bumps,
symmetric and asymmetric shapes, and mass-normalized variants for the
negative-order domain rules:

* ``sin2x``     full-period sine; mean zero, Lipschitz kinks at the edges.
* ``sinx``      half-period sine; nonzero mean, admissible only for -s < 1/2.
* ``bump``      smooth interior bump exp(-1/((x-a)(b-x))), positive.
* ``twobump0``  asymmetric smooth pair scaled to zero total mass.
* ``tribump0``  smooth triple with zero mass and zero first moment, for
                half-space duals whose far field would otherwise decay slowly.
* ``wallbump0`` positive mass near both walls, negative in the middle, zero
                total mass; the variant used for signed pointwise probes.
* ``mode1``, ``mode2``  normalized sine eigenfunctions.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List

import numpy as np

from .errors import ArgumentError
from .grids import GridFunction, IntervalDomain, sample

__all__ = ["battery_names", "battery_function", "battery_selection",
           "smooth_battery_names", "mean_zero_battery_names"]


def _cutoff_bump(z: np.ndarray) -> np.ndarray:
    """exp(-1/(z(1-z))) on (0,1), zero elsewhere; scale-free C^inf bump."""
    out = np.zeros_like(z)
    inside = (z > 0.0) & (z < 1.0)
    zi = z[inside]
    out[inside] = np.exp(-1.0 / (zi * (1.0 - zi)))
    return out


def _window_bump(x: np.ndarray, center: float, halfwidth: float) -> np.ndarray:
    z = (x - center) / halfwidth
    out = np.zeros_like(x)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


def _rel(dom: IntervalDomain, frac: float) -> float:
    return dom.a + frac * dom.length


def _make_sin2x(dom, n):
    L = dom.length
    return sample(dom, lambda x: np.sin(2.0 * math.pi * (x - dom.a) / L), n)


def _make_sinx(dom, n):
    L = dom.length
    return sample(dom, lambda x: np.sin(math.pi * (x - dom.a) / L), n)


def _make_bump(dom, n):
    L = dom.length
    return sample(dom, lambda x: _cutoff_bump((x - dom.a) / L), n)


def _make_twobump0(dom, n):
    c1, w1 = _rel(dom, 0.35), 0.175 * dom.length
    c2, w2 = _rel(dom, 0.70), 0.143 * dom.length

    def f(x):
        b1 = _window_bump(x, c1, w1)
        b2 = _window_bump(x, c2, w2)
        m1 = np.trapezoid(b1, x)
        m2 = np.trapezoid(b2, x)
        return b1 - (m1 / m2) * b2

    return sample(dom, f, n)


def _make_tribump0(dom, n):
    cs = [_rel(dom, 0.25), _rel(dom, 0.51), _rel(dom, 0.76)]
    ws = [0.143 * dom.length, 0.159 * dom.length, 0.127 * dom.length]

    def f(x):
        bs = [_window_bump(x, c, w) for c, w in zip(cs, ws)]
        m0 = [np.trapezoid(b, x) for b in bs]
        m1 = [np.trapezoid(x * b, x) for b in bs]
        A = np.array([[m0[1], m0[2]], [m1[1], m1[2]]])
        a2, a3 = np.linalg.solve(A, -np.array([m0[0], m1[0]]))
        return bs[0] + a2 * bs[1] + a3 * bs[2]

    return sample(dom, f, n)


def _make_wallbump0(dom, n):
    cw = 0.11 * dom.length
    c1, c2, cm = _rel(dom, 0.14), _rel(dom, 0.86), _rel(dom, 0.5)

    def f(x):
        walls = _window_bump(x, c1, cw) + _window_bump(x, c2, cw)
        mid = _window_bump(x, cm, 0.19 * dom.length)
        return walls - (np.trapezoid(walls, x) / np.trapezoid(mid, x)) * mid

    return sample(dom, f, n)


def _make_mode(j):
    def make(dom, n):
        return sample(dom, lambda x: dom.eigenfunctions(np.array([j]), x)[0], n)
    return make


_FACTORIES: Dict[str, Callable[[IntervalDomain, int], GridFunction]] = {
    "sin2x": _make_sin2x,
    "sinx": _make_sinx,
    "bump": _make_bump,
    "twobump0": _make_twobump0,
    "tribump0": _make_tribump0,
    "wallbump0": _make_wallbump0,
    "mode1": _make_mode(1),
    "mode2": _make_mode(2),
}

_SMOOTH = ("bump", "twobump0", "tribump0", "wallbump0")
_MEAN_ZERO = ("sin2x", "twobump0", "tribump0", "wallbump0", "mode2")

_BATTERIES: Dict[str, List[str]] = {
    "default": ["sin2x", "sinx", "bump", "twobump0"],
    "smooth": ["bump", "twobump0", "tribump0"],
    "rough": ["sin2x", "sinx"],
    "meanzero": ["sin2x", "twobump0", "tribump0"],
}


def battery_names() -> List[str]:
    return sorted(_FACTORIES)


def smooth_battery_names() -> tuple:
    return _SMOOTH


def mean_zero_battery_names() -> tuple:
    return _MEAN_ZERO


def battery_function(name: str, dom: IntervalDomain,
                     n_pts: int = 4096) -> GridFunction:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ArgumentError(
            f"unknown test function {name!r}; choose from {battery_names()}")
    return factory(dom, n_pts)


def battery_selection(battery: str) -> List[str]:
    try:
        return list(_BATTERIES[battery])
    except KeyError:
        raise ArgumentError(
            f"unknown battery {battery!r}; choose from {sorted(_BATTERIES)}")


def is_smooth(name: str) -> bool:
    return name in _SMOOTH


def is_mean_zero(name: str) -> bool:
    return name in _MEAN_ZERO
