"""Finite-difference oracle for the flux-data extension problems.

In the substituted vertical variable t = y^(2 sigma) the degenerate equation
div(y^(1-2s) grad w) = 0 becomes

    w_xx + 4 sigma^2 t^((2 sigma - 1)/sigma) w_tt = 0,
    dw/dt|_(t=0) = -f / (2 sigma),

which is solved on a uniform (x, t) lattice with a standard 5-point stencil,
a one-sided second-order flux row at the bottom, zero Dirichlet values at the
top and on the lateral sides (the walls of the interval for the cylinder
kind, a wide truncation window for the half-plane kind).  The solver shares
no machinery with the transform-based fields and serves as their oracle.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ArgumentError, SolverError
from .grids import GridFunction, IntervalDomain
from .extension import ExtensionField, ExtensionKind

__all__ = ["fd_solve_dual"]


def fd_solve_dual(f: GridFunction, sigma: float,
                  dom: Optional[IntervalDomain] = None,
                  kind: str = "ST", *,
                  n_x: Optional[int] = None, n_t: int = 160,
                  y_max: Optional[float] = None,
                  window_factor: float = 24.0) -> ExtensionField:
    """Solve the flux-data problem by finite differences.

    ``kind`` selects the lateral condition: "ST" clamps the interval walls to
    zero, "CS" uses a wide zero-padded window.  Returns the field on the
    uniform-in-t lattice (the graded mesh image of the substitution).
    """
    if not (0.0 < sigma < 1.0):
        raise ArgumentError("sigma must lie in (0, 1)")
    if kind not in ("ST", "CS"):
        raise ArgumentError("kind must be 'ST' or 'CS'")
    dom = dom or f.domain
    y_max = y_max or 12.0 * f.support_width / math.pi

    if kind == "ST":
        left, right = dom.dilated_bounds
        n_x = n_x or 257
        out_kind = ExtensionKind.ST_NEUMANN
    else:
        half = 0.5 * window_factor * f.support_width
        left, right = f.support_center - half, f.support_center + half
        n_x = n_x or 1537
        out_kind = ExtensionKind.CS_NEUMANN

    x = np.linspace(left, right, n_x)
    t_max = y_max ** (2.0 * sigma)
    t = np.linspace(0.0, t_max, n_t + 1)
    dx = x[1] - x[0]
    dt = t[1] - t[0]
    fx = np.interp(x, f.x, f.values, left=0.0, right=0.0)

    nt = n_t + 1
    N = n_x * nt

    def node(i: int, j: int) -> int:
        return j * n_x + i

    rows, cols, vals = [], [], []
    rhs = np.zeros(N)
    expo = (2.0 * sigma - 1.0) / sigma
    for j in range(nt):
        cj = 4.0 * sigma**2 * t[j] ** expo if j > 0 else 0.0
        for i in range(n_x):
            r = node(i, j)
            if i == 0 or i == n_x - 1 or j == nt - 1:
                rows.append(r)
                cols.append(r)
                vals.append(1.0)
                continue
            if j == 0:
                # (-3 w0 + 4 w1 - w2) / (2 dt) = -f / (2 sigma)
                rows += [r, r, r]
                cols += [node(i, 0), node(i, 1), node(i, 2)]
                vals += [-1.5 / dt, 2.0 / dt, -0.5 / dt]
                rhs[r] = -fx[i] / (2.0 * sigma)
                continue
            rows += [r, r, r, r, r]
            cols += [node(i - 1, j), node(i + 1, j),
                     node(i, j - 1), node(i, j + 1), r]
            vals += [1.0 / dx**2, 1.0 / dx**2, cj / dt**2, cj / dt**2,
                     -2.0 / dx**2 - 2.0 * cj / dt**2]
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    try:
        sol = spla.spsolve(mat, rhs)
    except Exception as exc:           # factorization failure
        raise SolverError(f"sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SolverError("sparse solve returned non-finite values")
    W = sol.reshape(nt, n_x)
    m0 = f.integral()
    m1 = float(np.trapezoid(f.x * f.values, dx=f.h))
    return ExtensionField(out_kind, sigma, x, t, W,
                          dom=dom if kind == "ST" else None,
                          source_moments=(m0, m1))
