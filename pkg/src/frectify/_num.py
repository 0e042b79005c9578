"""Internal numerical kernels: finite differences, quadrature tables,
monotone interpolation and inversion.

Everything here is vectorised numpy working on plain arrays; the public
modules wrap these in their domain types.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InversionRangeError, NumericalError


# ---------------------------------------------------------------------------
# Finite-difference weights (Fornberg's algorithm)
# ---------------------------------------------------------------------------

def fd_weights(x: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Weights w[k, j] s.t. f^(k)(x0) ~ sum_j w[k, j] f(x[j]), k = 0..m."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    w = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    w[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = (c4 * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = c4 * w[0, j] / c3
        c1 = c2
    return w


@lru_cache(maxsize=None)
def _uniform_stencil(order: int, npts: int, offset: int) -> np.ndarray:
    """Unit-spacing weights for the ``order``-th derivative evaluated at
    index ``offset`` of an ``npts``-point window."""
    return fd_weights(np.arange(npts, dtype=float), float(offset), order)[order]


def derivative_uniform(values: np.ndarray, h: float, order: int, npts: int) -> np.ndarray:
    """Differentiate samples on a uniform grid with ``npts``-point stencils.

    Central windows in the interior. Near the boundaries a symmetric window
    does not fit and one-sided stencils lose the parity bonus, so boundary
    rows use ``order + 4`` points to keep fourth-order accuracy uniform
    across the grid. ``values`` may be (n,) or (n, d).
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    npts_edge = max(npts, order + 4)
    if n < npts_edge:
        raise NumericalError(
            f"need at least {npts_edge} samples for the stencil, got {n}"
        )
    half = npts // 2
    out = np.empty_like(values)
    for i in range(n):
        if half <= i <= n - 1 - half:
            start, width = i - half, npts
        else:
            width = npts_edge
            start = 0 if i < half else n - width
        w = _uniform_stencil(order, width, i - start)
        out[i] = np.tensordot(w, values[start:start + width], axes=(0, 0))
    return out / h ** order


# ---------------------------------------------------------------------------
# Cumulative Simpson on uniform samples (nodes only)
# ---------------------------------------------------------------------------

def cumulative_simpson_uniform(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled data, zero at the first node.

    Each subinterval integrates the parabola through the three nearest
    samples (Simpson-style); exact for quadratics.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 3:
        raise NumericalError("cumulative Simpson needs at least 3 samples")
    inc = np.empty_like(values)
    # interval [x_j, x_{j+1}] via parabola through (j-1, j, j+1), j >= 1
    inc[1:-1] = (h / 12.0) * (-values[:-2] + 8.0 * values[1:-1] + 5.0 * values[2:])
    # first interval via parabola through (0, 1, 2)
    inc[0] = (h / 12.0) * (5.0 * values[0] + 8.0 * values[1] - values[2])
    out = np.zeros_like(values)
    np.cumsum(inc[:-1], axis=0, out=out[1:])
    return out


# ---------------------------------------------------------------------------
# Cumulative quadrature table with Hermite interpolation and inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CumulativeTable:
    """Dense table of F(x) = F(x0) + integral of a smooth integrand.

    Between nodes F is the cubic Hermite interpolant with the exact slopes
    F' = integrand(node); that keeps d/dx F accurate to O(h^3) and makes F
    monotone whenever the integrand is single-signed on a fine enough grid.
    """

    x: np.ndarray        # (n+1,) uniform grid
    values: np.ndarray   # (n+1,) cumulative integral, values[0] anchored
    slopes: np.ndarray   # (n+1,) integrand at the nodes

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def value(self, xq) -> np.ndarray:
        xq = np.asarray(xq, dtype=float)
        lo, hi = float(self.x[0]), float(self.x[-1])
        span = hi - lo
        if np.any(xq < lo - 1e-12 * (1 + span)) or np.any(xq > hi + 1e-12 * (1 + span)):
            raise NumericalError(
                f"argument outside table domain [{lo:.9g}, {hi:.9g}]"
            )
        xq = np.clip(xq, lo, hi)
        h = self.h
        idx = np.clip(((xq - lo) / h).astype(int), 0, len(self.x) - 2)
        u = (xq - self.x[idx]) / h
        y0 = self.values[idx]
        y1 = self.values[idx + 1]
        d0 = self.slopes[idx] * h
        d1 = self.slopes[idx + 1] * h
        u2 = u * u
        u3 = u2 * u
        return (
            (2 * u3 - 3 * u2 + 1) * y0
            + (u3 - 2 * u2 + u) * d0
            + (-2 * u3 + 3 * u2) * y1
            + (u3 - u2) * d1
        )

    def derivative(self, xq) -> np.ndarray:
        """d/dx of the interpolant (exactly the Hermite derivative)."""
        xq = np.asarray(xq, dtype=float)
        h = self.h
        idx = np.clip(((xq - self.x[0]) / h).astype(int), 0, len(self.x) - 2)
        u = (xq - self.x[idx]) / h
        y0 = self.values[idx]
        y1 = self.values[idx + 1]
        d0 = self.slopes[idx] * h
        d1 = self.slopes[idx + 1] * h
        u2 = u * u
        return (
            (6 * u2 - 6 * u) * y0
            + (3 * u2 - 4 * u + 1) * d0
            + (-6 * u2 + 6 * u) * y1
            + (3 * u2 - 2 * u) * d1
        ) / h

    def inverse(self, yq, bisect_width: float = 1e-6, rtol: float = 1e-10):
        """Solve F(x) = y for each y, bisection then Newton polish.

        The table must be strictly monotone. Convergence criterion:
        |F(x) - y| <= rtol * (1 + |y|).
        """
        yq = np.asarray(yq, dtype=float)
        scalar = yq.ndim == 0
        y = np.atleast_1d(yq).astype(float)
        vals = self.values
        sgn = 1.0 if vals[-1] >= vals[0] else -1.0
        v = sgn * vals
        yy = sgn * y
        lo_v, hi_v = v[0], v[-1]
        slack = 1e-9 * (1.0 + hi_v - lo_v)
        if np.any(yy < lo_v - slack) or np.any(yy > hi_v + slack):
            bad = y[(yy < lo_v - slack) | (yy > hi_v + slack)][0]
            a, b = sorted((float(vals[0]), float(vals[-1])))
            raise InversionRangeError(float(bad), a, b)
        yy = np.clip(yy, lo_v, hi_v)
        idx = np.clip(np.searchsorted(v, yy) - 1, 0, len(v) - 2)
        a = self.x[idx].copy()
        b = self.x[idx + 1].copy()
        n_bisect = max(0, int(np.ceil(np.log2(max(self.h / bisect_width, 1.0)))))
        for _ in range(n_bisect):
            mid = 0.5 * (a + b)
            fmid = sgn * self.value(mid)
            left = fmid >= yy
            b = np.where(left, mid, b)
            a = np.where(left, a, mid)
        xr = 0.5 * (a + b)
        for _ in range(8):
            fx = sgn * self.value(xr)
            err = fx - yy
            if np.all(np.abs(err) <= rtol * (1.0 + np.abs(yy))):
                break
            dfx = sgn * self.derivative(xr)
            step = np.where(dfx != 0.0, err / np.where(dfx == 0.0, 1.0, dfx), 0.0)
            xn = xr - step
            # fall back to bisection when Newton leaves the bracket
            bad = (xn < a) | (xn > b) | ~np.isfinite(xn)
            xn = np.where(bad, 0.5 * (a + b), xn)
            fxn = sgn * self.value(xn)
            left = fxn >= yy
            b = np.where(left, xn, b)
            a = np.where(left, a, xn)
            xr = xn
        return float(xr[0]) if scalar else xr


def cumulative_quadrature(fn, a: float, b: float, n: int,
                          tol: float = 1e-10, max_levels: int = 12) -> CumulativeTable:
    """Tabulate F(x) = int_a^x fn on an ``n``-interval uniform grid.

    Per-interval Simpson with midpoints; the whole grid is refined x2 until
    the restriction to the coarse nodes changes by less than ``tol``
    (Richardson-style check). ``fn`` must accept numpy arrays.
    """
    if not b > a:
        raise NumericalError("quadrature needs b > a")
    x = np.linspace(a, b, n + 1)

    def table_at(level: int) -> np.ndarray:
        m = n * (1 << level)
        g = np.linspace(a, b, 2 * m + 1)  # nodes and midpoints interleaved
        fg = np.asarray(fn(g), dtype=float)
        h = (b - a) / m
        inc = (h / 6.0) * (fg[0:-2:2] + 4.0 * fg[1:-1:2] + fg[2::2])
        cum = np.concatenate(([0.0], np.cumsum(inc)))
        return cum[:: 1 << level]  # restrict to the coarse n+1 nodes

    coarse = table_at(0)
    level = 0
    while level < max_levels:
        finer = table_at(level + 1)
        if np.max(np.abs(finer - coarse)) < tol:
            coarse = finer
            break
        coarse = finer
        level += 1
    slopes = np.asarray(fn(x), dtype=float)
    return CumulativeTable(x=x, values=coarse, slopes=slopes)


# ---------------------------------------------------------------------------
# Deviation metrics shared by verification and classification
# ---------------------------------------------------------------------------

def constancy_deviation(series: np.ndarray) -> float:
    """max |x_i - median| / (1 + |median|); 0 for a perfectly flat series."""
    series = np.asarray(series, dtype=float)
    med = float(np.median(series))
    return float(np.max(np.abs(series - med)) / (1.0 + abs(med)))


def normalized_rms(residual: np.ndarray, signal: np.ndarray) -> float:
    """RMS of the residual scaled by 1 + RMS of the signal."""
    residual = np.asarray(residual, dtype=float)
    signal = np.asarray(signal, dtype=float)
    r = float(np.sqrt(np.mean(residual ** 2)))
    s = float(np.sqrt(np.mean(signal ** 2)))
    return r / (1.0 + s)
