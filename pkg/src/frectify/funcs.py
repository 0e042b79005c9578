"""Validated weight functions: f, its derivative, primitive F and inverse.

A :class:`FunctionSpec` bundles a non-vanishing, single-signed expression f
on a closed arclength interval with a dense primitive table (adaptive
Simpson, cached on a uniform grid with monotone cubic Hermite interpolation
using the exact slopes f) and a guaranteed-convergent inverse
(bracketing bisection, then Newton polish with f as the derivative).

The integration constant is fixed by an anchor pair (s_ref, F_ref); any
constraint tying F to particular synthesis parameters is imposed by the
synthesis layer, not here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprlang
from ._num import CumulativeTable, cumulative_quadrature
from .errors import (
    AnalyticPrimitiveMismatchError,
    NearZeroFunctionError,
    OutOfDomainError,
    SignChangeError,
    ValidationError,
)
from .exprlang import Expr

__all__ = ["FunctionSpec", "make_function_spec", "primitive_eval", "inverse_eval"]

DEFAULT_F_MIN = 1e-9
_TABLE_INTERVALS = 4096  # 4097-point cached grid
_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class FunctionSpec:
    """Immutable bundle (f, f', F, F^-1) over a validated monotone domain."""

    f: Expr
    f_prime: Expr
    domain: tuple[float, float]
    anchor: tuple[float, float]
    sign: int
    table: CumulativeTable = field(repr=False)
    analytic_primitive: Expr | None = None

    @property
    def f_min_observed(self) -> float:
        return float(np.min(np.abs(self.table.slopes)))

    def primitive_range(self) -> tuple[float, float]:
        """Attainable values of F on the domain, as an ordered pair."""
        lo = primitive_eval(self, self.domain[0])
        hi = primitive_eval(self, self.domain[1])
        return (lo, hi) if lo <= hi else (hi, lo)

    def eval_f(self, s) -> np.ndarray:
        self._check_domain(s)
        return exprlang.evaluate_many(self.f, s)

    def eval_f_prime(self, s) -> np.ndarray:
        self._check_domain(s)
        return exprlang.evaluate_many(self.f_prime, s)

    def _check_domain(self, s):
        s = np.asarray(s, dtype=float)
        lo, hi = self.domain
        slack = 1e-9 * (1.0 + hi - lo)
        if np.any(s < lo - slack) or np.any(s > hi + slack):
            raise OutOfDomainError(
                f"arclength outside the function domain [{lo:.9g}, {hi:.9g}]"
            )


def make_function_spec(
    f: Expr | str,
    domain: tuple[float, float],
    anchor: tuple[float, float] | None = None,
    analytic_F: Expr | str | None = None,
    f_min: float = DEFAULT_F_MIN,
) -> FunctionSpec:
    """Build and validate a :class:`FunctionSpec`.

    ``anchor`` defaults to (domain lo, 0). When ``analytic_F`` is supplied
    it is validated against the quadrature table to 1e-8 (it must respect
    the anchor) and then used for primitive evaluation.
    """
    if isinstance(f, str):
        f = exprlang.parse(f)
    if isinstance(analytic_F, str):
        analytic_F = exprlang.parse(analytic_F)
    s_lo, s_hi = float(domain[0]), float(domain[1])
    if not s_hi > s_lo:
        raise ValidationError(f"empty function domain [{s_lo}, {s_hi}]")
    if anchor is None:
        anchor = (s_lo, 0.0)
    s_ref, f_ref = float(anchor[0]), float(anchor[1])
    if not (s_lo <= s_ref <= s_hi):
        raise ValidationError(
            f"anchor point {s_ref} outside the domain [{s_lo}, {s_hi}]"
        )

    grid = np.linspace(s_lo, s_hi, _TABLE_INTERVALS + 1)
    f_vals = exprlang.evaluate_many(f, grid)
    signs = np.sign(f_vals)
    if signs[0] != 0.0 and np.any(signs * signs[0] < 0):
        flip = int(np.argmax(signs * signs[0] < 0))
        raise SignChangeError(float(grid[flip - 1]), float(grid[flip]))
    small = np.abs(f_vals) < f_min
    if np.any(small):
        k = int(np.argmax(small))
        raise NearZeroFunctionError(float(grid[k]), float(f_vals[k]), f_min)

    table = cumulative_quadrature(
        lambda s: exprlang.evaluate_many(f, s), s_lo, s_hi,
        _TABLE_INTERVALS, tol=_QUAD_TOL,
    )
    # shift so that F(s_ref) = f_ref
    base = CumulativeTable(x=table.x, values=table.values, slopes=table.slopes)
    offset = f_ref - float(base.value(s_ref))
    table = CumulativeTable(x=base.x, values=base.values + offset, slopes=base.slopes)

    if analytic_F is not None:
        ana = exprlang.evaluate_many(analytic_F, grid)
        scale = 1.0 + float(np.max(np.abs(table.values)))
        err = float(np.max(np.abs(ana - table.values)))
        if err > 1e-8 * scale:
            raise AnalyticPrimitiveMismatchError(
                f"analytic primitive deviates from quadrature by {err:.3g} "
                f"(tolerance {1e-8 * scale:.3g}); check the expression and the anchor"
            )

    return FunctionSpec(
        f=f,
        f_prime=exprlang.differentiate(f),
        domain=(s_lo, s_hi),
        anchor=(s_ref, f_ref),
        sign=int(signs[0]) if signs[0] != 0 else 1,
        table=table,
        analytic_primitive=analytic_F,
    )


def primitive_eval(spec: FunctionSpec, s: float) -> float:
    """F(s); analytic when supplied, else the cached quadrature table."""
    spec._check_domain(s)
    if spec.analytic_primitive is not None:
        return exprlang.evaluate(spec.analytic_primitive, s)
    return float(spec.table.value(s))


def primitive_eval_many(spec: FunctionSpec, s) -> np.ndarray:
    """Vectorised :func:`primitive_eval`."""
    spec._check_domain(s)
    if spec.analytic_primitive is not None:
        return exprlang.evaluate_many(spec.analytic_primitive, s)
    return np.asarray(spec.table.value(s))


def inverse_eval(spec: FunctionSpec, y: float) -> float:
    """s with F(s) = y; |F(s) - y| <= 1e-10 (1 + |y|) guaranteed.

    Raises :class:`InversionRangeError` outside the attainable range.
    """
    return float(inverse_eval_many(spec, y))


def inverse_eval_many(spec: FunctionSpec, y) -> np.ndarray:
    """Vectorised :func:`inverse_eval`."""
    out = spec.table.inverse(y)
    if spec.analytic_primitive is None:
        return np.asarray(out)
    # polish against the analytic primitive for its extra accuracy
    s = np.atleast_1d(np.asarray(out, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    lo, hi = spec.domain
    for _ in range(4):
        fs = exprlang.evaluate_many(spec.analytic_primitive, s)
        err = fs - yv
        if np.all(np.abs(err) <= 1e-12 * (1.0 + np.abs(yv))):
            break
        dfs = exprlang.evaluate_many(spec.f, s)
        s = np.clip(s - err / dfs, lo, hi)
    return s[0] if np.asarray(y).ndim == 0 else s
