"""Space curves, arclength reparametrization and the Frenet apparatus.

Curves come in two flavours: :class:`AnalyticCurve` (three expressions of
one parameter) and :class:`SampledCurve` (ordered parameter/point samples).
Both are resampled onto a uniform arclength grid; frames are computed with
closed-form derivative formulas when the source is analytic, otherwise
with finite differences on the uniform grid.

Conventions: kappa = |a' x a''| / |a'|^3 >= 0, N = T'/kappa, B = T x N, and
tau = <a' x a'', a'''> / |a' x a''|^2 (so B' = -tau N).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import exprlang
from ._num import cumulative_quadrature, derivative_uniform
from .errors import (
    NonRegularCurveError,
    NumericalError,
    ValidationError,
    VanishingCurvatureError,
)
from .exprlang import Expr

__all__ = [
    "AnalyticCurve",
    "SampledCurve",
    "ArcLengthCurve",
    "FrenetData",
    "resample_arclength",
    "frenet",
    "ratio_series",
    "frenet_residuals",
    "speed_profile",
]

DEFAULT_KAPPA_MIN = 1e-8
MIN_SAMPLES = 16
_SPEED_FLOOR = 1e-8


@dataclass(frozen=True)
class AnalyticCurve:
    """Curve given by component expressions of a single parameter."""

    x: Expr
    y: Expr
    z: Expr
    t_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.t_range
        if not hi > lo:
            raise ValidationError(f"empty parameter range [{lo}, {hi}]")

    @property
    def components(self) -> tuple[Expr, Expr, Expr]:
        return (self.x, self.y, self.z)

    def points_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack(
            [exprlang.evaluate_many(c, t) for c in self.components], axis=-1
        )

    def derivative_exprs(self, order: int) -> tuple[Expr, Expr, Expr]:
        comps = self.components
        for _ in range(order):
            comps = tuple(exprlang.differentiate(c) for c in comps)
        return comps

    def derivative_at(self, t, order: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack(
            [exprlang.evaluate_many(c, t) for c in self.derivative_exprs(order)],
            axis=-1,
        )


@dataclass(frozen=True)
class SampledCurve:
    """Ordered (parameter, point) samples of a space curve."""

    params: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.params, dtype=float)
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] != t.shape[0]:
            raise ValidationError("points must be (n, 3) matching the parameters")
        if t.shape[0] < MIN_SAMPLES:
            raise ValidationError(
                f"need at least {MIN_SAMPLES} samples, got {t.shape[0]}"
            )
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(p)):
            raise ValidationError("non-finite values in curve samples")
        if np.any(np.diff(t) <= 0.0):
            k = int(np.argmax(np.diff(t) <= 0.0))
            raise ValidationError(f"parameters not strictly increasing at index {k + 1}")
        object.__setattr__(self, "params", t)
        object.__setattr__(self, "points", p)


ParamCurve = AnalyticCurve | SampledCurve


@dataclass(frozen=True)
class ArcLengthCurve:
    """Uniform arclength resampling of a parametric curve."""

    s: np.ndarray                 # (n+1,) uniform, starts at s0
    points: np.ndarray            # (n+1, 3)
    length: float
    params: np.ndarray            # source parameter at each node
    source: ParamCurve | None = field(default=None, repr=False)

    @property
    def ds(self) -> float:
        return float(self.s[1] - self.s[0])


@dataclass(frozen=True)
class FrenetData:
    """Per-node frame (T, N, B) and scalar curvature/torsion."""

    s: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray

    @property
    def ds(self) -> float:
        return float(self.s[1] - self.s[0])


def _analytic_speed_fn(curve: AnalyticCurve):
    d1 = curve.derivative_exprs(1)

    def speed(t):
        t = np.asarray(t, dtype=float)
        comps = [exprlang.evaluate_many(c, t) for c in d1]
        return np.sqrt(comps[0] ** 2 + comps[1] ** 2 + comps[2] ** 2)

    return speed


def _sampled_speed_fn(curve: SampledCurve):
    spline = CubicSpline(curve.params, curve.points, axis=0, bc_type="not-a-knot")
    dspline = spline.derivative()

    def speed(t):
        d = dspline(np.asarray(t, dtype=float))
        return np.sqrt(np.sum(d * d, axis=-1))

    return speed, spline


def resample_arclength(curve: ParamCurve, n: int, s0: float = 0.0) -> ArcLengthCurve:
    """Resample ``curve`` at n+1 uniformly spaced arclength nodes.

    The arclength grid starts at ``s0`` (callers that know the curve's
    true arclength origin pass it so downstream weight functions are
    evaluated at the right place).
    """
    if n < MIN_SAMPLES:
        raise ValidationError(f"resampling needs n >= {MIN_SAMPLES}, got {n}")
    if isinstance(curve, AnalyticCurve):
        t_lo, t_hi = curve.t_range
        speed = _analytic_speed_fn(curve)
        position = curve.points_at
    elif isinstance(curve, SampledCurve):
        t_lo, t_hi = float(curve.params[0]), float(curve.params[-1])
        speed, spline = _sampled_speed_fn(curve)
        position = spline
    else:
        raise ValidationError(f"cannot resample {type(curve).__name__}")

    probe = np.linspace(t_lo, t_hi, max(4 * n + 1, 1025))
    sp = speed(probe)
    k = int(np.argmin(sp))
    if sp[k] < _SPEED_FLOOR:
        raise NonRegularCurveError(float(probe[k]), float(sp[k]))

    table = cumulative_quadrature(
        speed, t_lo, t_hi, max(2 * n, 1024), tol=1e-11
    )
    length = float(table.values[-1])
    targets = np.linspace(0.0, length, n + 1)
    t_nodes = np.asarray(table.inverse(targets), dtype=float)
    t_nodes[0], t_nodes[-1] = t_lo, t_hi
    points = np.asarray(position(t_nodes), dtype=float)
    return ArcLengthCurve(
        s=s0 + targets, points=points, length=length, params=t_nodes, source=curve
    )


def _frames_from_derivatives(v, a, j, s, kappa_min):
    vn = np.linalg.norm(v, axis=1)
    cr = np.cross(v, a)
    crn = np.linalg.norm(cr, axis=1)
    kappa = crn / vn ** 3
    bad = kappa < kappa_min
    if np.any(bad):
        k = int(np.argmax(bad))
        raise VanishingCurvatureError(k, float(kappa[k]))
    T = v / vn[:, None]
    B = cr / crn[:, None]
    N = np.cross(B, T)
    tau = np.einsum("ij,ij->i", cr, j) / crn ** 2
    return FrenetData(s=s, T=T, N=N, B=B, kappa=kappa, tau=tau)


def frenet(
    curve: ArcLengthCurve | ParamCurve,
    n: int | None = None,
    kappa_min: float = DEFAULT_KAPPA_MIN,
) -> FrenetData:
    """Frenet apparatus {T, N, B, kappa, tau} on a uniform arclength grid.

    Analytic sources use closed-form derivatives (three symbolic
    differentiations); sampled sources use finite differences on the
    resampled grid: 5-point stencils for the first two derivatives and a
    7-point stencil for the third, all fourth order, one-sided at the ends.
    """
    if isinstance(curve, AnalyticCurve):
        alc = resample_arclength(curve, n or 512)
    elif isinstance(curve, SampledCurve):
        alc = resample_arclength(curve, n or max(len(curve.params) - 1, MIN_SAMPLES))
    elif isinstance(curve, ArcLengthCurve):
        alc = curve
    else:
        raise ValidationError(f"cannot compute frames for {type(curve).__name__}")

    if isinstance(alc.source, AnalyticCurve):
        src = alc.source
        v = src.derivative_at(alc.params, 1)
        a = src.derivative_at(alc.params, 2)
        j = src.derivative_at(alc.params, 3)
    else:
        h = alc.ds
        v = derivative_uniform(alc.points, h, order=1, npts=5)
        a = derivative_uniform(alc.points, h, order=2, npts=5)
        j = derivative_uniform(alc.points, h, order=3, npts=7)
    return _frames_from_derivatives(v, a, j, alc.s, kappa_min)


def ratio_series(fd: FrenetData, kappa_min: float = DEFAULT_KAPPA_MIN) -> np.ndarray:
    """Pointwise tau/kappa on the frame's node grid."""
    bad = fd.kappa < kappa_min
    if np.any(bad):
        k = int(np.argmax(bad))
        raise VanishingCurvatureError(k, float(fd.kappa[k]))
    return fd.tau / fd.kappa


def frenet_residuals(fd: FrenetData) -> dict[str, float]:
    """Max norms of the frame ODE residuals under finite differencing.

    Returns max |T' - kappa N|, |N' + kappa T - tau B| and |B' + tau N|
    over interior nodes; all three shrink at the differentiation order
    for smooth curves.
    """
    h = fd.ds
    dT = derivative_uniform(fd.T, h, order=1, npts=5)
    dN = derivative_uniform(fd.N, h, order=1, npts=5)
    dB = derivative_uniform(fd.B, h, order=1, npts=5)
    interior = slice(3, -3) if len(fd.s) > 7 else slice(None)
    k = fd.kappa[interior, None]
    t = fd.tau[interior, None]
    r1 = dT[interior] - k * fd.N[interior]
    r2 = dN[interior] + k * fd.T[interior] - t * fd.B[interior]
    r3 = dB[interior] + t * fd.N[interior]
    norm = lambda r: float(np.max(np.linalg.norm(r, axis=1)))
    return {"tangent": norm(r1), "normal": norm(r2), "binormal": norm(r3)}


def speed_profile(alc: ArcLengthCurve) -> np.ndarray:
    """|d alpha / d s| at the nodes via the 5-point stencil (diagnostic)."""
    if len(alc.s) < 5:
        raise NumericalError("need at least 5 nodes for the speed diagnostic")
    d = derivative_uniform(alc.points, alc.ds, order=1, npts=5)
    return np.linalg.norm(d, axis=1)
