"""Explicit construction of f-rectifying curves from (f, c, t0, Y).

Given a validated weight function f with primitive F, a constant c > 0 of
the same sign as f, a phase t0 and a unit-speed spherical curve Y, the
construction is

    s(t)     = F^-1(c tan(t + t0))                      (parameter map)
    alpha_f  = c sec(t + t0) Y(t)                       (f-position vector)
    alpha(t) = [c sec(t+t0) / f(s(t))] Y(t)
               + c^2 * integral of f'(s(t)) [sec(t+t0) / f(s(t))]^3 Y(t) dt

which is the integration by parts of d alpha/dt = c (sec(t+t0) Y(t))' / f(s(t)).
The quadrature runs on the sample grid (per-interval Simpson with
midpoints), refined x2 until successive restrictions to the output nodes
agree below 1e-9, and the integration constant is fixed at the lower end
of the t-range (curves are constructed up to a translation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprlang, funcs, fvector
from ._num import CumulativeTable
from .errors import GuardBandError, NumericalError, ValidationError
from .exprlang import Expr
from .funcs import FunctionSpec
from .geometry import ArcLengthCurve, ParamCurve, SampledCurve, frenet, resample_arclength

__all__ = [
    "SphericalCurve",
    "SynthesisConfig",
    "SynthesizedCurve",
    "SphericalSamples",
    "param_to_arclength",
    "f_position_of_t",
    "synthesize",
    "spherical_image",
]

DEFAULT_GUARD_EPS = 0.05
_REFINE_TOL = 1e-9
_MAX_REFINE = 8
_VALIDATION_GRID = 1001


@dataclass(frozen=True)
class SphericalCurve:
    """Unit-speed curve on the unit sphere, given by three expressions.

    Construction validates both defining invariants on a 1001-point grid:
    |Y(t)| = 1 within 1e-10 and |Y'(t)| = 1 within 1e-8 (Y' symbolic).
    """

    x: Expr
    y: Expr
    z: Expr
    t_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.t_range
        if not hi > lo:
            raise ValidationError(f"empty parameter range [{lo}, {hi}]")
        grid = np.linspace(lo, hi, _VALIDATION_GRID)
        pts = self.points_at(grid)
        norm_err = float(np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)))
        if norm_err > 1e-10:
            raise ValidationError(
                f"spherical-curve invariant |Y| = 1 violated by {norm_err:.3g} "
                "(curve must lie on the unit sphere)"
            )
        d = self.velocity_at(grid)
        speed_err = float(np.max(np.abs(np.linalg.norm(d, axis=1) - 1.0)))
        if speed_err > 1e-8:
            raise ValidationError(
                f"spherical-curve invariant |Y'| = 1 violated by {speed_err:.3g} "
                "(curve must be unit speed)"
            )

    @property
    def components(self) -> tuple[Expr, Expr, Expr]:
        return (self.x, self.y, self.z)

    def points_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack(
            [exprlang.evaluate_many(c, t) for c in self.components], axis=-1
        )

    def velocity_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack(
            [
                exprlang.evaluate_many(exprlang.differentiate(c), t)
                for c in self.components
            ],
            axis=-1,
        )


@dataclass(frozen=True)
class SynthesisConfig:
    """Parameters of the construction; ``validate`` enforces the invariants."""

    spec: FunctionSpec
    c: float
    t0: float
    t_range: tuple[float, float]
    n: int
    guard_eps: float = DEFAULT_GUARD_EPS

    def validate(self) -> None:
        if not self.c > 0.0:
            raise ValidationError(f"c must be strictly positive, got {self.c}")
        if self.spec.sign < 0:
            raise ValidationError(
                "f must have the same sign as c; c > 0 requires f > 0 on the domain"
            )
        t_lo, t_hi = self.t_range
        if not t_hi > t_lo:
            raise ValidationError(f"empty t range [{t_lo}, {t_hi}]")
        if self.n < 16:
            raise ValidationError(f"sample count n must be >= 16, got {self.n}")
        bound = np.pi / 2.0 - self.guard_eps
        worst = max(abs(t_lo + self.t0), abs(t_hi + self.t0))
        if worst > bound:
            raise GuardBandError(
                f"|t + t0| reaches {worst:.9g}, beyond the secant guard "
                f"pi/2 - {self.guard_eps:.3g} = {bound:.9g}"
            )
        # c tan(t + t0) must stay inside the attainable primitive values
        lo_v, hi_v = self.spec.primitive_range()
        for t in (t_lo, t_hi):
            y = self.c * np.tan(t + self.t0)
            if y < lo_v - 1e-9 * (1 + hi_v - lo_v) or y > hi_v + 1e-9 * (1 + hi_v - lo_v):
                raise NumericalError(
                    f"c tan(t + t0) = {y:.9g} at t = {t:.9g} leaves the attainable "
                    f"primitive range [{lo_v:.9g}, {hi_v:.9g}]"
                )
        # the phase is pinned by the primitive only when 0 is in the domain
        s_lo, s_hi = self.spec.domain
        if s_lo <= 0.0 <= s_hi:
            want = self.c * np.tan(self.t0)
            have = funcs.primitive_eval(self.spec, 0.0)
            if abs(have - want) > 1e-8 * (1.0 + abs(want)):
                raise ValidationError(
                    f"F(0) = {have:.9g} is inconsistent with c tan(t0) = {want:.9g}; "
                    "adjust t0 or the primitive anchor"
                )


@dataclass(frozen=True)
class SphericalSamples:
    """Sampled spherical image alpha_f / |alpha_f| on an arclength grid."""

    s: np.ndarray
    points: np.ndarray


@dataclass(frozen=True)
class SynthesizedCurve:
    """Sampled synthesized curve plus an evaluator at arbitrary parameters."""

    config: SynthesisConfig
    Y: SphericalCurve
    t: np.ndarray
    points: np.ndarray
    s: np.ndarray               # construction arclength at the nodes
    _integral: tuple[CumulativeTable, CumulativeTable, CumulativeTable] = field(repr=False)

    def at(self, t) -> np.ndarray:
        """Evaluate the curve at arbitrary parameters in the t-range."""
        t = np.asarray(t, dtype=float)
        lead = _leading_term(self.config, self.Y, t)
        integral = np.stack([tab.value(t) for tab in self._integral], axis=-1)
        return lead + integral

    def to_sampled(self) -> SampledCurve:
        return SampledCurve(self.t, self.points)

    def to_arclength(self, n: int | None = None) -> ArcLengthCurve:
        """Uniform-arclength sampling straight from the construction.

        Uses the exact parameter map t(s) = arctan(F(s)/c) - t0, so no
        spline resampling is involved; preferred for frame analysis of
        synthesized curves.
        """
        n = n or len(self.t) - 1
        cfg = self.config
        s_nodes = np.linspace(float(self.s[0]), float(self.s[-1]), n + 1)
        F_vals = funcs.primitive_eval_many(cfg.spec, s_nodes)
        t_nodes = np.arctan(np.asarray(F_vals) / cfg.c) - cfg.t0
        points = _leading_term(cfg, self.Y, t_nodes) + _cumulative_on_nodes(
            cfg, self.Y, t_nodes
        )
        return ArcLengthCurve(
            s=s_nodes,
            points=points,
            length=float(s_nodes[-1] - s_nodes[0]),
            params=t_nodes,
            source=None,
        )


def _mapped_arclength(cfg: SynthesisConfig, t) -> np.ndarray:
    return funcs.inverse_eval_many(cfg.spec, cfg.c * np.tan(np.asarray(t, dtype=float) + cfg.t0))


def param_to_arclength(cfg: SynthesisConfig, t: float):
    """s = F^-1(c tan(t + t0)); accepts scalars or arrays."""
    cfg.validate()
    out = _mapped_arclength(cfg, t)
    return float(out) if np.asarray(t).ndim == 0 else out


def f_position_of_t(cfg: SynthesisConfig, Y: SphericalCurve, t) -> np.ndarray:
    """The f-position vector in the construction parameter: c sec(t+t0) Y(t)."""
    cfg.validate()
    t = np.asarray(t, dtype=float)
    sec = 1.0 / np.cos(t + cfg.t0)
    return cfg.c * sec[..., None] * Y.points_at(t)


def _leading_term(cfg: SynthesisConfig, Y: SphericalCurve, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    s = _mapped_arclength(cfg, t)
    f_s = cfg.spec.eval_f(s)
    sec = 1.0 / np.cos(t + cfg.t0)
    return (cfg.c * sec / f_s)[..., None] * Y.points_at(t)


def _integrand(cfg: SynthesisConfig, Y: SphericalCurve, t: np.ndarray) -> np.ndarray:
    s = _mapped_arclength(cfg, t)
    f_s = cfg.spec.eval_f(s)
    fp_s = cfg.spec.eval_f_prime(s)
    sec = 1.0 / np.cos(t + cfg.t0)
    factor = cfg.c ** 2 * fp_s * (sec / f_s) ** 3
    return factor[:, None] * Y.points_at(t)


def _cumulative_on_nodes(cfg: SynthesisConfig, Y: SphericalCurve, nodes: np.ndarray) -> np.ndarray:
    """Cumulative integral of the correction term at arbitrary ordered nodes.

    Per-interval Simpson with a two-half refinement and Richardson
    extrapolation; quadrature runs directly on the requested nodes, so no
    interpolation error enters (the integrand can be stiff when f varies
    fast relative to its magnitude).
    """
    h = np.diff(nodes)
    g0 = _integrand(cfg, Y, nodes)
    gm = _integrand(cfg, Y, nodes[:-1] + h / 2.0)
    gq1 = _integrand(cfg, Y, nodes[:-1] + h / 4.0)
    gq3 = _integrand(cfg, Y, nodes[:-1] + 3.0 * h / 4.0)
    hh = h[:, None]
    s1 = (hh / 6.0) * (g0[:-1] + 4.0 * gm + g0[1:])
    s2 = (hh / 12.0) * (g0[:-1] + 4.0 * gq1 + 2.0 * gm + 4.0 * gq3 + g0[1:])
    inc = s2 + (s2 - s1) / 15.0
    return np.concatenate([np.zeros((1, 3)), np.cumsum(inc, axis=0)])


def synthesize(cfg: SynthesisConfig, Y: SphericalCurve) -> SynthesizedCurve:
    """Construct the f-rectifying curve for (f, c, t0, Y) on the t-range.

    Returns n+1 samples plus an evaluator backed by the cached integral
    table. The curve is pinned by taking the quadrature from the lower end
    of the t-range; comparisons against closed forms should solve for the
    translation first.
    """
    cfg.validate()
    y_lo, y_hi = Y.t_range
    t_lo, t_hi = cfg.t_range
    if t_lo < y_lo - 1e-12 or t_hi > y_hi + 1e-12:
        raise ValidationError(
            f"t range [{t_lo}, {t_hi}] not covered by the spherical curve's "
            f"range [{y_lo}, {y_hi}]"
        )
    n = cfg.n

    def cumulative_at(level: int):
        m = n * (1 << level)
        g = np.linspace(t_lo, t_hi, 2 * m + 1)
        vals = _integrand(cfg, Y, g)
        h = (t_hi - t_lo) / m
        inc = (h / 6.0) * (vals[0:-2:2] + 4.0 * vals[1:-1:2] + vals[2::2])
        cum = np.concatenate([np.zeros((1, 3)), np.cumsum(inc, axis=0)])
        return g[::2], cum, vals[::2]

    def make_tables(g, cum, slp):
        return tuple(
            CumulativeTable(x=g, values=cum[:, k], slopes=slp[:, k])
            for k in range(3)
        )

    # refine x2 until both the integral at shared nodes and the Hermite
    # interpolant between nodes (what the evaluator serves) stabilize
    grid, cum, slopes = cumulative_at(0)
    for level in range(1, _MAX_REFINE + 1):
        g2, cum2, slopes2 = cumulative_at(level)
        node_err = float(np.max(np.abs(cum2[::2] - cum)))
        mids = g2[1::2]
        tables = make_tables(grid, cum, slopes)
        interp = np.stack([tab.value(mids) for tab in tables], axis=-1)
        interp_err = float(np.max(np.abs(interp - cum2[1::2])))
        grid, cum, slopes = g2, cum2, slopes2
        if node_err < _REFINE_TOL and interp_err < _REFINE_TOL:
            break

    tables = make_tables(grid, cum, slopes)
    t_nodes = np.linspace(t_lo, t_hi, n + 1)
    points = _leading_term(cfg, Y, t_nodes) + np.stack(
        [tab.value(t_nodes) for tab in tables], axis=-1
    )
    s_nodes = _mapped_arclength(cfg, t_nodes)
    return SynthesizedCurve(
        config=cfg, Y=Y, t=t_nodes, points=points, s=s_nodes, _integral=tables
    )


def spherical_image(
    curve: ParamCurve | SynthesizedCurve | ArcLengthCurve,
    spec: FunctionSpec,
    n: int | None = None,
    s0: float = 0.0,
) -> SphericalSamples:
    """Recover the spherical image alpha_f / |alpha_f| of a curve.

    The integration constant of alpha_f is recovered by the verification
    fit before normalizing, so the image matches the construction's Y (up
    to the parameter change) for synthesized curves.
    """
    if isinstance(curve, SynthesizedCurve):
        s0 = float(curve.s[0])
        alc = resample_arclength(curve.to_sampled(), n or len(curve.t) - 1, s0=s0)
    elif isinstance(curve, ArcLengthCurve):
        alc = curve
    else:
        alc = resample_arclength(curve, n or 256, s0=s0)
    fd = frenet(alc)
    fp = fvector.compute_f_position(fd, alc, spec)
    alpha = fvector.true_f_position(fp, spec)
    rho = np.linalg.norm(alpha, axis=1)
    floor = 1e-9 * (1.0 + float(alc.length))
    if np.any(rho <= floor):
        k = int(np.argmax(rho <= floor))
        raise NumericalError(
            f"|alpha_f| vanishes at node {k} (s = {fp.s[k]:.9g}); "
            "the spherical image is undefined there"
        )
    return SphericalSamples(s=fp.s, points=alpha / rho[:, None])
