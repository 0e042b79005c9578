"""Classification of twisted curves by their torsion/curvature ratio.

The hierarchy helix < rectifying < polynomial-weight < general
f-rectifying is decided from the shape of tau/kappa as a function of
arclength: constant (helix), non-constant linear (rectifying), polynomial
of degree d >= 2 (f-rectifying for a polynomial weight of degree d-1), or
proportional to a user-supplied primitive F (general case). Models are
tried lowest complexity first with a shared normalized-RMS tolerance; a
supplied candidate primitive is a two-parameter model and is therefore
tried right after the linear model, before the higher-degree polynomials.

Polynomial fitting uses a Chebyshev basis on the normalized arclength
interval for conditioning; reported coefficients are in the power basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from ._num import constancy_deviation, normalized_rms
from .errors import (
    AxisExtractionError,
    NoisyRatioError,
    ValidationError,
    VanishingCurvatureError,
)
from .funcs import FunctionSpec
from .fvector import RatioFit, ratio_vs_F
from .geometry import DEFAULT_KAPPA_MIN, FrenetData

__all__ = [
    "ClassificationReport",
    "RecoveredFunction",
    "classify",
    "helix_axis",
    "recover_f",
]

DEFAULT_TOL = 1e-3
DEFAULT_N_MAX = 6
_COEFF_REL = 1e-6   # relative threshold for "non-null" coefficients
_PLANAR_REL = 1e-6  # max |tau| relative to curvature scale


@dataclass(frozen=True)
class ClassificationReport:
    """Outcome of the ratio-shape classification.

    Exactly one verdict; the coefficient fields are populated only for the
    matching verdict. ``residual`` is the normalized RMS of the accepted
    model (or of the best rejected one for ``undetermined``).
    """

    verdict: str                       # helix | rectifying | poly_f_rectifying
                                       # | f_rectifying | undetermined
    residual: float
    c1: float | None = None            # helix: constant ratio
    axis: np.ndarray | None = None     # helix: unit axis direction
    angle: float | None = None         # helix: angle between T and the axis
    c2: float | None = None            # rectifying: ratio slope (non-null)
    c3: float | None = None            # rectifying: ratio intercept
    a: float | None = None             # rectifying: position offset (c3/c2)
    b: float | None = None             # rectifying: binormal constant (1/c2)
    degree: int | None = None          # poly_f_rectifying: degree of f
    coefficients: tuple[float, ...] | None = None  # ratio poly, ascending powers
    mu_bar: float | None = None        # f_rectifying: ratio/primitive scale
    offset: float | None = None        # f_rectifying: primitive offset
    annotation: str = ""

    def to_dict(self) -> dict:
        out: dict = {"verdict": self.verdict, "residual": self.residual}
        if self.verdict == "helix":
            out["c1"] = self.c1
            out["axis"] = [float(v) for v in self.axis]
            out["angle"] = self.angle
        elif self.verdict == "rectifying":
            out.update(c2=self.c2, c3=self.c3, a=self.a, b=self.b)
        elif self.verdict == "poly_f_rectifying":
            out["degree"] = self.degree
            out["coefficients"] = list(self.coefficients)
        elif self.verdict == "f_rectifying":
            out.update(mu_bar=self.mu_bar, offset=self.offset)
        if self.annotation:
            out["annotation"] = self.annotation
        return out


@dataclass(frozen=True)
class RecoveredFunction:
    """Primitive and weight recovered from a ratio series (up to scale)."""

    s: np.ndarray
    F: np.ndarray
    f: np.ndarray
    mu_bar: float


def _poly_fit(s: np.ndarray, ratio: np.ndarray, deg: int):
    """Chebyshev least squares on [s_lo, s_hi]; returns (power coeffs, nrms)."""
    cheb = Chebyshev.fit(s, ratio, deg, domain=[float(s[0]), float(s[-1])])
    fitted = cheb(s)
    coeffs = cheb.convert(kind=Polynomial).coef
    if len(coeffs) < deg + 1:
        coeffs = np.pad(coeffs, (0, deg + 1 - len(coeffs)))
    return coeffs, normalized_rms(ratio - fitted, ratio)


def classify(
    fd: FrenetData,
    candidate_F: FunctionSpec | None = None,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_N_MAX,
    kappa_min: float = DEFAULT_KAPPA_MIN,
) -> ClassificationReport:
    """Place the curve in the helix/rectifying/f-rectifying hierarchy.

    Models are accepted when the normalized RMS residual is within ``tol``
    and the model's defining coefficient is non-null (a helix must not be
    reported as a degenerate rectifying curve, and so on up the ladder).
    Planar data (vanishing torsion) is undetermined: the required angle
    would be pi/2, which the helix model excludes.
    """
    bad = fd.kappa < kappa_min
    if np.any(bad):
        k = int(np.argmax(bad))
        raise VanishingCurvatureError(k, float(fd.kappa[k]))
    if len(fd.s) < 2 * (n_max + 2):
        raise ValidationError(
            f"need at least {2 * (n_max + 2)} nodes for classification, got {len(fd.s)}"
        )
    s = fd.s
    ratio = fd.tau / fd.kappa
    span = float(s[-1] - s[0])
    scale = 1.0 + float(np.max(np.abs(ratio)))
    coeff_floor = _COEFF_REL * scale

    kappa_scale = 1.0 + abs(float(np.median(fd.kappa)))
    if float(np.max(np.abs(fd.tau))) <= _PLANAR_REL * kappa_scale:
        return ClassificationReport(
            verdict="undetermined",
            residual=float(np.sqrt(np.mean(ratio ** 2))),
            annotation="planar: torsion vanishes, so the tangent angle "
                       "against any rectifying-plane axis would be pi/2",
        )

    # degree 0: helix
    c1 = float(np.mean(ratio))
    res0 = normalized_rms(ratio - c1, ratio)
    if res0 <= tol and abs(c1) > coeff_floor:
        axis, angle = helix_axis(fd, c1)
        return ClassificationReport(
            verdict="helix", residual=res0, c1=c1, axis=axis, angle=angle
        )

    # degree 1: rectifying
    coeffs1, res1 = _poly_fit(s, ratio, 1)
    c3, c2 = float(coeffs1[0]), float(coeffs1[1])
    if res1 <= tol and abs(c2) * span > coeff_floor:
        return ClassificationReport(
            verdict="rectifying", residual=res1, c2=c2, c3=c3,
            a=c3 / c2, b=1.0 / c2,
        )

    # user-supplied primitive: a 2-parameter model, tried before the
    # higher-degree generic polynomials
    if candidate_F is not None:
        fit: RatioFit = ratio_vs_F(fd, candidate_F)
        if fit.residual <= tol and abs(fit.mu_bar) > 0.0:
            return ClassificationReport(
                verdict="f_rectifying", residual=fit.residual,
                mu_bar=fit.mu_bar, offset=fit.offset,
            )

    # degrees 2..n_max: polynomial weight of degree d-1
    best_res = min(res0, res1)
    for d in range(2, n_max + 1):
        coeffs, res = _poly_fit(s, ratio, d)
        lead_contrib = abs(float(coeffs[-1])) * (span / 2.0) ** d
        if res <= tol and lead_contrib > coeff_floor:
            return ClassificationReport(
                verdict="poly_f_rectifying", residual=res, degree=d - 1,
                coefficients=tuple(float(c) for c in coeffs),
            )
        best_res = min(best_res, res)

    return ClassificationReport(
        verdict="undetermined", residual=best_res,
        annotation="no model within tolerance",
    )


def helix_axis(
    fd: FrenetData, c1: float, tol: float = 1e-4
) -> tuple[np.ndarray, float]:
    """Axis direction and angle of a helix with constant ratio ``c1``.

    The axis X = cos(theta) T + sin(theta) B with tan(theta) = kappa/tau
    is averaged over the nodes; <T, X> must stay constant within ``tol``
    or the curve was misclassified. theta lands in (0, pi/2) for positive
    ratio and (pi/2, pi) for negative; a vanishing ratio (planar data) has
    no admissible axis.
    """
    if abs(c1) < 1e-12:
        raise AxisExtractionError(
            "ratio is zero: theta would be pi/2, which the helix model excludes"
        )
    theta = float(np.arctan2(1.0, c1))  # tan(theta) = kappa/tau = 1/c1
    x_nodes = np.cos(theta) * fd.T + np.sin(theta) * fd.B
    axis = x_nodes.mean(axis=0)
    norm = float(np.linalg.norm(axis))
    if norm < 1e-12:
        raise AxisExtractionError("axis direction averaged to zero")
    axis /= norm
    cosines = fd.T @ axis
    drift = float(np.max(np.abs(cosines - np.median(cosines))))
    if drift > tol:
        raise AxisExtractionError(
            f"tangent angle against the axis drifts by {drift:.3g} "
            f"(tolerance {tol:.3g}): not a helix", drift=drift,
        )
    return axis, theta


def recover_f(
    fd: FrenetData,
    mu_bar_hint: float | None = None,
    tol: float = DEFAULT_TOL,
) -> RecoveredFunction:
    """Recover (F, f) from the ratio series, up to the reciprocal scale.

    Without a hint the scale convention is mu_bar = 1, i.e. F is the ratio
    series itself; the weight is its arclength derivative by the same
    finite-difference scheme the frame uses. Raises when the series is too
    rough for any smooth (degree <= 8) fit to explain it.
    """
    from ._num import derivative_uniform

    ratio = fd.tau / fd.kappa
    deg = min(8, max(2, len(fd.s) // 4))
    _, res = _poly_fit(fd.s, ratio, deg)
    if res > 10.0 * tol:
        raise NoisyRatioError(
            f"ratio series is too noisy for recovery (smooth-fit residual "
            f"{res:.3g} > {10.0 * tol:.3g})"
        )
    mu_bar = 1.0 if mu_bar_hint is None else float(mu_bar_hint)
    F_rec = ratio / mu_bar
    f_rec = derivative_uniform(F_rec, fd.ds, order=1, npts=5)
    return RecoveredFunction(s=fd.s, F=F_rec, f=f_rec, mu_bar=mu_bar)
