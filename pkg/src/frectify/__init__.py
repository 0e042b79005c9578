"""frectify: f-rectifying space curves.

Curves whose f-position vector (the line integral of a weight f of
arclength against the displacement) stays in the rectifying plane
generalize helices (f = 0) and rectifying curves (f constant). This
package constructs them from a weight and a spherical curve, verifies the
characterizing identities on arbitrary curves, and classifies curves in
the helix / rectifying / polynomial-weight / general hierarchy from their
torsion-to-curvature ratio.
"""

from .classify import (
    ClassificationReport,
    RecoveredFunction,
    classify,
    helix_axis,
    recover_f,
)
from .errors import (
    FrectifyError,
    NumericalError,
    ValidationError,
)
from .exprlang import (
    Expr,
    differentiate,
    evaluate,
    evaluate_many,
    parse,
    to_text,
)
from .funcs import (
    FunctionSpec,
    inverse_eval,
    make_function_spec,
    primitive_eval,
)
from .fvector import (
    FPositionVector,
    VerificationReport,
    compute_f_position,
    ratio_vs_F,
    true_f_position,
    verify_f_rectifying,
)
from .geometry import (
    AnalyticCurve,
    ArcLengthCurve,
    FrenetData,
    SampledCurve,
    frenet,
    frenet_residuals,
    ratio_series,
    resample_arclength,
)
from .synthesis import (
    SphericalCurve,
    SynthesisConfig,
    SynthesizedCurve,
    f_position_of_t,
    param_to_arclength,
    spherical_image,
    synthesize,
)

__version__ = "1.0.0"

__all__ = [
    "AnalyticCurve",
    "ArcLengthCurve",
    "ClassificationReport",
    "Expr",
    "FPositionVector",
    "FrectifyError",
    "FrenetData",
    "FunctionSpec",
    "NumericalError",
    "RecoveredFunction",
    "SampledCurve",
    "SphericalCurve",
    "SynthesisConfig",
    "SynthesizedCurve",
    "ValidationError",
    "VerificationReport",
    "classify",
    "compute_f_position",
    "differentiate",
    "evaluate",
    "evaluate_many",
    "f_position_of_t",
    "frenet",
    "frenet_residuals",
    "helix_axis",
    "inverse_eval",
    "make_function_spec",
    "param_to_arclength",
    "parse",
    "primitive_eval",
    "ratio_series",
    "ratio_vs_F",
    "recover_f",
    "resample_arclength",
    "spherical_image",
    "synthesize",
    "to_text",
    "true_f_position",
    "verify_f_rectifying",
]
