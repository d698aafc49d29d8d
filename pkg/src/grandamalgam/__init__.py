"""Grand Lebesgue and grand Wiener amalgam norms on finite intervals.

Evaluates sup-over-exponent norms of closed-form functions, the two-level
sliding-window amalgam norms built from them, small-space upper bounds and
Hoelder pairings, and runs a theorem-keyed verification suite over a fixed
function corpus.
"""

from .expressions import (
    Constant,
    ExpressionError,
    FunctionExpr,
    Indicator,
    MeasureSpace,
    Power,
    Product,
    Scale,
    SingularPointError,
    Sum,
    TruncateAbove,
    evaluate,
)
from .grandnorm import (
    GrandExponent,
    NormOutcome,
    SequenceData,
    eps_inf_conjugate,
    grand_norm,
    grand_seq_norm,
    phi,
)
from .quadrature import (
    DivergentIntegralError,
    QuadratureResult,
    ToleranceError,
    integrate_power_mean,
)
from .closedform import closed_form_rnorm
from .amalgam import (
    ControlCurve,
    Window,
    amalgam_norm,
    classical_amalgam_norm,
    control_curve,
    diagonal_ratio,
)
from .smalldual import (
    Decomposition,
    PairingReport,
    associate_lower_bound,
    dual_amalgam_upper,
    holder_pairing,
    small_norm_upper,
)

__version__ = "0.1.0"

__all__ = [
    "Constant",
    "ControlCurve",
    "Decomposition",
    "DivergentIntegralError",
    "ExpressionError",
    "FunctionExpr",
    "GrandExponent",
    "Indicator",
    "MeasureSpace",
    "NormOutcome",
    "PairingReport",
    "Power",
    "Product",
    "QuadratureResult",
    "Scale",
    "SequenceData",
    "SingularPointError",
    "Sum",
    "ToleranceError",
    "TruncateAbove",
    "Window",
    "amalgam_norm",
    "associate_lower_bound",
    "classical_amalgam_norm",
    "closed_form_rnorm",
    "control_curve",
    "diagonal_ratio",
    "dual_amalgam_upper",
    "eps_inf_conjugate",
    "evaluate",
    "grand_norm",
    "grand_seq_norm",
    "holder_pairing",
    "integrate_power_mean",
    "phi",
    "small_norm_upper",
]
