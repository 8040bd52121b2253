"""Ratios-conjecture prediction and zero data for the 1-level density of
even quadratic twists of an elliptic-curve L-function."""

__version__ = "0.1.0"

from .curve import CurveData, e11
from .lfun import determine_sign


def prepared_e11() -> CurveData:
    """The conductor-11 curve with its functional-equation sign determined
    numerically (never hard-coded)."""
    curve = e11()
    curve.omega = determine_sign(curve)
    return curve
