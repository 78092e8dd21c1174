"""Nested calibration of variance models to option quote surfaces."""

from .engine import SmileEngine
from .fit import (CalibrationConfig, CalibrationResult, DEFAULT_BOUNDS,
                  PARAM_ORDER, build_plan, calibrate, calibrate_rho_curve,
                  evaluate_theta, fit_xi0, make_engine)
from .loss import DEFAULT_CUTOFF, LossBreakdown, ModelVol, loss, quote_weight

__all__ = [
    "SmileEngine",
    "CalibrationConfig",
    "CalibrationResult",
    "DEFAULT_BOUNDS",
    "PARAM_ORDER",
    "build_plan",
    "calibrate",
    "calibrate_rho_curve",
    "evaluate_theta",
    "fit_xi0",
    "make_engine",
    "DEFAULT_CUTOFF",
    "LossBreakdown",
    "ModelVol",
    "loss",
    "quote_weight",
]
