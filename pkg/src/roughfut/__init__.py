"""Rough volatility models for commodity futures.

A normalized spot process drives a whole futures curve through a
mean-reverting map; variance follows one of four models (rough Bergomi,
rough Heston, classical Bergomi, classical Heston). The package covers
simulation, option pricing, calibration to quote surfaces, and
roughness estimation from realized variance.
"""

from .errors import (
    RoughFutError,
    ParseError,
    InvariantError,
    EmptyOutputError,
    InvalidParamError,
    GridMismatchError,
    OutOfBandError,
    AlignmentError,
    InsufficientDataError,
    DegenerateRegressionError,
)
from .fv_curve import ForwardVarianceCurve
from .pricing import (
    FuturesCurve,
    VanillaSpec,
    SmilePoint,
    futures_price,
    black_price,
    implied_vol,
    mc_vanilla,
    smile_from_batch,
    model_smile,
    atm_term_structure,
)
from .sim import (
    TimeGrid,
    DualMeshPlan,
    CorrTermStructure,
    RBergomiParams,
    RHestonParams,
    BergomiParams,
    HestonParams,
    SpotParams,
    ModelSpec,
    PathBatch,
    simulate,
    variance_paths,
    forward_variance_from_heston,
)
from .market_data import (
    FuturesContract,
    OptionQuote,
    QuoteSurface,
    IntradaySeries,
    load_quote_surface,
    save_quote_surface,
    load_intraday,
    load_calendar,
    daily_rv_proxies,
)
from .hurst import (MomentTable, HurstFit, fbm_series, moments,
                    estimate_h, regression_points)
from .calibration import (
    SmileEngine,
    CalibrationConfig,
    CalibrationResult,
    LossBreakdown,
    ModelVol,
    loss,
    fit_xi0,
    calibrate,
    calibrate_rho_curve,
)

__version__ = "0.1.0"

__all__ = [
    "RoughFutError",
    "ParseError",
    "InvariantError",
    "EmptyOutputError",
    "InvalidParamError",
    "GridMismatchError",
    "OutOfBandError",
    "AlignmentError",
    "InsufficientDataError",
    "DegenerateRegressionError",
    "ForwardVarianceCurve",
    "FuturesCurve",
    "VanillaSpec",
    "SmilePoint",
    "futures_price",
    "black_price",
    "implied_vol",
    "mc_vanilla",
    "smile_from_batch",
    "model_smile",
    "atm_term_structure",
    "TimeGrid",
    "DualMeshPlan",
    "CorrTermStructure",
    "RBergomiParams",
    "RHestonParams",
    "BergomiParams",
    "HestonParams",
    "SpotParams",
    "ModelSpec",
    "PathBatch",
    "simulate",
    "variance_paths",
    "forward_variance_from_heston",
    "FuturesContract",
    "OptionQuote",
    "QuoteSurface",
    "IntradaySeries",
    "load_quote_surface",
    "save_quote_surface",
    "load_intraday",
    "load_calendar",
    "daily_rv_proxies",
    "MomentTable",
    "HurstFit",
    "moments",
    "estimate_h",
    "fbm_series",
    "regression_points",
    "SmileEngine",
    "CalibrationConfig",
    "CalibrationResult",
    "LossBreakdown",
    "ModelVol",
    "loss",
    "fit_xi0",
    "calibrate",
    "calibrate_rho_curve",
    "__version__",
]
