"""Model parameter types and the simulated path container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParamError
from ..fv_curve import ForwardVarianceCurve
from .grids import TimeGrid


@dataclass(frozen=True)
class CorrTermStructure:
    """Piecewise-constant spot/variance correlation.

    Lookups follow the left node of a simulation step: ``at(t)`` returns
    ``values[i]`` for t in [boundaries[i-1], boundaries[i]), so a step
    starting exactly at a boundary already belongs to the next bucket.
    The last value extends beyond the last boundary.
    """

    boundaries: tuple
    values: tuple

    def __post_init__(self):
        bs = tuple(float(b) for b in self.boundaries)
        vs = tuple(float(v) for v in self.values)
        object.__setattr__(self, "boundaries", bs)
        object.__setattr__(self, "values", vs)
        if len(bs) != len(vs):
            raise InvalidParamError("one correlation value per bucket boundary")
        if len(bs) == 0:
            raise InvalidParamError("at least one bucket is required")
        arr = np.asarray(bs)
        if arr[0] <= 0.0 or np.any(np.diff(arr) <= 0.0):
            raise InvalidParamError("boundaries must be strictly increasing, positive")
        for v in vs:
            if not -1.0 <= v <= 1.0:
                raise InvalidParamError("correlations must lie in [-1, 1]")

    def at(self, t):
        """Correlation in force for the step starting at time t."""
        idx = np.searchsorted(np.asarray(self.boundaries), np.asarray(t), side="right")
        idx = np.minimum(idx, len(self.values) - 1)
        vals = np.asarray(self.values)[idx]
        return vals if vals.ndim else float(vals)


def _corr_values(corr):
    if isinstance(corr, CorrTermStructure):
        return corr.values
    return (float(corr),)


@dataclass(frozen=True)
class RBergomiParams:
    """Rough Bergomi variance parameters."""

    h: float
    eta: float
    xi0: ForwardVarianceCurve

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise InvalidParamError("h must lie in (0, 1)")
        if self.eta < 0.0:
            raise InvalidParamError("eta must be nonnegative")


@dataclass(frozen=True)
class RHestonParams:
    """Rough Heston variance parameters, driven by the forward variance curve."""

    h: float
    eta: float
    kappa: float
    xi0: ForwardVarianceCurve

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise InvalidParamError("h must lie in (0, 1)")
        if self.eta < 0.0:
            raise InvalidParamError("eta must be nonnegative")
        if self.kappa <= 0.0:
            raise InvalidParamError("kappa must be positive")


@dataclass(frozen=True)
class BergomiParams:
    """Classical one-factor Bergomi variance parameters."""

    eta: float
    kappa: float
    xi0: ForwardVarianceCurve

    def __post_init__(self):
        if self.eta < 0.0:
            raise InvalidParamError("eta must be nonnegative")
        if self.kappa <= 0.0:
            raise InvalidParamError("kappa must be positive")


@dataclass(frozen=True)
class HestonParams:
    """Classical Heston variance parameters with a term structure of v_bar."""

    eta: float
    kappa: float
    v0: float
    vbar: ForwardVarianceCurve

    def __post_init__(self):
        if self.eta < 0.0:
            raise InvalidParamError("eta must be nonnegative")
        if self.kappa <= 0.0:
            raise InvalidParamError("kappa must be positive")
        if self.v0 < 0.0:
            raise InvalidParamError("v0 must be nonnegative")


@dataclass(frozen=True)
class SpotParams:
    """Normalized spot dynamics: mean reversion speed a and correlation."""

    mean_reversion: float = 0.5
    corr: object = -0.3

    def __post_init__(self):
        if self.mean_reversion < 0.0:
            raise InvalidParamError("mean reversion speed a must be nonnegative")
        for v in _corr_values(self.corr):
            if not -1.0 <= v <= 1.0:
                raise InvalidParamError("correlations must lie in [-1, 1]")

    def corr_at(self, t):
        if isinstance(self.corr, CorrTermStructure):
            return self.corr.at(t)
        return self.corr


VARIANCE_FAMILIES = {
    RBergomiParams: "rbergomi",
    RHestonParams: "rheston",
    BergomiParams: "bergomi",
    HestonParams: "heston",
}


@dataclass(frozen=True)
class ModelSpec:
    """A variance model plus the shared spot dynamics and futures curve.

    The rough Bergomi family requires strictly negative spot correlation;
    a nonnegative value is rejected here rather than clipped.
    """

    variance: object
    spot: SpotParams
    futures: object = None

    def __post_init__(self):
        if type(self.variance) not in VARIANCE_FAMILIES:
            raise InvalidParamError(
                f"unsupported variance model {type(self.variance).__name__}")
        if isinstance(self.variance, RBergomiParams):
            for v in _corr_values(self.spot.corr):
                if v >= 0.0:
                    raise InvalidParamError(
                        "rough Bergomi requires spot correlation < 0 "
                        "(martingale property fails otherwise)")

    @property
    def family(self) -> str:
        return VARIANCE_FAMILIES[type(self.variance)]


@dataclass
class PathBatch:
    """Simulated paths of the normalized spot and its variance on one grid.

    Arrays have shape (n_paths, n_nodes) and are marked read-only after
    construction; treat the batch as immutable.
    """

    grid: TimeGrid
    s: np.ndarray
    v: np.ndarray
    seed: int
    n_paths: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.s, self.v):
            if arr.shape != (self.n_paths, len(self.grid.times)):
                raise InvalidParamError("path array shape does not match the grid")
            arr.setflags(write=False)
