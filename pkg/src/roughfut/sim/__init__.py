from .engine import simulate, variance_paths
from .grids import DualMeshPlan, TimeGrid
from .params import (BergomiParams, CorrTermStructure, HestonParams, ModelSpec,
                     PathBatch, RBergomiParams, RHestonParams, SpotParams)
from .rheston import forward_variance_from_heston, rheston_variance
from .spot import spot_paths
from .variance import classical_variance, rbergomi_paths, rbergomi_variance
from .volterra import scheme_node_variance, volterra_paths

__all__ = [
    "BergomiParams",
    "CorrTermStructure",
    "DualMeshPlan",
    "HestonParams",
    "ModelSpec",
    "PathBatch",
    "RBergomiParams",
    "RHestonParams",
    "SpotParams",
    "TimeGrid",
    "classical_variance",
    "forward_variance_from_heston",
    "rbergomi_paths",
    "rbergomi_variance",
    "rheston_variance",
    "scheme_node_variance",
    "simulate",
    "spot_paths",
    "variance_paths",
    "volterra_paths",
]
