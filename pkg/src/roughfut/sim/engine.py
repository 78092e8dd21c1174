"""Top-level path simulation across one grid or the two-mesh plan."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParamError
from .grids import DualMeshPlan, TimeGrid
from .params import (BergomiParams, HestonParams, ModelSpec, PathBatch,
                     RBergomiParams, RHestonParams)
from .rheston import rheston_variance
from .spot import spot_paths
from .variance import classical_variance, rbergomi_paths


def variance_paths(params, grid: TimeGrid, n_paths: int, seed,
                   backend: str = "hqe"):
    """Dispatch variance simulation by model family."""
    if isinstance(params, RBergomiParams):
        return rbergomi_paths(params, grid, n_paths, seed)
    if isinstance(params, RHestonParams):
        return rheston_variance(params, grid, n_paths, seed, backend=backend)
    if isinstance(params, (BergomiParams, HestonParams)):
        return classical_variance(params, grid, n_paths, seed)
    raise InvalidParamError(f"unsupported variance model {type(params).__name__}")


def _simulate_one(model: ModelSpec, grid: TimeGrid, n_paths: int, seed_int: int,
                  mesh_ss: np.random.SeedSequence, backend: str) -> PathBatch:
    var_ss, spot_ss = mesh_ss.spawn(2)
    v, dw2, diag = variance_paths(model.variance, grid, n_paths, var_ss,
                                  backend=backend)
    s = spot_paths(model.spot, v, dw2, grid, spot_ss)
    return PathBatch(grid=grid, s=s, v=v, seed=seed_int, n_paths=n_paths,
                     diagnostics=diag)


def simulate(model: ModelSpec, plan, n_paths: int, seed: int,
             backend: str = "hqe") -> dict:
    """Simulate path batches for a TimeGrid or a DualMeshPlan.

    Returns a dict keyed "single" for a plain grid, or "fine"/"coarse" for
    a dual-mesh plan, where the two meshes use independent substreams
    derived from the master seed. Output is a pure function of
    (model, plan, n_paths, seed, backend).
    """
    if n_paths <= 0:
        raise InvalidParamError("n_paths must be positive")
    master = np.random.SeedSequence(seed)
    if isinstance(plan, TimeGrid):
        return {"single": _simulate_one(model, plan, n_paths, seed, master,
                                        backend)}
    if isinstance(plan, DualMeshPlan):
        fine_ss, coarse_ss = master.spawn(2)
        return {
            "fine": _simulate_one(model, plan.fine, n_paths, seed, fine_ss,
                                  backend),
            "coarse": _simulate_one(model, plan.coarse, n_paths, seed,
                                    coarse_ss, backend),
        }
    raise InvalidParamError("plan must be a TimeGrid or a DualMeshPlan")
