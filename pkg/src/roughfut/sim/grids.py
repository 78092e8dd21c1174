"""Simulation time grids and the two-mesh plan."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GridMismatchError, InvalidParamError

NODE_TOL = 1e-12


def _build_times(maturities, steps_per_year):
    """Lattice of 1/n steps restarted at each maturity.

    Within each segment between consecutive anchor times the spacing is
    exactly 1/n; the final step of a segment is shortened so the segment
    lands exactly on its anchor.
    """
    dt = 1.0 / steps_per_year
    times = [0.0]
    prev = 0.0
    for m in maturities:
        seg = m - prev
        n_full = int(np.floor(seg / dt + NODE_TOL))
        for k in range(1, n_full + 1):
            t = prev + k * dt
            if t < m - NODE_TOL:
                times.append(t)
        times.append(m)
        prev = m
    return np.asarray(times)


@dataclass(frozen=True)
class TimeGrid:
    """Discrete time grid on [0, horizon].

    ``times`` always starts at 0 and is strictly increasing. Steps are
    1/steps_per_year except possibly a shortened step right before each
    anchor time the grid was asked to contain.
    """

    times: np.ndarray
    steps_per_year: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        self.times.setflags(write=False)
        if self.steps_per_year <= 0:
            raise InvalidParamError("steps_per_year must be positive")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0.0):
            raise InvalidParamError("grid times must start at 0 and strictly increase")

    @classmethod
    def regular(cls, horizon: float, steps_per_year: int,
                include=()) -> "TimeGrid":
        """Grid to ``horizon`` containing every time in ``include`` as a node."""
        if horizon <= 0.0:
            raise InvalidParamError("horizon must be positive")
        if steps_per_year <= 0:
            raise InvalidParamError("steps_per_year must be positive")
        anchors = sorted({float(horizon), *[float(t) for t in include]})
        if anchors[0] <= 0.0:
            raise InvalidParamError("included times must be positive")
        if anchors[-1] > horizon + NODE_TOL:
            raise InvalidParamError("included times must not exceed the horizon")
        return cls(_build_times(anchors, steps_per_year), steps_per_year)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def uniform_dt(self) -> float | None:
        """Common step size if the grid is uniform, else None."""
        d = self.dt
        if np.all(np.abs(d - d[0]) < 1e-12):
            return float(d[0])
        return None

    def index_of(self, t: float) -> int:
        """Node index of time t, raising GridMismatchError if absent."""
        i = int(np.searchsorted(self.times, t - 1e-9))
        if i >= len(self.times) or abs(self.times[i] - t) > 1e-9:
            raise GridMismatchError(f"t={t} is not a node of the grid")
        return i


@dataclass(frozen=True)
class DualMeshPlan:
    """Fine mesh to the earliest maturity, coarse mesh for the rest."""

    fine: TimeGrid
    coarse: TimeGrid
    assignment: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fine.steps_per_year < self.coarse.steps_per_year:
            raise InvalidParamError("fine mesh must be at least as dense as coarse")

    @classmethod
    def from_maturities(cls, maturities, n_fine: int = 2000,
                        n_coarse: int = 300) -> "DualMeshPlan":
        mats = sorted(float(t) for t in maturities)
        if len(mats) == 0:
            raise InvalidParamError("at least one maturity is required")
        if mats[0] <= 0.0:
            raise InvalidParamError("maturities must be positive")
        fine = TimeGrid.regular(mats[0], n_fine)
        coarse = TimeGrid.regular(mats[-1], n_coarse, include=mats)
        assignment = {mats[0]: "fine"}
        for m in mats[1:]:
            assignment[m] = "coarse"
        return cls(fine=fine, coarse=coarse, assignment=assignment)

    def mesh_for(self, maturity: float) -> str:
        for m, name in self.assignment.items():
            if abs(m - maturity) < 1e-9:
                return name
        raise GridMismatchError(f"maturity {maturity} not covered by the plan")
