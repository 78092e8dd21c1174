"""Forward variance curve: piecewise-linear term structure of E[v_t].

The curve is anchored at (0, left_value) and linearly interpolated through
the knots; beyond the last knot it extrapolates flat. When ``left_value``
is None it tracks the first level, which keeps the curve flat before the
first knot even as that level is refitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamError


@dataclass(frozen=True)
class ForwardVarianceCurve:
    """Immutable piecewise-linear forward variance curve.

    Parameters
    ----------
    knots : tuple of float
        Strictly increasing positive times (in years). May be empty,
        giving a constant curve at ``left_value``.
    levels : tuple of float
        Nonnegative variance level at each knot.
    left_value : float or None
        Value at t = 0. None means "equal to the first level".
    """

    knots: tuple
    levels: tuple
    left_value: float | None = None

    def __post_init__(self):
        knots = tuple(float(t) for t in self.knots)
        levels = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "levels", levels)
        if self.left_value is not None:
            object.__setattr__(self, "left_value", float(self.left_value))
        if len(knots) != len(levels):
            raise InvalidParamError("knots and levels must have equal length")
        if len(knots) == 0:
            if self.left_value is None:
                raise InvalidParamError("a knot-free curve needs a left_value")
        else:
            arr = np.asarray(knots)
            if arr[0] <= 0.0 or np.any(np.diff(arr) <= 0.0):
                raise InvalidParamError("knots must be strictly increasing and positive")
        if any(v < 0.0 for v in levels):
            raise InvalidParamError("variance levels must be nonnegative")
        if self.left_value is not None and self.left_value < 0.0:
            raise InvalidParamError("left_value must be nonnegative")

    @classmethod
    def flat(cls, level: float) -> "ForwardVarianceCurve":
        """Constant curve at the given level."""
        return cls(knots=(), levels=(), left_value=float(level))

    @property
    def anchor(self) -> float:
        """Resolved value at t = 0."""
        return self.levels[0] if self.left_value is None else self.left_value

    def __call__(self, t):
        """Evaluate the curve at scalar or array times t >= 0."""
        t = np.asarray(t, dtype=float)
        if len(self.knots) == 0:
            out = np.full_like(t, self.anchor)
            return out if out.ndim else float(out)
        xp = np.concatenate(([0.0], np.asarray(self.knots)))
        fp = np.concatenate(([self.anchor], np.asarray(self.levels)))
        out = np.interp(t, xp, fp)
        return out if out.ndim else float(out)

    def with_level(self, i: int, value: float) -> "ForwardVarianceCurve":
        """Copy of the curve with level i replaced."""
        if not 0 <= i < len(self.levels):
            raise IndexError(f"level index {i} out of range [0, {len(self.levels)})")
        if value < 0.0:
            raise InvalidParamError("variance levels must be nonnegative")
        levels = list(self.levels)
        levels[i] = float(value)
        return ForwardVarianceCurve(self.knots, tuple(levels), self.left_value)

    def to_json(self) -> str:
        payload = {
            "left_value": self.left_value,
            "knots": list(self.knots),
            "levels": list(self.levels),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ForwardVarianceCurve":
        payload = json.loads(text)
        return cls(
            knots=tuple(payload["knots"]),
            levels=tuple(payload["levels"]),
            left_value=payload.get("left_value"),
        )
