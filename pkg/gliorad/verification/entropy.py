"""
Entropy Diagnostic
===================

Tracks the entropy integral

    E(t) = integral over Omega of ( |ln u| + |ln(1 - u)| ) dx

at every time node. E stays finite as long as the state keeps away from
0 and 1 in an integral sense. Values are clipped to [clip, 1 - clip]
before taking logs, and the report records whether clipping happened.
Once a time node is clipped, every later node is flagged as well.
"""

from dataclasses import dataclass, field

import numpy as np

from gliorad.core.fields import SpaceTimeField


DEFAULT_CLIP = 1e-12


@dataclass(frozen=True, eq=False)
class EntropyReport:
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    clip: float
    clipped_at: np.ndarray = field(repr=False)

    @property
    def clipped(self) -> bool:
        return bool(self.clipped_at.any())

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    def summary(self) -> dict:
        return {
            "clip": self.clip,
            "clipped": self.clipped,
            "initial": float(self.values[0]),
            "final": float(self.values[-1]),
            "max": self.max_value,
        }


def entropy_diagnostic(state: SpaceTimeField, clip: float = DEFAULT_CLIP) -> EntropyReport:
    """Per-time entropy integrals of a state field."""
    u = state.values
    low, high = clip, 1.0 - clip
    clipped_now = np.any((u < low) | (u > high), axis=0)
    bounded = np.clip(u, low, high)
    density = np.abs(np.log(bounded)) + np.abs(np.log1p(-bounded))
    values = density.sum(axis=0) * state.grid.cell_volume
    return EntropyReport(
        times=np.array(state.grid.times),
        values=values,
        clip=clip,
        clipped_at=np.logical_or.accumulate(clipped_now),
    )
