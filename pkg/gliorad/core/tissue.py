"""
Tissue Maps
============

Assigns every cell a diffusion coefficient: d_white inside the white-matter
region, d_grey everywhere else. Tumor cells invade white matter much faster,
so d_white >> d_grey > 0 in practice.

Three region descriptors are supported, selected by `kind` in the config:

    intervals  1D closed intervals [a, b]. With `coordinates: fraction`
               the endpoints are fractions of `reference_length` (the
               domain length when unset).
    ellipse    2D region ((x-cx)/a)^2 + ((y-cy)/b)^2 <= 1. The defaults
               (domain center, semi-axes 1 and 0.5) give the region
               (x - L/2)^2 + 4 (y - L/2)^2 <= 1.
    labels     explicit per-cell "white" / "grey" labels.

A cell is white iff its center satisfies the region predicate.
"""

from dataclasses import dataclass, field
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gliorad.core.errors import ConfigurationError
from gliorad.core.grid import Grid
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)


class IntervalRegion(BaseModel):
    """White matter as a union of closed 1D intervals."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["intervals"] = "intervals"
    intervals: list[tuple[float, float]] = [(0.15, 0.35)]
    coordinates: Literal["absolute", "fraction"] = "absolute"
    reference_length: float | None = None

    def resolved_intervals(self, grid: Grid) -> list[tuple[float, float]]:
        """Intervals in absolute coordinates."""
        if self.coordinates == "absolute":
            return [(float(a), float(b)) for a, b in self.intervals]
        scale = self.reference_length if self.reference_length is not None else grid.lengths[0]
        if scale <= 0:
            raise ConfigurationError(
                f"must be positive, got {scale}", "tissue.region.reference_length"
            )
        return [(a * scale, b * scale) for a, b in self.intervals]

    def white_mask(self, grid: Grid) -> np.ndarray:
        if grid.dim != 1:
            raise ConfigurationError("interval regions need a 1D grid", "tissue.region.kind")
        x = grid.coordinates[0]
        mask = np.zeros(grid.num_cells, dtype=bool)
        for index, (a, b) in enumerate(self.resolved_intervals(grid)):
            if a > b:
                raise ConfigurationError(
                    f"interval start {a} exceeds end {b}", f"tissue.region.intervals.{index}"
                )
            mask |= (x >= a) & (x <= b)
        return mask


class EllipseRegion(BaseModel):
    """White matter as an axis-aligned 2D ellipse."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["ellipse"] = "ellipse"
    center: tuple[float, float] | None = None
    semi_axes: tuple[float, float] = (1.0, 0.5)

    def white_mask(self, grid: Grid) -> np.ndarray:
        if grid.dim != 2:
            raise ConfigurationError("ellipse regions need a 2D grid", "tissue.region.kind")
        a, b = self.semi_axes
        if a <= 0 or b <= 0:
            raise ConfigurationError(
                f"semi-axes must be positive, got {self.semi_axes}", "tissue.region.semi_axes"
            )
        cx, cy = self.center if self.center is not None else (
            grid.lengths[0] / 2, grid.lengths[1] / 2
        )
        x, y = grid.coordinates
        return ((x - cx) / a) ** 2 + ((y - cy) / b) ** 2 <= 1.0


class LabelRegion(BaseModel):
    """White matter given cell by cell."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["labels"] = "labels"
    labels: list[Literal["white", "grey"]]

    def white_mask(self, grid: Grid) -> np.ndarray:
        if len(self.labels) != grid.num_cells:
            raise ConfigurationError(
                f"expected {grid.num_cells} labels, got {len(self.labels)}",
                "tissue.region.labels",
            )
        return np.array([label == "white" for label in self.labels], dtype=bool)


RegionSpec = Annotated[IntervalRegion | EllipseRegion | LabelRegion, Field(discriminator="kind")]


class TissueConfig(BaseModel):
    """Tissue section of a run config."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    region: RegionSpec = IntervalRegion()
    d_white: float = 1.0
    d_grey: float = 0.001


@dataclass(frozen=True, eq=False)
class TissueMap:
    """Per-cell diffusion coefficients on a grid."""

    grid: Grid
    white: np.ndarray = field(repr=False)
    diffusion: np.ndarray = field(repr=False)
    d_white: float
    d_grey: float

    @property
    def white_measure(self) -> float:
        """|Omega_w| as resolved on the grid."""
        return float(np.count_nonzero(self.white)) * self.grid.cell_volume

    @property
    def labels(self) -> list[str]:
        return ["white" if w else "grey" for w in self.white]


def build_tissue_map(
    grid: Grid,
    regions: IntervalRegion | EllipseRegion | LabelRegion,
    d_white: float,
    d_grey: float,
) -> TissueMap:
    """
    Evaluate the region predicate at every cell center.

    Raises:
        ConfigurationError: non-positive diffusion or a region that does not
            fit the grid.
    """
    if not d_white > 0:
        raise ConfigurationError(f"must be positive, got {d_white}", "tissue.d_white")
    if not d_grey > 0:
        raise ConfigurationError(f"must be positive, got {d_grey}", "tissue.d_grey")

    white = np.asarray(regions.white_mask(grid), dtype=bool)
    diffusion = np.where(white, float(d_white), float(d_grey))
    white.setflags(write=False)
    diffusion.setflags(write=False)

    tissue = TissueMap(
        grid=grid, white=white, diffusion=diffusion, d_white=float(d_white), d_grey=float(d_grey)
    )
    logger.debug(
        f"Tissue map: {np.count_nonzero(white)}/{grid.num_cells} white cells "
        f"({regions.kind}), D_w={d_white}, D_g={d_grey}"
    )
    return tissue


def tissue_from_config(grid: Grid, config: TissueConfig) -> TissueMap:
    """Shorthand for `build_tissue_map` on a TissueConfig section."""
    return build_tissue_map(grid, config.region, config.d_white, config.d_grey)
