"""Four-corner periodic cropping and per-block L1 energies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CORNERS = ("top_left", "top_right", "bottom_left", "bottom_right")


@dataclass(frozen=True)
class Periodicity:
    """Size of one periodic unit.

    ``rows`` is the number of pixel rows in a unit (the column
    periodicity, P_c) and ``cols`` the number of pixel columns (the row
    periodicity, P_r).
    """

    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise ValueError(f"periodicity must be integral, got {self.rows}x{self.cols}")
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"periodic unit must be at least 2x2, got {self.rows}x{self.cols}")


@dataclass(frozen=True)
class CropSpec:
    corner: str
    row_offset: int
    col_offset: int
    height: int
    width: int

    def window(self) -> tuple[slice, slice]:
        return (slice(self.row_offset, self.row_offset + self.height),
                slice(self.col_offset, self.col_offset + self.width))


@dataclass
class BlockGrid:
    """Block energies of one crop, plus the defect label of every block.

    Blocks are indexed ``[block_row, block_col]``; flattening in row-major
    order gives the leaf order used for clustering.
    """

    crop: CropSpec
    period: Periodicity
    energies: np.ndarray
    defective: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.defective is None:
            self.defective = np.zeros(self.energies.shape, dtype=bool)

    @property
    def rows(self) -> int:
        return self.energies.shape[0]

    @property
    def cols(self) -> int:
        return self.energies.shape[1]

    def block_bounds(self, i: int, j: int) -> tuple[int, int, int, int]:
        """Full-image ``(top, left, bottom, right)`` of block (i, j), end-exclusive."""
        top = self.crop.row_offset + i * self.period.rows
        left = self.crop.col_offset + j * self.period.cols
        return top, left, top + self.period.rows, left + self.period.cols


def crop_sizes(m: int, n: int, period: Periodicity) -> tuple[int, int]:
    """Largest multiple of the unit that fits: ``floor(M / P_c) * P_c`` and likewise for N."""
    if m < 2 * period.rows or n < 2 * period.cols:
        raise ValueError(
            f"image {m}x{n} holds fewer than two {period.rows}x{period.cols} units per axis"
        )
    return (m // period.rows) * period.rows, (n // period.cols) * period.cols


def four_corner_crops(m: int, n: int, period: Periodicity) -> list[CropSpec]:
    mc, nc = crop_sizes(m, n, period)
    dr, dc = m - mc, n - nc
    offsets = {
        "top_left": (0, 0),
        "top_right": (0, dc),
        "bottom_left": (dr, 0),
        "bottom_right": (dr, dc),
    }
    return [CropSpec(c, *offsets[c], mc, nc) for c in CORNERS]


def block_energies(fused: np.ndarray, crop: CropSpec, period: Periodicity) -> BlockGrid:
    """Sum of ``|fused|`` over every periodic block inside ``crop``."""
    m, n = fused.shape
    if (crop.row_offset < 0 or crop.col_offset < 0
            or crop.row_offset + crop.height > m or crop.col_offset + crop.width > n):
        raise ValueError(f"crop {crop} does not fit a {m}x{n} image")
    if crop.height % period.rows or crop.width % period.cols or crop.height == 0 or crop.width == 0:
        raise ValueError(f"crop {crop.height}x{crop.width} is not a multiple of the unit {period}")
    region = np.abs(fused[crop.window()])
    rows, cols = crop.height // period.rows, crop.width // period.cols
    energies = region.reshape(rows, period.rows, cols, period.cols).sum(axis=(1, 3))
    return BlockGrid(crop, period, energies)
