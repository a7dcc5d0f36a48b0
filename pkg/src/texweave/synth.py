"""Seeded periodic textures with injected defects and exact truth masks.

Stands in for real patterned-fabric images. Each texture tiles a motif
of ``unit.rows x unit.cols`` pixels ``periods`` times per axis; a defect
then replaces or perturbs a region, and the returned mask marks exactly
the pixels that were changed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import Periodicity

KINDS = ("checker", "stripes", "dots")
DEFECTS = ("none", "bar", "hole", "blob")


@dataclass(frozen=True)
class DefectBox:
    top: int
    left: int
    height: int
    width: int


def _motif(kind: str, unit: Periodicity) -> np.ndarray:
    r, c = unit.rows, unit.cols
    y = np.arange(r)[:, None]
    x = np.arange(c)[None, :]
    if kind == "checker":
        quad = (y < r // 2) ^ (x < c // 2)
        tile = np.where(quad, 0.6, 0.4)
        # small mark in one quadrant so the unit is not a 2x2 sub-lattice
        tile[r // 8:r // 8 + max(1, r // 8), c // 8:c // 8 + max(1, c // 8)] = 0.5
        return tile
    if kind == "stripes":
        band = (y >= r // 3) & (y < 2 * r // 3)
        line = (x >= c // 2 - max(1, c // 12)) & (x <= c // 2 + max(1, c // 12))
        return np.where(band, 0.58, 0.4) + np.where(line, 0.08, 0.0)
    if kind == "dots":
        cy, cx = (r - 1) / 2, (c - 1) / 2
        rad = min(r, c) / 4
        disk = (y - cy) ** 2 + (x - cx) ** 2 <= rad * rad
        return np.where(disk, 0.62, 0.42)
    raise ValueError(f"unknown texture kind {kind!r}; expected one of {KINDS}")


def texture(kind: str, periods: tuple[int, int], unit: Periodicity) -> np.ndarray:
    """Defect-free tiling of the motif."""
    if periods[0] < 2 or periods[1] < 2:
        raise ValueError(f"need at least two periods per axis, got {periods}")
    return np.tile(_motif(kind, unit), periods)


def _inset(rng, span: int, size: int) -> int:
    """Offset of a ``size`` run inside ``span`` pixels, kept clear of both ends.

    The margin is a quarter unit (the pipeline kernel's half-width) where
    room allows, so an aligned defect does not bleed into the next block.
    """
    margin = min(span // 4, (span - size) // 2)
    return int(rng.integers(margin, span - size - margin + 1))


def _place(rng, size: tuple[int, int], unit: Periodicity, periods, aligned: bool) -> tuple[int, int]:
    """Top-left of a ``size`` box inside one unit, or centred on a unit corner."""
    h, w = size
    if aligned:
        bi = int(rng.integers(0, periods[0]))
        bj = int(rng.integers(0, periods[1]))
        return bi * unit.rows + _inset(rng, unit.rows, h), bj * unit.cols + _inset(rng, unit.cols, w)
    # interior lattice corner, so the box straddles up to four blocks
    ci = int(rng.integers(1, periods[0]))
    cj = int(rng.integers(1, periods[1]))
    top = ci * unit.rows - h // 2 + int(rng.integers(-(h // 4), h // 4 + 1))
    left = cj * unit.cols - w // 2 + int(rng.integers(-(w // 4), w // 4 + 1))
    return top, left


def _defect_level(rng) -> float:
    # defects read brighter than the weave, as with a backlit hole or loose yarn
    return float(rng.uniform(0.9, 1.0))


def inject(img: np.ndarray, defect: str, unit: Periodicity, periods, rng, aligned: bool = True,
           bar_units: int = 3) -> tuple[np.ndarray, np.ndarray, DefectBox | None]:
    """Apply one defect to a copy of ``img``; returns (image, mask, box)."""
    out = img.copy()
    gt = np.zeros(img.shape, dtype=bool)
    if defect == "none":
        return out, gt, None
    r, c = unit.rows, unit.cols
    if defect == "hole":
        h = max(2, int(rng.integers(r // 3, r // 2 + 1)))
        w = max(2, int(rng.integers(c // 3, c // 2 + 1)))
        top, left = _place(rng, (h, w), unit, periods, aligned)
        gt[top:top + h, left:left + w] = True
        out[gt] = _defect_level(rng)
    elif defect == "blob":
        h = max(3, int(rng.integers(r // 3, r // 2 + 1)))
        w = h if c >= h else c
        top, left = _place(rng, (h, w), unit, periods, aligned)
        yy, xx = np.mgrid[0:h, 0:w]
        cy, cx = (h - 1) / 2, (w - 1) / 2
        rad2 = (h / 2) ** 2
        d2 = (yy - cy) ** 2 + (xx - cx) ** 2
        inside = d2 < rad2
        amp = float(rng.uniform(0.35, 0.5))
        bump = np.where(inside, amp * (1.0 - d2 / rad2) + 0.1, 0.0)
        gt[top:top + h, left:left + w] = inside
        out[top:top + h, left:left + w] += bump
    elif defect == "bar":
        thick = max(2, int(rng.integers(r // 8, r // 4 + 1)))
        length = bar_units * c
        if aligned:
            bi = int(rng.integers(0, periods[0]))
            bj = int(rng.integers(0, periods[1] - bar_units + 1))
            top = bi * r + _inset(rng, r, thick)
            left = bj * c
        else:
            top = int(rng.integers(1, periods[0])) * r - thick // 2
            left = int(rng.integers(0, periods[1] - bar_units)) * c + c // 2
        gt[top:top + thick, left:left + length] = True
        out[gt] = _defect_level(rng)
    else:
        raise ValueError(f"unknown defect {defect!r}; expected one of {DEFECTS}")
    ys, xs = np.nonzero(gt)
    box = DefectBox(int(ys.min()), int(xs.min()), int(ys.max() - ys.min() + 1), int(xs.max() - xs.min() + 1))
    return out, gt, box


def synthesize(kind: str = "checker", periods: tuple[int, int] = (8, 8),
               unit: Periodicity = Periodicity(25, 25), defect: str = "none", seed: int = 0,
               aligned: bool = True, noise: float = 0.02) -> tuple[np.ndarray, np.ndarray]:
    """Build a texture and its ground-truth mask; bit-identical for a given seed."""
    rng = np.random.default_rng(seed)
    img = texture(kind, periods, unit)
    img, gt, _ = inject(img, defect, unit, periods, rng, aligned)
    if noise > 0:
        img = img + rng.normal(0.0, noise, img.shape)
    return np.clip(img, 0.0, 1.0), gt
