"""Complex Gabor wavelet bank.

Each kernel is a Gaussian envelope times a DC-corrected complex plane
wave::

    psi(z) = (k^2 / s^2) exp(-k^2 |z|^2 / (2 s^2)) [exp(i k.z) - exp(-s^2 / 2)]

with wave vector ``k = k_v (cos theta, sin theta)``, ``k_v = k_max / f**v``
and ``theta = j * pi / n_orientations``. Defaults are five scales, eight
orientations, ``s = 2 pi``, ``k_max = pi / 2`` and ``f = sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .blocks import Periodicity
from .imaging import minmax_normalize, save_grayscale


@dataclass(frozen=True)
class GaborBankConfig:
    """Parameters of a Gabor bank.

    ``kernel_height``/``kernel_width`` left as ``None`` give a window that
    spans three envelope standard deviations at the coarsest scale, which
    is wide enough for the kernels to be numerically DC-free. The
    inspection pipeline instead sizes the window from the periodic unit
    (see :func:`kernel_size_from_periodicity`).
    """

    num_scales: int = 5
    num_orientations: int = 8
    sigma: float = 2 * math.pi
    k_max: float = math.pi / 2
    spacing: float = math.sqrt(2)
    kernel_height: int | None = None
    kernel_width: int | None = None

    def __post_init__(self):
        if self.num_scales < 1 or self.num_orientations < 1:
            raise ValueError("num_scales and num_orientations must be >= 1")
        if not (self.sigma > 0 and self.k_max > 0):
            raise ValueError("sigma and k_max must be positive")
        if not self.spacing > 1:
            raise ValueError("spacing factor f must be > 1")
        for dim in (self.kernel_height, self.kernel_width):
            if dim is not None and (int(dim) != dim or dim < 3):
                raise ValueError(f"kernel dimensions must be integers >= 3, got {dim}")

    @property
    def kernel_shape(self) -> tuple[int, int]:
        full = envelope_support(self)
        return (self.kernel_height or full, self.kernel_width or full)

    def wavenumber(self, v: int) -> float:
        return self.k_max / self.spacing**v

    def orientation(self, j: int) -> float:
        return j * math.pi / self.num_orientations

    def with_periodicity(self, period: Periodicity) -> "GaborBankConfig":
        h, w = kernel_size_from_periodicity(period)
        return replace(self, kernel_height=h, kernel_width=w)


def envelope_support(cfg: GaborBankConfig) -> int:
    """Odd window covering +-3 envelope std devs at the coarsest scale."""
    k_min = cfg.wavenumber(cfg.num_scales - 1)
    # tolerance keeps exact multiples (48.000000001) from rounding up
    return 2 * math.ceil(3 * cfg.sigma / k_min - 1e-9) + 1


@dataclass(frozen=True)
class GaborKernel:
    scale: int
    orientation_index: int
    theta: float
    k: float
    values: np.ndarray = field(repr=False)

    @property
    def center(self) -> tuple[int, int]:
        h, w = self.values.shape
        return ((h - 1) // 2, (w - 1) // 2)


def kernel_size_from_periodicity(period: Periodicity) -> tuple[int, int]:
    """Half the periodic unit in each axis, clamped to at least 3."""
    if period.rows < 2 or period.cols < 2:
        raise ValueError(f"periodic unit must be at least 2x2, got {period}")
    return max(3, period.rows // 2), max(3, period.cols // 2)


def gabor_values(k: float, theta: float, sigma: float, shape: tuple[int, int]) -> np.ndarray:
    """Sample one Gabor wavelet on a grid centred at ``floor((dim - 1) / 2)``."""
    h, w = shape
    y = np.arange(h, dtype=np.float64) - (h - 1) // 2
    x = np.arange(w, dtype=np.float64) - (w - 1) // 2
    yy, xx = np.meshgrid(y, x, indexing="ij")
    s2 = sigma * sigma
    envelope = (k * k / s2) * np.exp(-(k * k) * (xx * xx + yy * yy) / (2.0 * s2))
    phase = k * math.cos(theta) * xx + k * math.sin(theta) * yy
    wave = np.exp(1j * phase) - math.exp(-s2 / 2.0)
    return envelope * wave


def make_kernel(cfg: GaborBankConfig, v: int, orientation_index: int) -> GaborKernel:
    if not 0 <= v < cfg.num_scales:
        raise ValueError(f"scale index {v} outside [0, {cfg.num_scales})")
    if not 0 <= orientation_index < cfg.num_orientations:
        raise ValueError(f"orientation index {orientation_index} outside [0, {cfg.num_orientations})")
    k = cfg.wavenumber(v)
    theta = cfg.orientation(orientation_index)
    values = gabor_values(k, theta, cfg.sigma, cfg.kernel_shape)
    values.flags.writeable = False
    return GaborKernel(v, orientation_index, theta, k, values)


def make_bank(cfg: GaborBankConfig) -> list[GaborKernel]:
    """All (scale, orientation) kernels, scale-major."""
    return [make_kernel(cfg, v, j) for v in range(cfg.num_scales) for j in range(cfg.num_orientations)]


def dump_bank(bank: list[GaborKernel], out_dir) -> list[Path]:
    """Write min-max normalized real and imaginary parts of each kernel as PNG."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kern in bank:
        for part, arr in (("re", kern.values.real), ("im", kern.values.imag)):
            path = out_dir / f"gabor_v{kern.scale}_o{kern.orientation_index}_{part}.png"
            save_grayscale(minmax_normalize(arr), path)
            written.append(path)
    return written
