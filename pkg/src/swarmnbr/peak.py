"""Synthetic two-dimensional "peak" regression problem.

Samples (x, y) from a disk (radius and angle each uniform) and labels
them with a Gaussian bump centred on the origin:
z = A * exp(-(x^2 + y^2) / 2).  No observation noise is added.  Also
exports prediction grids over the square for contour plotting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tabular import AttributeSchema, Dataset, Kind


@dataclass(frozen=True)
class PeakConfig:
    amplitude: float = 25.0
    radius: float = 3.0
    samples: int = 100
    seed: int = 0
    grid_lo: float = -3.0
    grid_hi: float = 3.0
    grid_points: int = 121  # 121 points per axis = 120 intervals

    def __post_init__(self):
        if self.amplitude <= 0 or self.radius <= 0:
            raise ValueError("amplitude and radius must be positive")
        if self.grid_points < 2:
            raise ValueError("grid needs at least 2 points per axis")


PEAK_SCHEMA = (
    AttributeSchema("x", Kind.NUMERIC),
    AttributeSchema("y", Kind.NUMERIC),
    AttributeSchema("z", Kind.NUMERIC, is_target=True),
)


def peak_height(x, y, amplitude: float = 25.0):
    """Ground-truth surface value at (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = amplitude * np.exp(-0.5 * (x * x + y * y))
    return float(z) if z.ndim == 0 else z


def generate_peak(cfg: PeakConfig = PeakConfig()) -> Dataset:
    """Sample points from the disk of ``cfg.radius`` in polar form.

    The radius is drawn uniformly from [0, R) and the angle uniformly
    from [0, 2*pi), matching the reference generator's behaviour: the
    samples concentrate around the origin rather than being uniform by
    area.  Two uniform blocks are drawn (radii first, then angles), so
    generation is deterministic for a given seed.
    """
    rng = np.random.default_rng(cfg.seed)
    r = cfg.radius * rng.random(cfg.samples)
    theta = 2.0 * math.pi * rng.random(cfg.samples)
    x = r * np.cos(theta)
    y = r * np.sin(theta)
    z = peak_height(x, y, cfg.amplitude)
    return Dataset(PEAK_SCHEMA, np.column_stack([x, y, z]))


def contour_grid(predictor, cfg: PeakConfig = PeakConfig()) -> np.ndarray:
    """Predictions over the square grid, as (x, y, z) rows.

    ``predictor`` maps an (m, 2) array of (x, y) points to m values.
    Rows are emitted in row-major order: x varies slowest.
    """
    axis = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    points = np.column_stack([gx.reshape(-1), gy.reshape(-1)])
    z = np.asarray(predictor(points), dtype=float).reshape(-1)
    if z.shape[0] != points.shape[0]:
        raise ValueError("predictor returned the wrong number of values")
    return np.column_stack([points, z])


def write_contour_csv(path, grid: np.ndarray) -> None:
    lines = ["x,y,z"]
    for x, y, z in grid:
        lines.append(f"{x!r},{y!r},{z!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
