"""Synthetic gappy sea-temperature-like fields: a smooth coastline mask
from thresholded filtered noise, plus a low-rank smooth background, a
seasonal sinusoid attenuated with depth, and white noise.

Values are exactly representable in 32-bit floats so that raw storage
paths reproduce them bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import GappyTensor4

OCEAN_QUANTILE = 0.35  # land fraction of the threshold field


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic recipe for one synthetic dataset.

    dims is (x, y, depth, time); the seasonal period is the full time
    extent; depth_decay is the top-to-bottom attenuation exponent;
    background_rank counts separable smooth background terms.
    """

    dims: tuple[int, int, int, int] = (64, 48, 8, 64)
    seed: int = 0
    roughness: float = 0.15
    amplitude: float = 8.0
    phase: float = 0.3
    depth_decay: float = 1.5
    noise: float = 0.02
    background_rank: int = 2

    def __post_init__(self):
        if len(self.dims) != 4 or any(int(n) < 1 for n in self.dims):
            raise ValueError(f"degenerate dims {self.dims}")
        if self.background_rank < 1:
            raise ValueError("background_rank must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if not 0 < self.roughness <= 1:
            raise ValueError("roughness must be in (0, 1]")


def _box1d(a: np.ndarray, w: int, axis: int) -> np.ndarray:
    if w <= 1 or a.shape[axis] == 1:
        return a
    a = np.moveaxis(a, axis, 0)
    pad = w // 2
    ap = np.concatenate([a[:1].repeat(pad, axis=0), a, a[-1:].repeat(pad, axis=0)])
    out = np.lib.stride_tricks.sliding_window_view(ap, w, axis=0).mean(axis=-1)
    return np.moveaxis(out, 0, axis)


def _smooth2d(field: np.ndarray, w: int, passes: int = 2) -> np.ndarray:
    for _ in range(passes):
        field = _box1d(_box1d(field, w, 0), w, 1)
    return field


def coastline_mask(nx: int, ny: int, roughness: float, rng: np.random.Generator) -> np.ndarray:
    """Smooth blobby ocean/land split with a fixed ocean fraction."""
    field = rng.standard_normal((nx, ny))
    w = 2 * (max(1, int(round(roughness * min(nx, ny)))) // 2) + 1
    field = _smooth2d(field, w)
    return field > np.quantile(field, OCEAN_QUANTILE)


def _smooth_unit(rng: np.random.Generator, n: int, w: int = 7) -> np.ndarray:
    # smooth profile scaled to max |.| = 1
    v = _box1d(rng.standard_normal(n), min(w, 2 * (n // 2) + 1), 0)
    peak = np.max(np.abs(v))
    return v / peak if peak > 0 else np.zeros(n)


def synth(spec: SynthSpec) -> GappyTensor4:
    """Generate the dataset for a spec; identical specs give identical
    bits."""
    nx, ny, nl, nt = (int(n) for n in spec.dims)
    rng = np.random.default_rng(spec.seed)
    mask = coastline_mask(nx, ny, spec.roughness, rng)

    depth = np.exp(-spec.depth_decay * np.linspace(0.0, 1.0, nl))
    values = np.zeros((nx, ny, nl, nt))

    # smooth separable background; the first term carries the mean level
    # and the depth profile, the rest are gentle anomalies
    for q in range(spec.background_rank):
        ax = 1.0 + 0.15 * _smooth_unit(rng, nx)
        by = 1.0 + 0.15 * _smooth_unit(rng, ny)
        if q == 0:
            cl, coef = depth, 12.0
        else:
            cl, coef = 1.0 + 0.15 * _smooth_unit(rng, nl), 2.0
        dk = 1.0 + 0.1 * _smooth_unit(rng, nt)
        values += coef * np.einsum("i,j,l,k->ijlk", ax, by, cl, dk)

    # one seasonal cycle over the full time extent, fading with depth
    sx = 0.75 + 0.25 * _smooth_unit(rng, nx)
    sy = 0.75 + 0.25 * _smooth_unit(rng, ny)
    season = np.sin(2.0 * np.pi * np.arange(nt) / nt + spec.phase)
    values += spec.amplitude * np.einsum("i,j,l,k->ijlk", sx, sy, depth, season)

    if spec.noise > 0:
        values += spec.noise * rng.standard_normal(values.shape)

    values = values.astype(np.float32).astype(np.float64)
    values[~mask] = np.nan
    return GappyTensor4(values, mask)
