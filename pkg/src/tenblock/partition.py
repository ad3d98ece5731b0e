"""Greedy cover of a 2-D validity mask by maximal rectangles, a
power-of-two variant, and temporal interval splitting.

The greedy scan visits seeds in row-major order, expands each seed first
down the x axis and then along y (never revisiting x), and keeps the
first rectangle of strictly largest area.  The inner scan runs through a
compiled kernel when the extension built, with a vectorized numpy
fallback otherwise; both lanes are exact and kept in lockstep by the
parity tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

try:
    from . import _speedups
except ImportError:
    _speedups = None


class BlockIndex(NamedTuple):
    """Half-open horizontal rectangle [x_start, x_end) x [y_start, y_end)."""

    x_start: int
    x_end: int
    y_start: int
    y_end: int

    @property
    def area(self) -> int:
        return (self.x_end - self.x_start) * (self.y_end - self.y_start)


@dataclass(frozen=True)
class PartitionResult:
    blocks: tuple[BlockIndex, ...]
    leftover_cells: int


def kernel_backend() -> str:
    return "numpy" if _speedups is None else "compiled"


def is_valid_block(domain_mask, used_mask, rect, s_min: int) -> bool:
    """True iff both sides reach s_min, every cell is defined and none is
    used.  Out-of-bounds rectangles are invalid, not an error."""
    domain_mask = np.asarray(domain_mask, dtype=bool)
    used_mask = np.asarray(used_mask, dtype=bool)
    x0, x1, y0, y1 = (int(c) for c in rect)
    nx, ny = domain_mask.shape
    if x1 - x0 < s_min or y1 - y0 < s_min:
        return False
    if x0 < 0 or y0 < 0 or x1 > nx or y1 > ny:
        return False
    if not domain_mask[x0:x1, y0:y1].all():
        return False
    return not used_mask[x0:x1, y0:y1].any()


def _run_arrays(free: np.ndarray, s_min: int):
    # h[i, j] = free-run length rightward from (i, j)
    # d[i, j] = consecutive rows below i with h >= s_min (x-expansion depth)
    # v[i, j] = free-run length downward from (i, j)
    nx, ny = free.shape
    h = np.zeros((nx, ny + 1), dtype=np.int32)
    for j in range(ny - 1, -1, -1):
        h[:, j] = np.where(free[:, j], h[:, j + 1] + 1, 0)
    w = h[:, :ny] >= s_min
    d = np.zeros((nx + 1, ny), dtype=np.int32)
    v = np.zeros((nx + 1, ny), dtype=np.int32)
    for i in range(nx - 1, -1, -1):
        d[i] = np.where(w[i], d[i + 1] + 1, 0)
        v[i] = np.where(free[i], v[i + 1] + 1, 0)
    return d[:nx], v[:nx]


def _find_largest_numpy(free: np.ndarray, s_min: int):
    nx, ny = free.shape
    if s_min < 1 or nx < s_min or ny < s_min:
        return None
    d, v = _run_arrays(free, s_min)
    n_seed = ny - s_min + 1
    seeds = np.arange(n_seed)
    ys = np.arange(ny)
    best_area = 0
    best = None
    for i in range(nx - s_min + 1):
        drow = d[i, :n_seed]
        valid = drow >= s_min
        if not valid.any():
            continue
        vrow = v[i]
        areas = np.zeros(n_seed, dtype=np.int64)
        for hh in np.unique(drow[valid]):
            group = valid & (drow == hh)
            # nf[y] = first column >= y where the free run is shorter than hh
            nf = np.where(vrow < hh, ys, ny)
            nf = np.append(np.minimum.accumulate(nf[::-1])[::-1], ny)
            y_end = nf[seeds[group] + s_min]
            areas[group] = int(hh) * (y_end - seeds[group])
        j = int(np.argmax(areas))
        area = int(areas[j])
        if area > best_area:
            best_area = area
            hh = int(d[i, j])
            best = (i, i + hh, j, j + area // hh)
    return best


def _find_largest(free: np.ndarray, s_min: int):
    if _speedups is not None:
        return _speedups.find_largest_block(
            np.ascontiguousarray(free, dtype=np.uint8), s_min)
    return _find_largest_numpy(free, s_min)


def find_largest_block(domain_mask, used_mask, s_min: int) -> BlockIndex | None:
    """Largest x-then-y expandable rectangle of free cells, earliest
    row-major seed winning area ties; None when no seed square is free."""
    domain_mask = np.asarray(domain_mask, dtype=bool)
    used_mask = np.asarray(used_mask, dtype=bool)
    if domain_mask.shape != used_mask.shape:
        raise ValueError("mask shape mismatch")
    if domain_mask.ndim != 2:
        raise ValueError("masks must be 2-D")
    found = _find_largest(domain_mask & ~used_mask, int(s_min))
    return None if found is None else BlockIndex(*found)


def greedy_partition(domain_mask, s_min: int) -> PartitionResult:
    """Repeatedly take the largest free rectangle until no s_min square
    remains; leftover_cells counts the defined cells no block covers."""
    domain_mask = np.asarray(domain_mask, dtype=bool)
    if domain_mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    s_min = int(s_min)
    if s_min < 1:
        raise ValueError("s_min must be >= 1")
    free = domain_mask.copy()
    blocks = []
    while True:
        found = _find_largest(free, s_min)
        if found is None:
            break
        blocks.append(BlockIndex(*found))
        free[found[0]:found[1], found[2]:found[3]] = False
    return PartitionResult(tuple(blocks), int(free.sum()))


def _pow2_shapes(nx: int, ny: int, s_min: int) -> list[tuple[int, int]]:
    # area desc, then aspect ratio closest to square, then wider in x
    a_min = s_min.bit_length() - 1
    ws = [1 << a for a in range(a_min, nx.bit_length()) if (1 << a) <= nx]
    hs = [1 << b for b in range(a_min, ny.bit_length()) if (1 << b) <= ny]
    shapes = [(w, h) for w in ws for h in hs]
    shapes.sort(key=lambda s: (-s[0] * s[1],
                               abs(s[0].bit_length() - s[1].bit_length()),
                               -s[0]))
    return shapes


def _first_fit(free: np.ndarray, w: int, h: int):
    nx, ny = free.shape
    ii = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    ii[1:, 1:] = free.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
    s = ii[w:, h:] - ii[:-w, h:] - ii[w:, :-h] + ii[:-w, :-h]
    hits = s == w * h
    if not hits.any():
        return None
    i, j = divmod(int(np.argmax(hits)), hits.shape[1])
    return i, j


def pow2_partition(domain_mask, s_min: int) -> PartitionResult:
    """Greedy cover by rectangles whose sides are powers of two >= s_min.

    Each round tries candidate shapes in decreasing area, preferring the
    shape closest to square (then the wider one) among equal areas, and
    places the first shape that fits anywhere, at its earliest row-major
    position.  This favors e.g. 16x8 over 4x32 wherever both would fit.
    """
    domain_mask = np.asarray(domain_mask, dtype=bool)
    if domain_mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    s_min = int(s_min)
    if s_min < 1 or s_min & (s_min - 1):
        raise ValueError("s_min must be a power of two")
    nx, ny = domain_mask.shape
    shapes = _pow2_shapes(nx, ny, s_min)
    free = domain_mask.copy()
    blocks = []
    placed = True
    while placed:
        placed = False
        for w, h in shapes:
            pos = _first_fit(free, w, h)
            if pos is not None:
                i, j = pos
                blocks.append(BlockIndex(i, i + w, j, j + h))
                free[i:i + w, j:j + h] = False
                placed = True
                break
    return PartitionResult(tuple(blocks), int(free.sum()))


def temporal_split(t: int, n: int) -> list[tuple[int, int]]:
    """N contiguous half-open intervals covering [0, t); base length
    floor(t/n) with the remainder absorbed by the last interval."""
    t = int(t)
    n = int(n)
    if not 1 <= n <= t:
        raise ValueError(f"need 1 <= n <= {t}, got {n}")
    base = t // n
    return [(k * base, (k + 1) * base if k < n - 1 else t) for k in range(n)]
