# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan for the largest expandable rectangle in a free-cell mask.

Mirrors the numpy fallback in partition.py exactly: seeds in row-major
order, x-then-y expansion, strict area improvement. Kept in lockstep with
the fallback by the parity tests.
"""

import numpy as np


def find_largest_block(const unsigned char[:, ::1] free, int s_min):
    """Return (x_start, x_end, y_start, y_end) of the winning rectangle,
    or None when no s_min x s_min seed is free."""
    cdef Py_ssize_t nx = free.shape[0]
    cdef Py_ssize_t ny = free.shape[1]
    if s_min < 1 or nx < s_min or ny < s_min:
        return None

    # h: horizontal free-run length to the right; d: vertical run of rows
    # whose h >= s_min (the x-expansion depth); v: vertical free-run length.
    h_arr = np.zeros((nx, ny + 1), dtype=np.intc)
    d_arr = np.zeros((nx + 1, ny), dtype=np.intc)
    v_arr = np.zeros((nx + 1, ny), dtype=np.intc)
    cdef int[:, ::1] h = h_arr
    cdef int[:, ::1] d = d_arr
    cdef int[:, ::1] v = v_arr

    cdef Py_ssize_t i, j
    cdef Py_ssize_t y, hh
    cdef long long area, best_area = 0
    cdef Py_ssize_t bi = 0, bj = 0, bh = 0, by = 0

    with nogil:
        for i in range(nx):
            for j in range(ny - 1, -1, -1):
                if free[i, j]:
                    h[i, j] = h[i, j + 1] + 1
        for i in range(nx - 1, -1, -1):
            for j in range(ny):
                if h[i, j] >= s_min:
                    d[i, j] = d[i + 1, j] + 1
                if free[i, j]:
                    v[i, j] = v[i + 1, j] + 1
        for i in range(nx - s_min + 1):
            for j in range(ny - s_min + 1):
                hh = d[i, j]
                if hh < s_min:
                    continue
                # ceiling on any block from this seed; ties cannot win
                if <long long>hh * (ny - j) <= best_area:
                    continue
                y = j + s_min
                while y < ny and v[i, y] >= hh:
                    y += 1
                area = <long long>hh * (y - j)
                if area > best_area:
                    best_area = area
                    bi = i
                    bj = j
                    bh = hh
                    by = y
    if best_area == 0:
        return None
    return int(bi), int(bi + bh), int(bj), int(by)
