"""Tensor-train (TT) decomposition via the sequential SVD sweep, and the
quantized variant (QTT) that first splits every mode into prime factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor_core import chebyshev_norm, frobenius_norm, truncated_svd

QuantizeFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TTFactorization:
    """Chain of order-3 carriages G_k of shape (r_{k-1}, n_k, r_k).

    Boundary ranks are 1, so the first carriage has shape (1, n_1, r_1)
    and the last (r_{d-1}, n_d, 1).
    """

    carriages: tuple[np.ndarray, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(g.shape[1] for g in self.carriages)

    @property
    def ranks(self) -> tuple[int, ...]:
        """Internal ranks r_1 .. r_{d-1} (empty for a single carriage)."""
        return tuple(g.shape[2] for g in self.carriages[:-1])

    @property
    def n_elements(self) -> int:
        return int(sum(g.size for g in self.carriages))


@dataclass(frozen=True)
class QttFactorization:
    """TT factorization of the reshaped tensor plus the mode split used."""

    tt: TTFactorization
    dims: tuple[int, ...]
    mode_factors: tuple[tuple[int, ...], ...]

    @property
    def n_elements(self) -> int:
        return self.tt.n_elements


def _unfolding_rank_bounds(dims: Sequence[int]) -> list[int]:
    # r_k <= min(n_1*..*n_k, n_{k+1}*..*n_d) for the exact TT ranks
    d = len(dims)
    left = np.cumprod(dims, dtype=np.float64)
    right = np.cumprod(dims[::-1], dtype=np.float64)[::-1]
    return [int(min(left[k], right[k + 1])) for k in range(d - 1)]


def ttsvd(
    x: np.ndarray,
    tol: float | None = None,
    ranks: Sequence[int] | None = None,
) -> TTFactorization:
    """TT-SVD sweep in Fortran (first-index-fastest) linear order.

    Exactly one of ``tol`` and ``ranks`` must be given.  With ``tol`` the
    per-step truncation keeps the discarded tail energy below
    ``(tol * ||x||_F / sqrt(d - 1))**2``, which caps the overall relative
    Frobenius error at ``tol``.  With ``ranks`` each internal rank is used
    as stated, silently clipped to the attainable unfolding bound.
    """
    x = np.asarray(x, dtype=np.float64)
    if (tol is None) == (ranks is None):
        raise ValueError("exactly one of tol and ranks is required")
    dims = x.shape
    d = x.ndim
    if d == 1:
        return TTFactorization((x.reshape(1, dims[0], 1),))
    if ranks is not None:
        ranks = [int(r) for r in ranks]
        if len(ranks) != d - 1:
            raise ValueError(f"{len(ranks)} internal ranks for {d} modes")
        if any(r < 1 for r in ranks):
            raise ValueError("ranks must be positive")
        ranks = [min(r, b) for r, b in zip(ranks, _unfolding_rank_bounds(dims))]
        delta = None
    else:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        delta = tol * frobenius_norm(x) / np.sqrt(d - 1)

    carriages = []
    r_prev = 1
    c = np.reshape(x, (r_prev * dims[0], -1), order="F")
    for k in range(d - 1):
        svd = truncated_svd(c, rank=min(c.shape))
        if delta is not None:
            tail = np.cumsum(svd.S[::-1] ** 2)[::-1]
            keep = int(np.sum(tail > delta**2))
            r = max(1, keep)
        else:
            r = min(ranks[k], svd.S.size)
        carriages.append(np.reshape(svd.U[:, :r], (r_prev, dims[k], r), order="F"))
        c = svd.S[:r, None] * svd.Vt[:r]
        r_prev = r
        c = np.reshape(c, (r_prev * dims[k + 1], -1), order="F")
    carriages.append(np.reshape(c, (r_prev, dims[-1], 1), order="F"))
    return TTFactorization(tuple(carriages))


def tt_element(f: TTFactorization, index: Sequence[int]) -> float:
    """Evaluate one entry as the product of carriage slices."""
    index = tuple(int(i) for i in index)
    if len(index) != len(f.carriages):
        raise ValueError("index length mismatch")
    v = f.carriages[0][:, index[0], :]
    for g, i in zip(f.carriages[1:], index[1:]):
        v = v @ g[:, i, :]
    return float(v[0, 0])


def tt_reconstruct(f: TTFactorization) -> np.ndarray:
    dims = f.dims
    x = f.carriages[0].reshape(dims[0], -1)
    for g in f.carriages[1:]:
        r_prev, n, r = g.shape
        x = x @ g.reshape(r_prev, n * r, order="F")
        x = x.reshape(-1, r, order="F")
    return x.reshape(dims, order="F")


def tt_storage_count(ranks: Sequence[int], dims: Sequence[int]) -> int:
    """Stored elements summed over carriages r_{k-1} * n_k * r_k."""
    dims = [int(n) for n in dims]
    ranks = [1] + [int(r) for r in ranks] + [1]
    if len(ranks) != len(dims) + 1:
        raise ValueError("need d - 1 internal ranks for d dims")
    return sum(ranks[k] * dims[k] * ranks[k + 1] for k in range(len(dims)))


def _prime_factors(n: int) -> list[int]:
    if n < 1:
        raise ValueError(f"extent {n} not factorable")
    if n == 1:
        return [1]
    out = []
    p = 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def qtt_factorize_modes(dims: Sequence[int]) -> list[list[int]]:
    """Prime factorization of every extent, ascending within each mode."""
    return [_prime_factors(int(n)) for n in dims]


def qtt_reshape(x: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    factors = qtt_factorize_modes(x.shape)
    fine = [p for fs in factors for p in fs]
    return np.reshape(x, fine, order="F"), factors


def qtt_compress(
    x: np.ndarray,
    tol: float | None = None,
    ranks: Sequence[int] | None = None,
) -> QttFactorization:
    """TT-SVD on the prime-factor reshaping of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    fine, factors = qtt_reshape(x)
    return QttFactorization(
        ttsvd(fine, tol=tol, ranks=ranks),
        tuple(x.shape),
        tuple(tuple(fs) for fs in factors),
    )


def qtt_reconstruct(f: QttFactorization) -> np.ndarray:
    return np.reshape(tt_reconstruct(f.tt), f.dims, order="F")


def _quantized_tt(f: TTFactorization, quantize: QuantizeFn | None) -> TTFactorization:
    if quantize is None:
        return f
    return TTFactorization(tuple(quantize(g) for g in f.carriages))


def tt_compress_abs(
    x: np.ndarray,
    eps_max: float,
    quantize: QuantizeFn | None = None,
    qtt: bool = False,
    tol0: float = 1e-2,
    tol_floor: float = 1e-16,
) -> TTFactorization | QttFactorization:
    """Smallest TT (or QTT) whose reconstruction stays within ``eps_max``
    in the Chebyshev norm, found by halving the relative tolerance.

    The sweep tolerance controls relative Frobenius error, so it is halved
    from ``tol0`` until the pointwise check passes; the floor puts the
    sweep at effectively lossless truncation.  ``quantize`` is applied to
    the carriages before each check, as in Tucker compression.
    """
    x = np.asarray(x, dtype=np.float64)
    if eps_max <= 0:
        raise ValueError("eps_max must be positive")
    tol = tol0
    while True:
        if qtt:
            fac = qtt_compress(x, tol=tol)
            fac = QttFactorization(_quantized_tt(fac.tt, quantize), fac.dims, fac.mode_factors)
            xh = qtt_reconstruct(fac)
        else:
            fac = _quantized_tt(ttsvd(x, tol=tol), quantize)
            xh = tt_reconstruct(fac)
        if chebyshev_norm(xh - x) <= eps_max or tol < tol_floor:
            return fac
        tol = tol / 2.0
