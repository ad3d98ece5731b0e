"""Tucker decomposition built from truncated SVDs of the unfoldings,
plus rank selection loops for tolerance and absolute-error targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor_core import (
    SvdResult,
    _svd_deterministic,
    chebyshev_norm,
    mode_product,
    rank_from_spectrum,
    unfold,
)

QuantizeFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TuckerFactorization:
    """Core tensor plus one column-orthonormal factor per mode."""

    core: np.ndarray
    factors: tuple[np.ndarray, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(self.core.shape)

    @property
    def n_elements(self) -> int:
        return int(self.core.size + sum(u.size for u in self.factors))


def _check_ranks(dims, ranks) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims):
        raise ValueError(f"{len(ranks)} ranks for {len(dims)} modes")
    for r, n in zip(ranks, dims):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} out of range for mode of extent {n}")
    return ranks


def _mode_svds(x: np.ndarray) -> list[SvdResult]:
    return [_svd_deterministic(unfold(x, k)) for k in range(x.ndim)]


def _core_from_factors(x: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    core = x
    for k, u in enumerate(factors):
        core = mode_product(core, u.T, k)
    return core


def hosvd(x: np.ndarray, ranks: Sequence[int]) -> TuckerFactorization:
    """Orthogonal Tucker decomposition at the given multilinear ranks.

    Factor ``k`` holds the leading left singular vectors of the mode-``k``
    unfolding; the core is the projection of ``x`` onto those factors.
    """
    x = np.asarray(x, dtype=np.float64)
    ranks = _check_ranks(x.shape, ranks)
    factors = tuple(np.ascontiguousarray(svd.U[:, :r])
                    for svd, r in zip(_mode_svds(x), ranks))
    return TuckerFactorization(_core_from_factors(x, factors), factors)


def hosvd_tol(x: np.ndarray, tol: float) -> TuckerFactorization:
    """HOSVD with per-mode ranks chosen from the normalized spectra.

    Mode ``k`` keeps every singular value within a factor ``tol`` of the
    largest one (at least one).
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0.0 < tol <= 1.0:
        raise ValueError(f"tol {tol} not in (0, 1]")
    svds = _mode_svds(x)
    factors = tuple(np.ascontiguousarray(svd.U[:, :rank_from_spectrum(svd.S, tol)])
                    for svd in svds)
    return TuckerFactorization(_core_from_factors(x, factors), factors)


def tucker_reconstruct(f: TuckerFactorization) -> np.ndarray:
    x = f.core
    for k, u in enumerate(f.factors):
        x = mode_product(x, u, k)
    return x


def tucker_storage_count(ranks: Sequence[int], dims: Sequence[int]) -> int:
    """Stored elements: core volume plus one n_k-by-r_k factor per mode."""
    ranks = [int(r) for r in ranks]
    dims = [int(n) for n in dims]
    if len(ranks) != len(dims):
        raise ValueError("ranks and dims length mismatch")
    if any(not 1 <= r <= n for r, n in zip(ranks, dims)):
        raise ValueError("rank out of range for its extent")
    return int(np.prod(ranks, dtype=np.int64)) + sum(n * r for n, r in zip(dims, ranks))


def _quantized(f: TuckerFactorization, quantize: QuantizeFn | None) -> TuckerFactorization:
    if quantize is None:
        return f
    return TuckerFactorization(quantize(f.core), tuple(quantize(u) for u in f.factors))


def tucker_compress_abs(
    x: np.ndarray,
    eps_max: float,
    quantize: QuantizeFn | None = None,
    tol0: float = 1e-2,
) -> TuckerFactorization:
    """Smallest-effort HOSVD whose reconstruction stays within ``eps_max``
    in the Chebyshev norm.

    Starts from the ranks suggested by ``hosvd_tol(tol0)`` and grows each
    mode rank by ``max(1, ceil(0.1 r))`` until the budget holds, stopping
    at full ranks.  When ``quantize`` is given (e.g. a float32 round trip)
    it is applied to core and factors before the error is measured, so the
    accepted factorization meets the budget in its stored form.
    """
    x = np.asarray(x, dtype=np.float64)
    if eps_max <= 0:
        raise ValueError("eps_max must be positive")
    svds = _mode_svds(x)
    ranks = [rank_from_spectrum(svd.S, tol0) for svd in svds]
    dims = x.shape
    while True:
        factors = tuple(np.ascontiguousarray(svd.U[:, :r]) for svd, r in zip(svds, ranks))
        fac = _quantized(TuckerFactorization(_core_from_factors(x, factors), factors), quantize)
        err = chebyshev_norm(tucker_reconstruct(fac) - x)
        if err <= eps_max or all(r == n for r, n in zip(ranks, dims)):
            return fac
        ranks = [min(n, r + max(1, math.ceil(0.1 * r))) for r, n in zip(ranks, dims)]
