"""Incremental double description over the integers.

``extreme_rays(H)`` returns the extreme rays of the pointed cone
``{a : H a >= 0}``.  Rays are kept as primitive integer vectors, so the
method is exact; int64 is used while a cheap magnitude bound proves it
cannot overflow, and Python integers (object arrays) otherwise.

Rows are inserted in the given order after an initial simplicial cone built
from the first linearly independent rows, so intermediate ray counts are
reproducible.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .. import exactmath
from . import _kernels

_SAFE = 1 << 62


class DDError(ValueError):
    pass


def _as_object(M) -> np.ndarray:
    arr = np.empty(np.shape(M), dtype=object)
    arr[...] = [[int(v) for v in row] for row in M] if np.ndim(M) == 2 else M
    return arr


def _maxabs(M) -> int:
    if M.size == 0:
        return 0
    if M.dtype == object:
        return max(abs(int(v)) for v in M.flat)
    return int(np.abs(M).max())


def _fits_int64(M) -> bool:
    return _maxabs(M) < (1 << 31)


def _int_nullspace(rows: list[list[int]], k: int) -> list[list[int]]:
    basis = exactmath.nullspace(rows, k) if rows else exactmath.nullspace([], k)
    return [exactmath.integer_scale(v) for v in basis]


def greedy_row_basis(H) -> list[int]:
    """Indices of the first linearly independent rows of ``H`` (in order)."""
    H = np.asarray(H)
    N, k = H.shape
    if N == 0:
        return []
    Hobj = H if H.dtype == object else None
    chosen: list[int] = []
    while len(chosen) < k:
        null = _int_nullspace([[int(v) for v in H[i]] for i in chosen], k)
        if not null:
            break
        Nmat = np.array(null, dtype=object).T
        if Hobj is None and _maxabs(H) * _maxabs(Nmat) * k < _SAFE:
            prod = H.astype(np.int64) @ Nmat.astype(np.int64)
        else:
            if Hobj is None:
                Hobj = _as_object(H)
            prod = Hobj.dot(Nmat)
        nz = np.nonzero((prod != 0).any(axis=1))[0]
        if nz.size == 0:
            break
        chosen.append(int(nz[0]))
    return chosen


def _inverse_columns(B: list[list[int]]) -> list[list[int]]:
    """Primitive integer multiples of the columns of ``B^-1``."""
    k = len(B)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(k)]
           for i, row in enumerate(B)]
    r, R, piv = exactmath.row_reduce(aug)
    if piv[:k] != list(range(k)):
        raise DDError("initial basis is singular")
    inv = [row[k:] for row in R[:k]]
    return [exactmath.integer_scale([inv[i][j] for i in range(k)]) for j in range(k)]


def extreme_rays(H, basis: list[int] | None = None, stats: dict | None = None):
    """Extreme rays of ``{a : H a >= 0}`` (``H`` integer, full column rank).

    Returns ``(rays, Z)``: an (R, k) integer array (int64 or object) and the
    (R, W) uint64 zero-set bit matrix indexed by row of ``H``.
    """
    H = np.asarray(H)
    if H.dtype != object:
        H = H.astype(np.int64)
    N, k = H.shape
    if basis is None:
        basis = greedy_row_basis(H)
    if len(basis) != k:
        raise DDError(f"constraint matrix has rank {len(basis)} < {k}; cone not pointed")
    W = max(1, (N + 63) // 64)
    cols = _inverse_columns([[int(v) for v in H[i]] for i in basis])
    rays = np.array(cols, dtype=object)
    rays = rays.astype(np.int64) if _fits_int64(rays) else rays
    Z = np.zeros((k, W), dtype=np.uint64)
    for i, row in enumerate(basis):
        word, bit = divmod(row, 64)
        mask = np.uint64(1 << bit)
        for j in range(k):
            if j != i:
                Z[j, word] |= mask
    if k == 1:
        if stats is not None:
            stats["max_rays"] = 1
        return rays, Z

    Hobj = None
    in_basis = set(basis)
    max_rays = k
    for row in range(N):
        if row in in_basis:
            continue
        h = H[row]
        if rays.dtype == np.int64 and H.dtype != object and \
                _maxabs(rays) * max(1, int(np.abs(h).max())) * k < _SAFE:
            s = rays @ h
        else:
            if Hobj is None:
                Hobj = H if H.dtype == object else _as_object(H)
            robj = rays if rays.dtype == object else rays.astype(object)
            s = robj.dot(Hobj[row])
        word, bit = divmod(row, 64)
        mask = np.uint64(1 << bit)
        neg = np.nonzero(s < 0)[0]
        zero = np.nonzero(s == 0)[0]
        if neg.size == 0:
            Z[zero, word] |= mask
            continue
        pos = np.nonzero(s > 0)[0]
        pairs = _kernels.adjacent_pairs(Z, pos, neg, k - 2)
        if pairs.shape[0]:
            smax = _maxabs(s)
            if rays.dtype == np.int64 and s.dtype != object and smax * _maxabs(rays) * 2 < _SAFE:
                new = _kernels.combine(rays, s.astype(np.int64), pairs)
            else:
                new = _combine_exact(rays, s, pairs)
            newZ = Z[pairs[:, 0]] & Z[pairs[:, 1]]
            newZ[:, word] |= mask
        else:
            new = np.zeros((0, k), dtype=rays.dtype)
            newZ = np.zeros((0, W), dtype=np.uint64)
        Z[zero, word] |= mask
        keep = np.concatenate([pos, zero])
        keep.sort()
        if new.dtype != rays.dtype:
            rays = rays.astype(object)
            new = new.astype(object)
        rays = np.concatenate([rays[keep], new])
        Z = np.concatenate([Z[keep], newZ])
        if rays.dtype == object and _fits_int64(rays):
            rays = rays.astype(np.int64)
        max_rays = max(max_rays, rays.shape[0])
    if stats is not None:
        stats["max_rays"] = max_rays
    return rays, Z


def _combine_exact(rays, s, pairs):
    out = []
    for p, n in pairs:
        sp, sn = int(s[p]), int(s[n])
        v = [sp * int(a) - sn * int(b) for a, b in zip(rays[n], rays[p])]
        g = 0
        for x in v:
            g = math.gcd(g, x)
        out.append([x // g for x in v] if g > 1 else v)
    return np.array(out, dtype=object).reshape(len(out), rays.shape[1])
