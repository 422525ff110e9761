"""Hot loops of the polyhedral core, in two interchangeable flavours.

Each kernel has a numba ``@njit`` version and a vectorised numpy version
with identical results.  The numba path is used when numba imports and the
environment variable ``VALUEDISJ_DISABLE_NUMBA`` is unset (or ``0``); set it
to ``1`` to force the numpy path.  ``select_backend`` switches at runtime,
which is what the benchmark and the equivalence tests use.

All arithmetic is int64 or uint64.  Callers guarantee no overflow (see
``dd.py``); nothing here rounds.
"""
from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "VALUEDISJ_DISABLE_NUMBA"

try:
    import numba
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def select_backend(name: str) -> None:
    """Switch between ``"numba"`` and ``"numpy"`` kernels process-wide."""
    global USE_NUMBA
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        USE_NUMBA = True
    elif name == "numpy":
        USE_NUMBA = False
    else:
        raise ValueError(f"unknown backend {name!r}")


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ----------------------------------------------------------- box enumeration

def _enumerate_box_numpy(A, b, is_eq, ub, chunk=1 << 18):
    n = ub.size
    radix = ub + 1
    total = int(np.prod(radix, dtype=object))
    pieces = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = np.empty((idx.size, n), dtype=np.int64)
        for j in range(n - 1, -1, -1):
            X[:, j] = idx % radix[j]
            idx = idx // radix[j]
        if A.shape[0]:
            lhs = X @ A.T
            ok = np.where(is_eq, lhs == b, lhs <= b).all(axis=1)
            X = X[ok]
        pieces.append(X)
    if not pieces:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(pieces)


if HAVE_NUMBA:
    @njit(cache=True)
    def _enum_pass(A, b, is_eq, ub, out, fill):
        n = ub.size
        m = b.size
        x = np.zeros(n, dtype=np.int64)
        lhs = np.zeros(m, dtype=np.int64)
        count = 0
        while True:
            ok = True
            for i in range(m):
                if is_eq[i]:
                    if lhs[i] != b[i]:
                        ok = False
                        break
                elif lhs[i] > b[i]:
                    ok = False
                    break
            if ok:
                if fill:
                    for j in range(n):
                        out[count, j] = x[j]
                count += 1
            j = n - 1
            while j >= 0:
                if x[j] < ub[j]:
                    x[j] += 1
                    for i in range(m):
                        lhs[i] += A[i, j]
                    break
                for i in range(m):
                    lhs[i] -= A[i, j] * x[j]
                x[j] = 0
                j -= 1
            if j < 0:
                break
        return count

    def _enumerate_box_numba(A, b, is_eq, ub):
        dummy = np.zeros((0, ub.size), dtype=np.int64)
        count = _enum_pass(A, b, is_eq, ub, dummy, False)
        out = np.empty((count, ub.size), dtype=np.int64)
        _enum_pass(A, b, is_eq, ub, out, True)
        return out


def enumerate_box(A, b, is_eq, ub) -> np.ndarray:
    """Points ``0 <= x <= ub`` (lexicographic) with ``A x <= b`` / ``A x == b``.

    ``A`` is int64 (m, n); ``is_eq`` marks equality rows.  ``n`` must be >= 1.
    """
    A = np.ascontiguousarray(A, dtype=np.int64).reshape(-1, ub.size)
    b = np.ascontiguousarray(b, dtype=np.int64)
    is_eq = np.ascontiguousarray(is_eq, dtype=np.bool_)
    ub = np.ascontiguousarray(ub, dtype=np.int64)
    if USE_NUMBA:
        return _enumerate_box_numba(A, b, is_eq, ub)
    return _enumerate_box_numpy(A, b, is_eq, ub)


# ------------------------------------------------------ DD adjacency + merge

def _popcount_rows_numpy(Z):
    return np.bitwise_count(Z).sum(axis=-1, dtype=np.int64)


def _adjacent_pairs_numpy(Z, pos, neg, min_common, block=1 << 22):
    if pos.size == 0 or neg.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    Zneg = Z[neg]
    notZ = ~Z
    R, W = Z.shape
    step = max(1, block // max(1, R * W))
    out = []
    for p in pos:
        common = Z[p] & Zneg
        cand = np.nonzero(_popcount_rows_numpy(common) >= min_common)[0]
        for start in range(0, cand.size, step):
            c = cand[start:start + step]
            # rays whose zero set contains the common set; p and neg[c] always do
            inside = ~((common[c][:, None, :] & notZ[None, :, :]).any(axis=2))
            hit = c[inside.sum(axis=1) == 2]
            if hit.size:
                out.append(np.column_stack((np.full(hit.size, p, dtype=np.int64), neg[hit])))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def _combine_numpy(R, s, pairs):
    p, n = pairs[:, 0], pairs[:, 1]
    new = s[p][:, None] * R[n] - s[n][:, None] * R[p]
    g = np.gcd.reduce(new, axis=1)
    g[g == 0] = 1
    return new // g[:, None]


if HAVE_NUMBA:
    _M1 = np.uint64(0x5555555555555555)
    _M2 = np.uint64(0x3333333333333333)
    _M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
    _H01 = np.uint64(0x0101010101010101)

    @njit(cache=True, inline="always")
    def _popcount64(x):
        x = x - ((x >> np.uint64(1)) & _M1)
        x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
        x = (x + (x >> np.uint64(4))) & _M4
        return (x * _H01) >> np.uint64(56)

    @njit(cache=True)
    def _adjacent_pairs_nb(Z, pos, neg, min_common):
        R, W = Z.shape
        cap = 64
        out = np.empty((cap, 2), dtype=np.int64)
        k = 0
        common = np.empty(W, dtype=np.uint64)
        for a in range(pos.size):
            p = pos[a]
            for c in range(neg.size):
                q = neg[c]
                cnt = 0
                for w in range(W):
                    common[w] = Z[p, w] & Z[q, w]
                    cnt += _popcount64(common[w])
                if cnt < min_common:
                    continue
                adjacent = True
                for r in range(R):
                    if r == p or r == q:
                        continue
                    inside = True
                    for w in range(W):
                        if common[w] & ~Z[r, w]:
                            inside = False
                            break
                    if inside:
                        adjacent = False
                        break
                if adjacent:
                    if k == cap:
                        cap *= 2
                        grown = np.empty((cap, 2), dtype=np.int64)
                        grown[:k] = out[:k]
                        out = grown
                    out[k, 0] = p
                    out[k, 1] = q
                    k += 1
        return out[:k].copy()

    @njit(cache=True)
    def _gcd(a, b):
        a = abs(a)
        b = abs(b)
        while b:
            a, b = b, a % b
        return a

    @njit(cache=True)
    def _combine_nb(R, s, pairs):
        P = pairs.shape[0]
        k = R.shape[1]
        out = np.empty((P, k), dtype=np.int64)
        for i in range(P):
            p = pairs[i, 0]
            n = pairs[i, 1]
            g = 0
            for j in range(k):
                v = s[p] * R[n, j] - s[n] * R[p, j]
                out[i, j] = v
                g = _gcd(g, v)
            if g > 1:
                for j in range(k):
                    out[i, j] //= g
        return out


def adjacent_pairs(Z, pos, neg, min_common) -> np.ndarray:
    """(pos, neg) ray pairs adjacent by the combinatorial test.

    ``Z`` is the (R, W) uint64 zero-set bit matrix of the current rays.  A
    pair is adjacent iff its common zero set has at least ``min_common``
    members and no third ray's zero set contains it.
    """
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    neg = np.ascontiguousarray(neg, dtype=np.int64)
    if USE_NUMBA:
        return _adjacent_pairs_nb(Z, pos, neg, np.int64(min_common))
    return _adjacent_pairs_numpy(Z, pos, neg, min_common)


def combine(R, s, pairs) -> np.ndarray:
    """New rays ``s[p] * R[n] - s[n] * R[p]``, each divided by its gcd."""
    if pairs.shape[0] == 0:
        return np.zeros((0, R.shape[1]), dtype=R.dtype)
    if USE_NUMBA and R.dtype == np.int64:
        return _combine_nb(R, s, pairs)
    return _combine_numpy(R, s, pairs)
