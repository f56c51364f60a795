"""Rank over prime fields for large integer matrices.

Blocked right-looking elimination in float64: a numba panel factorisation
followed by a BLAS trailing update. All values stay in [0, p) with
p < 2**22, so a panel of width 128 accumulates below 2**53 and every float
operation is exact.
"""

from __future__ import annotations

import numba
import numpy as np

from .integer import IntMatrix

# primes just below 2**22
PRIMES = (4194301, 4194287, 4194277)
_PANEL = 128


@numba.njit(cache=True)
def _panel(a, r, c0, c1, p, piv):
    m, n = a.shape
    ip = 1.0 / p
    k = 0
    for j in range(c0, c1):
        pr = r + k
        if pr >= m:
            break
        i = -1
        for t in range(pr, m):
            if a[t, j] != 0.0:
                i = t
                break
        if i < 0:
            continue
        if i != pr:
            for c in range(n):
                tmp = a[pr, c]
                a[pr, c] = a[i, c]
                a[i, c] = tmp
        base = int(a[pr, j])
        inv = 1
        e = p - 2
        while e:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for t in range(pr + 1, m):
            v = a[t, j]
            if v != 0.0:
                l = float((int(v) * inv) % p)
                for c in range(j + 1, c1):
                    x = a[t, c] - l * a[pr, c]
                    x -= np.floor(x * ip) * p
                    if x < 0.0:
                        x += p
                    elif x >= p:
                        x -= p
                    a[t, c] = x
                a[t, j] = l
        piv[k] = j
        k += 1
    return k


@numba.njit(cache=True)
def _forward_solve(l11, u, p):
    # unit lower triangular solve in place, row by row
    k = l11.shape[0]
    ip = 1.0 / p
    for a in range(1, k):
        for b in range(a):
            f = l11[a, b]
            if f != 0.0:
                for c in range(u.shape[1]):
                    x = u[a, c] - f * u[b, c]
                    x -= np.floor(x * ip) * p
                    if x < 0.0:
                        x += p
                    elif x >= p:
                        x -= p
                    u[a, c] = x


def rank_mod_p(m: IntMatrix | np.ndarray, p: int) -> int:
    """Rank of ``m`` reduced modulo the prime ``p`` (p < 2**22)."""
    if p >= 1 << 22:
        raise ValueError("prime too large for exact float64 accumulation")
    data = m.data if isinstance(m, IntMatrix) else np.asarray(m)
    if data.dtype == object:
        data = np.array([[int(v) % p for v in row] for row in data.tolist()], dtype=np.int64).reshape(data.shape)
    a = np.mod(data.astype(np.int64), p).astype(np.float64)
    if a.shape[0] < a.shape[1]:
        a = np.ascontiguousarray(a.T)
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return 0
    fp = float(p)
    piv = np.zeros(_PANEL, dtype=np.int64)
    r = 0
    for c0 in range(0, cols, _PANEL):
        c1 = min(c0 + _PANEL, cols)
        k = _panel(a, r, c0, c1, p, piv)
        if k and c1 < cols:
            sel = piv[:k].copy()
            l11 = np.ascontiguousarray(a[r:r + k][:, sel])
            u = np.ascontiguousarray(a[r:r + k, c1:])
            _forward_solve(l11, u, p)
            a[r:r + k, c1:] = u
            if r + k < rows:
                l21 = a[r + k:][:, sel]
                a[r + k:, c1:] = np.mod(a[r + k:, c1:] - l21 @ u, fp)
        r += k
        if r >= rows:
            break
    return r


def rank_modular(m: IntMatrix, primes: tuple[int, ...] = PRIMES[:2]) -> int:
    """Largest rank over the given prime fields.

    Each value is a lower bound for the rank over Q; it is exact unless every
    prime divides the last nonzero invariant factor.
    """
    return max(rank_mod_p(m, p) for p in primes)
