"""Bit-packed matrices over F2.

Rows are stored as little-endian 64-bit words: entry (i, j) is bit ``j % 64``
of word ``j // 64`` in row ``i``. Elimination works on whole words.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numba
import numpy as np
import numpy.typing as npt

WORD = 64


def _nwords(cols: int) -> int:
    return max(1, (cols + WORD - 1) // WORD)


def _pack(dense: npt.NDArray[np.uint8]) -> npt.NDArray[np.uint64]:
    rows, cols = dense.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = dense & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False).reshape(rows, nw)


def _unpack(data: npt.NDArray[np.uint64], cols: int) -> npt.NDArray[np.uint8]:
    rows = data.shape[0]
    as_bytes = np.ascontiguousarray(data).astype("<u8", copy=False).view(np.uint8).reshape(rows, -1)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :cols].copy()


@numba.njit(cache=True)
def _eliminate(work, ncols, reduced):
    """Row-reduce ``work`` in place; returns pivot columns.

    Pivot for column c is the first row at or below the current rank with bit
    c set. With ``reduced`` the pivot column is cleared above as well.
    """
    rows, nw = work.shape
    pivots = np.empty(min(rows, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, rows):
            if work[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(w, nw):
                tmp = work[r, k]
                work[r, k] = work[p, k]
                work[p, k] = tmp
        start = 0 if reduced else r + 1
        for i in range(start, rows):
            if i != r and (work[i, w] & bit):
                for k in range(w, nw):
                    work[i, k] ^= work[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


@numba.njit(cache=True)
def _eliminate_tracked(work, track, ncols):
    """Reduced elimination that mirrors every row operation on ``track``."""
    rows, nw = work.shape
    tw = track.shape[1]
    pivots = np.empty(min(rows, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, rows):
            if work[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(nw):
                tmp = work[r, k]
                work[r, k] = work[p, k]
                work[p, k] = tmp
            for k in range(tw):
                tmp = track[r, k]
                track[r, k] = track[p, k]
                track[p, k] = tmp
        for i in range(rows):
            if i != r and (work[i, w] & bit):
                for k in range(w, nw):
                    work[i, k] ^= work[r, k]
                for k in range(tw):
                    track[i, k] ^= track[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


class F2Matrix:
    """Immutable matrix over F2 with bit-packed rows."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: npt.NDArray[np.uint64] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        nw = _nwords(cols)
        if data is None:
            data = np.zeros((rows, nw), dtype=np.uint64)
        else:
            data = np.ascontiguousarray(data, dtype=np.uint64)
            if data.shape != (rows, nw):
                raise ValueError(f"data shape {data.shape} does not match {(rows, nw)}")
            if cols % WORD and rows:
                tail = np.uint64((1 << (cols % WORD)) - 1)
                if np.any(data[:, -1] & ~tail):
                    raise ValueError("bits set beyond the last column")
        data.setflags(write=False)
        self.rows = rows
        self.cols = cols
        self.data = data

    # construction
    @classmethod
    def zeros(cls, rows: int, cols: int) -> F2Matrix:
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> F2Matrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense: npt.ArrayLike) -> F2Matrix:
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        arr = (np.asarray(arr, dtype=np.int64) & 1).astype(np.uint8)
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int]]) -> F2Matrix:
        """Build from (row, col) positions; repeated positions cancel."""
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for i, j in entries:
            dense[i, j] ^= 1
        return cls.from_dense(dense)

    @classmethod
    def from_row_vectors(cls, vectors: Sequence[npt.ArrayLike], cols: int) -> F2Matrix:
        if not len(vectors):
            return cls(0, cols)
        return cls.from_dense(np.vstack([np.asarray(v).reshape(1, -1) for v in vectors]))

    @classmethod
    def block(cls, blocks: Sequence[Sequence[F2Matrix]]) -> F2Matrix:
        return cls.from_dense(np.block([[b.to_dense() for b in row] for row in blocks]))

    # access
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(idx)
        return int((self.data[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def to_dense(self) -> npt.NDArray[np.uint8]:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        return _unpack(self.data, self.cols)

    def row(self, i: int) -> npt.NDArray[np.uint8]:
        return self.to_dense()[i] if self.rows else np.zeros(self.cols, dtype=np.uint8)

    def nnz(self) -> int:
        return int(self.to_dense().sum())

    def is_zero(self) -> bool:
        return not self.data.any()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, F2Matrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"F2Matrix({self.rows}x{self.cols}, nnz={self.nnz()})"

    # algebra
    def __add__(self, other: F2Matrix) -> F2Matrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return F2Matrix(self.rows, self.cols, self.data ^ other.data)

    __sub__ = __add__

    def __matmul__(self, other: F2Matrix) -> F2Matrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return F2Matrix(self.rows, other.cols)
        prod = self.to_dense().astype(np.float64) @ other.to_dense().astype(np.float64)
        return F2Matrix.from_dense(prod.astype(np.int64) & 1)

    def apply(self, vec: npt.ArrayLike) -> npt.NDArray[np.uint8]:
        v = np.asarray(vec, dtype=np.int64).reshape(-1)
        if v.size != self.cols:
            raise ValueError("vector length mismatch")
        return ((self.to_dense().astype(np.int64) @ (v & 1)) & 1).astype(np.uint8)

    @property
    def T(self) -> F2Matrix:
        return F2Matrix.from_dense(self.to_dense().T)

    def take_rows(self, idx: Sequence[int]) -> F2Matrix:
        idx = np.asarray(idx, dtype=np.int64)
        return F2Matrix(len(idx), self.cols, self.data[idx] if len(idx) else None)

    def take_cols(self, idx: Sequence[int]) -> F2Matrix:
        idx = np.asarray(idx, dtype=np.int64)
        return F2Matrix.from_dense(self.to_dense()[:, idx].reshape(self.rows, len(idx)))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> F2Matrix:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        dense = self.to_dense()[np.ix_(rows, cols)]
        return F2Matrix.from_dense(dense.reshape(len(rows), len(cols)))

    def vstack(self, other: F2Matrix) -> F2Matrix:
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return F2Matrix(self.rows + other.rows, self.cols, np.vstack([self.data, other.data]))

    def hstack(self, other: F2Matrix) -> F2Matrix:
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return F2Matrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    # elimination
    def echelon(self, reduced: bool = True) -> tuple[F2Matrix, npt.NDArray[np.int64]]:
        """Row echelon form and pivot columns (first nonzero in column order)."""
        work = self.data.copy()
        if self.rows == 0 or self.cols == 0:
            return F2Matrix(self.rows, self.cols, work), np.zeros(0, dtype=np.int64)
        piv = _eliminate(work, self.cols, reduced)
        return F2Matrix(self.rows, self.cols, work), piv

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        work = self.data.copy()
        return int(_eliminate(work, self.cols, False).size)

    def inverse(self) -> F2Matrix:
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        work = self.data.copy()
        track = F2Matrix.identity(n).data.copy()
        piv = _eliminate_tracked(work, track, n) if n else np.zeros(0, dtype=np.int64)
        if piv.size != n:
            raise np.linalg.LinAlgError("matrix is singular over F2")
        return F2Matrix(n, n, track)


def rank_f2(m: F2Matrix) -> int:
    """Dimension of the row space over F2."""
    return m.rank()


def kernel_basis(m: F2Matrix) -> list[npt.NDArray[np.uint8]]:
    """Basis of {v : m v = 0}, one vector per free column in increasing order."""
    n = m.cols
    if m.rows == 0:
        return [np.eye(n, dtype=np.uint8)[j] for j in range(n)]
    red, piv = m.echelon(reduced=True)
    dense = red.to_dense()
    pivset = set(int(c) for c in piv)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        for r, c in enumerate(piv):
            if dense[r, f]:
                v[c] = 1
        basis.append(v)
    return basis


def row_basis(vectors: F2Matrix) -> F2Matrix:
    """Reduced echelon basis of the row space."""
    red, piv = vectors.echelon(reduced=True)
    return red.take_rows(range(piv.size))


def rref_with_transform(m: F2Matrix) -> tuple[F2Matrix, F2Matrix, npt.NDArray[np.int64]]:
    """Return (R, T, pivots) with T @ m = R reduced and T invertible."""
    work = m.data.copy()
    track = F2Matrix.identity(m.rows).data.copy()
    if m.rows == 0 or m.cols == 0:
        return F2Matrix(m.rows, m.cols, work), F2Matrix(m.rows, m.rows, track), np.zeros(0, dtype=np.int64)
    piv = _eliminate_tracked(work, track, m.cols)
    return F2Matrix(m.rows, m.cols, work), F2Matrix(m.rows, m.rows, track), piv


def coordinates(basis: F2Matrix, vectors: F2Matrix) -> F2Matrix | None:
    """Solve c @ basis = vectors row by row; None if some row is outside the span.

    ``basis`` must have independent rows. Result has shape (vectors.rows, basis.rows).
    """
    if vectors.cols != basis.cols:
        raise ValueError("dimension mismatch")
    k = basis.rows
    if k == 0:
        return F2Matrix(vectors.rows, 0) if vectors.is_zero() else None
    red, trans, piv = rref_with_transform(basis)
    if piv.size != k:
        raise ValueError("basis rows are dependent")
    vd = vectors.to_dense()
    c_red = vd[:, piv]
    resid = (vd.astype(np.int64) + c_red.astype(np.int64) @ red.to_dense().astype(np.int64)) & 1
    if resid.any():
        return None
    c = (c_red.astype(np.int64) @ trans.to_dense().astype(np.int64)) & 1
    return F2Matrix.from_dense(c)


def complement_rows(sub: F2Matrix, candidates: F2Matrix) -> list[int]:
    """Indices of candidate rows extending a basis of ``sub`` greedily, in order."""
    # pivot columns of the transpose are exactly the greedily independent rows
    stacked = sub.vstack(candidates)
    if stacked.rows == 0 or stacked.cols == 0:
        return []
    _, piv = stacked.T.echelon(reduced=False)
    return [int(p) - sub.rows for p in piv if p >= sub.rows]
