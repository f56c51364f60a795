"""Integer matrices, Smith normal form and exact rank over Q."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .f2 import F2Matrix

_INT64_SAFE = 1 << 62


class IntMatrix:
    """Immutable integer matrix.

    Entries are exact. Storage is ``int64`` while every entry is below 2**62 in
    absolute value and Python ``int`` objects otherwise.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: npt.ArrayLike | Sequence[Sequence[int]], shape: tuple[int, int] | None = None):
        if isinstance(data, np.ndarray) and data.dtype != object:
            arr = np.asarray(data)
            if arr.dtype.kind not in "iub":
                raise TypeError("integer entries required")
            arr = arr.astype(np.int64)
        else:
            rows = [list(map(int, r)) for r in data]
            if shape is None:
                shape = (len(rows), len(rows[0]) if rows else 0)
            if any(len(r) != shape[1] for r in rows):
                raise ValueError("ragged rows")
            big = any(abs(v) >= _INT64_SAFE for r in rows for v in r)
            if big:
                arr = np.empty(shape, dtype=object)
                for i, r in enumerate(rows):
                    for j, v in enumerate(r):
                        arr[i, j] = v
            else:
                arr = np.array(rows, dtype=np.int64).reshape(shape)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        arr.setflags(write=False)
        self.rows, self.cols = arr.shape
        self.data = arr

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(np.eye(n, dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        return int(self.data[idx])

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.data.tolist()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.tolist() == other.tolist()

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}x{self.cols})"

    def __add__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.tolist(), other.tolist())], self.shape)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.data.dtype != object and other.data.dtype != object:
            # bound the accumulation before trusting int64
            a = int(np.abs(self.data).max(initial=0))
            b = int(np.abs(other.data).max(initial=0))
            if a * b * max(1, self.cols) < _INT64_SAFE:
                return IntMatrix(self.data @ other.data)
        left, right = self.tolist(), other.tolist()
        cols = list(zip(*right)) if right else []
        out = [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in left]
        return IntMatrix(out, (self.rows, other.cols))

    def is_zero(self) -> bool:
        return not np.any(self.data != 0)

    def mod2(self) -> F2Matrix:
        if self.data.dtype == object:
            return F2Matrix.from_dense([[int(v) & 1 for v in row] for row in self.data.tolist()] or np.zeros((0, self.cols)))
        return F2Matrix.from_dense(self.data & 1)

    @property
    def T(self) -> IntMatrix:
        return IntMatrix(self.data.T.copy())


@dataclass(frozen=True)
class SmithForm:
    """``left @ m @ right`` is diagonal with entries ``diagonal`` (padded with zeros)."""

    diagonal: tuple[int, ...]
    left: IntMatrix | None
    right: IntMatrix | None

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    @property
    def even_factors(self) -> int:
        """Number of nonzero even invariant factors (2-torsion in the cokernel)."""
        return sum(1 for d in self.diagonal if d and d % 2 == 0)


def smith_normal_form(m: IntMatrix, transforms: bool = True) -> SmithForm:
    """Smith normal form over Z with exact Python integers.

    The diagonal has length min(rows, cols); trailing entries may be zero.
    """
    rows, cols = m.shape
    a = m.tolist()
    left = [[int(i == j) for j in range(rows)] for i in range(rows)] if transforms else None
    right = [[int(i == j) for j in range(cols)] for i in range(cols)] if transforms else None

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        if left is not None:
            left[i], left[j] = left[j], left[i]

    def swap_cols(i: int, j: int) -> None:
        for r in a:
            r[i], r[j] = r[j], r[i]
        if right is not None:
            for r in right:
                r[i], r[j] = r[j], r[i]

    def add_row(dst: int, src: int, f: int) -> None:
        # row_dst += f * row_src
        rs, rd = a[src], a[dst]
        for k in range(cols):
            if rs[k]:
                rd[k] += f * rs[k]
        if left is not None:
            ls, ld = left[src], left[dst]
            for k in range(rows):
                if ls[k]:
                    ld[k] += f * ls[k]

    def add_col(dst: int, src: int, f: int) -> None:
        for r in a:
            if r[src]:
                r[dst] += f * r[src]
        if right is not None:
            for r in right:
                if r[src]:
                    r[dst] += f * r[src]

    t = 0
    while t < min(rows, cols):
        # smallest nonzero entry of the trailing block as pivot
        best = None
        for i in range(t, rows):
            row = a[i]
            for j in range(t, cols):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // p
                    add_row(i, t, -q)
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // p
                    add_col(j, t, -q)
                    if a[t][j]:
                        done = False
            if done:
                # divisibility of the trailing block by the pivot
                bad = None
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if a[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(t, bad, 1)
                continue
            # move the smallest remainder in row/column t to the pivot
            best = (abs(a[t][t]), t, t)
            for i in range(t + 1, rows):
                if a[i][t] and abs(a[i][t]) < best[0]:
                    best = (abs(a[i][t]), i, t)
            for j in range(t + 1, cols):
                if a[t][j] and abs(a[t][j]) < best[0]:
                    best = (abs(a[t][j]), t, j)
            _, bi, bj = best
            if bi != t:
                swap_rows(t, bi)
            if bj != t:
                swap_cols(t, bj)
        if a[t][t] < 0:
            a[t] = [-v for v in a[t]]
            if left is not None:
                left[t] = [-v for v in left[t]]
        t += 1
    diag = tuple(a[i][i] for i in range(min(rows, cols)))
    return SmithForm(
        diagonal=diag,
        left=IntMatrix(left, (rows, rows)) if left is not None else None,
        right=IntMatrix(right, (cols, cols)) if right is not None else None,
    )


def bareiss_rank(m: IntMatrix) -> int:
    """Rank over Q by fraction-free Gaussian elimination."""
    a = m.tolist()
    rows, cols = m.shape
    r = 0
    prev = 1
    for c in range(cols):
        p = next((i for i in range(r, rows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        for i in range(r + 1, rows):
            f = a[i][c]
            row_i, row_r = a[i], a[r]
            for j in range(c, cols):
                row_i[j] = (piv * row_i[j] - f * row_r[j]) // prev
        prev = piv
        r += 1
        if r == rows:
            break
    return r
