"""Spin^c bookkeeping for framed links: H(L), the quotient by Λ and ψ^M."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ..errors import SemanticError
from ..linalg import IntMatrix, smith_normal_form

Coord = Fraction | float


@dataclass(frozen=True)
class FramedLinkLattice:
    """Framing matrix Λ: framings on the diagonal, linking numbers off it."""

    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("framing matrix must be square")
        if not np.array_equal(m, m.T):
            raise SemanticError("framing matrix must be symmetric")
        object.__setattr__(self, "matrix", tuple(tuple(int(x) for x in row) for row in m))

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]]) -> FramedLinkLattice:
        return cls(tuple(tuple(r) for r in rows))

    @property
    def ell(self) -> int:
        return len(self.matrix)

    def linking(self, i: int, j: int) -> int:
        return 0 if i == j else self.matrix[i][j]

    @property
    def offsets(self) -> tuple[Fraction, ...]:
        """lk(K_i, L - K_i)/2 reduced into [0, 1)."""
        out = []
        for i in range(self.ell):
            total = sum(self.linking(i, j) for j in range(self.ell))
            out.append(Fraction(total % 2, 2))
        return tuple(out)

    def contains(self, s: Sequence[Coord]) -> bool:
        """Whether s lies in H(L)."""
        return len(s) == self.ell and all(Fraction(x) - o == int(Fraction(x) - o) for x, o in zip(s, self.offsets))

    def same_class(self, s: Sequence[Coord], t: Sequence[Coord]) -> bool:
        """s - t in the lattice spanned by the rows of Λ."""
        if not (self.contains(s) and self.contains(t)):
            raise ValueError("points must lie in H(L)")
        diff = [int(Fraction(a) - Fraction(b)) for a, b in zip(s, t)]
        snf = smith_normal_form(IntMatrix(self.matrix))
        # P Λ Q = D, so Λ z = diff is solvable iff D y = P diff is
        y = (snf.left @ IntMatrix([[d] for d in diff])).tolist()
        for i, row in enumerate(y):
            v = row[0]
            di = snf.diagonal[i] if i < len(snf.diagonal) else 0
            if di == 0 and v != 0:
                return False
            if di != 0 and v % di:
                return False
        return True

    def is_torsion(self, s: Sequence[Coord]) -> bool:
        """2s in the rational span of the rows of Λ."""
        twice = [2 * Fraction(x) for x in s]
        snf = smith_normal_form(IntMatrix(self.matrix))
        k = snf.rank
        y = (snf.left @ IntMatrix([[int(v)] for v in twice])).tolist()
        return all(row[0] == 0 for row in y[k:])


@dataclass(frozen=True)
class SpincClass:
    representative: tuple[Fraction, ...]
    torsion: bool

    def __str__(self) -> str:
        return "[(" + ", ".join(str(x) for x in self.representative) + ")]"


@dataclass(frozen=True)
class SpincSummary:
    """H(L)/Λ ≅ ⊕ Z/d_i ⊕ Z^{b1}; the torsion classes are listed explicitly."""

    invariant_factors: tuple[int, ...]
    b1: int
    classes: tuple[SpincClass, ...]

    @property
    def torsion_count(self) -> int:
        return len(self.classes)

    @property
    def class_count(self) -> int | float:
        return math.inf if self.b1 else math.prod(d for d in self.invariant_factors if d)


def spinc_classes(lat: FramedLinkLattice) -> SpincSummary:
    """Torsion classes of H(L)/Λ via the Smith form P Λ Q = D."""
    snf = smith_normal_form(IntMatrix(lat.matrix))
    ell, k = lat.ell, snf.rank
    p = np.array(snf.left.tolist(), dtype=object)
    p_inv = _unimodular_inverse(p)
    # s = offset + P^{-1} y; torsion pins y_j = -(P offset)_j for j >= k
    p_off = [sum(Fraction(int(p[j][i])) * lat.offsets[i] for i in range(ell)) for j in range(ell)]
    fixed = [-p_off[j] for j in range(k, ell)]
    if any(v.denominator != 1 for v in fixed):
        return SpincSummary(tuple(snf.diagonal[:k]), ell - k, ())
    classes = []
    ranges = [range(snf.diagonal[j]) for j in range(k)]
    for free in _product(ranges):
        y = [Fraction(v) for v in free] + fixed
        s = tuple(lat.offsets[i] + sum(Fraction(int(p_inv[i][j])) * y[j] for j in range(ell)) for i in range(ell))
        classes.append(SpincClass(s, lat.is_torsion(s)))
    return SpincSummary(tuple(snf.diagonal[:k]), ell - k, tuple(classes))


def _product(ranges: Sequence[range]):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product(ranges[1:]):
            yield (head,) + tail


def _unimodular_inverse(p: np.ndarray) -> list[list[int]]:
    n = len(p)
    aug = [[Fraction(int(x)) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(p)]
    for c in range(n):
        r = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[r] = aug[r], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [[int(x) for x in row[n:]] for row in aug]


def psi_map_lattice(
    s: Sequence[Coord], sublink: Mapping[int, int], lat: FramedLinkLattice
) -> tuple[Coord, ...]:
    """ψ^M(s): drop the components of M (1-based, value = orientation ±1).

    Remaining coordinates shift by -Σ_{j in M} sign_j lk(K_i, K_j)/2;
    infinite coordinates pass through.
    """
    if len(s) != lat.ell:
        raise ValueError("point has the wrong number of coordinates")
    for j, sign in sublink.items():
        if not 1 <= j <= lat.ell or sign not in (1, -1):
            raise ValueError(f"bad sublink entry {j}: {sign}")
    out: list[Coord] = []
    for i in range(1, lat.ell + 1):
        if i in sublink:
            continue
        x = s[i - 1]
        if isinstance(x, float) and math.isinf(x):
            out.append(x)
            continue
        shift = sum(Fraction(sign * lat.linking(i - 1, j - 1), 2) for j, sign in sublink.items())
        out.append(Fraction(x) - shift)
    return tuple(out)
