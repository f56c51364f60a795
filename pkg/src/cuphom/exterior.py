"""Exterior algebra on ell generators with bitmask-indexed basis.

Generator i (1-based) is bit i-1; within a degree the basis is ordered by
increasing bitmask value. Over Z and Q the contraction sign of T inside S is
the parity of the shuffle that moves T's elements to the front of S.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, Protocol

import numpy as np
import numpy.typing as npt

RINGS = ("F2", "Z", "Q")


class Form(Protocol):
    ell: int
    degree: int

    def mask_items(self) -> list[tuple[int, int]]: ...


def popcount(x: int) -> int:
    return bin(x).count("1")


def mask_of(subset: Iterable[int]) -> int:
    m = 0
    for i in subset:
        m |= 1 << (i - 1)
    return m


def subset_of(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def shuffle_parity(t: int, s: int) -> int:
    """Parity of moving the elements of t (a subset of s) to the front of s."""
    rest = s & ~t
    p = 0
    while t:
        low = t & -t
        p += popcount(rest & (low - 1))
        t ^= low
    return p & 1


def _normalize(ring: str, c):
    if ring == "F2":
        return int(c) & 1
    if ring == "Z":
        if isinstance(c, Fraction) and c.denominator != 1:
            raise ValueError("non-integer coefficient over Z")
        return int(c)
    return Fraction(c)


@dataclass(frozen=True, eq=True)
class Multivector:
    """Element of the exterior algebra over F2, Z or Q; zero coefficients absent."""

    ell: int
    ring: str
    coeffs: Mapping[int, int | Fraction]

    def __post_init__(self):
        if self.ring not in RINGS:
            raise ValueError(f"unknown ring {self.ring!r}")
        limit = 1 << self.ell
        clean = {}
        for m, c in self.coeffs.items():
            if not 0 <= m < limit:
                raise ValueError(f"basis mask {m} uses generators beyond {self.ell}")
            c = _normalize(self.ring, c)
            if c:
                clean[m] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def zero(cls, ell: int, ring: str) -> Multivector:
        return cls(ell, ring, {})

    @classmethod
    def basis(cls, ell: int, subset: Iterable[int], ring: str = "F2", coeff=1) -> Multivector:
        return cls(ell, ring, {mask_of(subset): coeff})

    def is_zero(self) -> bool:
        return not self.coeffs

    def degrees(self) -> set[int]:
        return {popcount(m) for m in self.coeffs}

    def _check(self, other: Multivector) -> None:
        if self.ell != other.ell or self.ring != other.ring:
            raise ValueError(f"incompatible multivectors ({self.ell}, {self.ring}) vs ({other.ell}, {other.ring})")

    def __add__(self, other: Multivector) -> Multivector:
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return Multivector(self.ell, self.ring, out)

    def __neg__(self) -> Multivector:
        return Multivector(self.ell, self.ring, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: Multivector) -> Multivector:
        return self + (-other)

    def scale(self, c) -> Multivector:
        return Multivector(self.ell, self.ring, {m: c * v for m, v in self.coeffs.items()})

    def mod2(self) -> Multivector:
        if self.ring == "Q" and any(Fraction(c).denominator != 1 for c in self.coeffs.values()):
            raise ValueError("cannot reduce non-integral coefficients mod 2")
        return Multivector(self.ell, "F2", {m: int(c) for m, c in self.coeffs.items()})

    def component(self, degree: int) -> Multivector:
        return Multivector(self.ell, self.ring, {m: c for m, c in self.coeffs.items() if popcount(m) == degree})

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"0 [{self.ring}, ell={self.ell}]"
        terms = [f"{c}*e{''.join(map(str, subset_of(m))) or '_'}" for m, c in self.coeffs.items()]
        return " + ".join(terms) + f" [{self.ring}]"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    out: dict[int, int | Fraction] = {}
    signed = a.ring != "F2"
    for s, x in a.coeffs.items():
        for t, y in b.coeffs.items():
            if s & t:
                continue
            u = s | t
            c = x * y
            # e_S ^ e_T = sign * e_U where sign moves S to the front of U
            if signed and shuffle_parity(s, u):
                c = -c
            out[u] = out.get(u, 0) + c
    return Multivector(a.ell, a.ring, out)


def contract(mu: Form, x: Multivector) -> Multivector:
    """Interior product: sum over T in S of sign(T,S) mu(T) e_{S-T}."""
    if mu.ell != x.ell:
        raise ValueError(f"form on {mu.ell} generators applied to a multivector on {x.ell}")
    items = mu.mask_items()
    out: dict[int, int | Fraction] = {}
    signed = x.ring != "F2"
    for s, c in x.coeffs.items():
        for t, v in items:
            if t & s != t:
                continue
            term = c * v
            if signed and shuffle_parity(t, s):
                term = -term
            r = s ^ t
            out[r] = out.get(r, 0) + term
    return Multivector(x.ell, x.ring, out)


@dataclass(frozen=True)
class AlternatingForm:
    """Alternating integer k-form given by its values on increasing k-subsets."""

    ell: int
    degree: int
    coeffs: Mapping[tuple[int, ...], int]

    def __post_init__(self):
        clean = {tuple(k): int(v) for k, v in self.coeffs.items() if v}
        for k in clean:
            if len(k) != self.degree or list(k) != sorted(set(k)) or k[0] < 1 or k[-1] > self.ell:
                raise ValueError(f"bad key {k}")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    __hash__ = None  # type: ignore[assignment]

    def mask_items(self) -> list[tuple[int, int]]:
        return [(mask_of(k), v) for k, v in self.coeffs.items()]

    def mod2(self) -> AlternatingForm:
        return AlternatingForm(self.ell, self.degree, {k: v & 1 for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs


def form_wedge(a: Form, b: Form) -> AlternatingForm:
    """(a ^ b)(U) = sum over U = T1 + T2 of sign(T1 first in U) a(T1) b(T2)."""
    if a.ell != b.ell:
        raise ValueError("forms on different index ranges")
    da, db = a.degree, b.degree
    out: dict[tuple[int, ...], int] = {}
    for s, x in a.mask_items():
        for t, y in b.mask_items():
            if s & t:
                continue
            u = s | t
            c = -x * y if shuffle_parity(s, u) else x * y
            key = subset_of(u)
            out[key] = out.get(key, 0) + c
    return AlternatingForm(a.ell, da + db, out)


@lru_cache(maxsize=64)
def graded_basis(ell: int, degree: int) -> tuple[int, ...]:
    """Bitmasks of cardinality ``degree``, increasing."""
    if not 0 <= degree <= ell:
        return ()
    return tuple(sorted(mask_of(c) for c in combinations(range(1, ell + 1), degree)))


@lru_cache(maxsize=8)
def _positions(ell: int) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    n = 1 << ell
    masks = np.arange(n, dtype=np.int64)
    pc = _popcount_array(masks)
    pos = np.zeros(n, dtype=np.int64)
    for d in range(ell + 1):
        idx = np.flatnonzero(pc == d)
        pos[idx] = np.arange(idx.size)
    pc.setflags(write=False)
    pos.setflags(write=False)
    return pc, pos


def _popcount_array(a: npt.NDArray[np.int64]) -> npt.NDArray[np.int64]:
    a = a.astype(np.uint64)
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        out += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return out


def contraction_matrix(mu: Form, degree: int) -> npt.NDArray[np.int64]:
    """Integer matrix of contraction from degree to degree - k in bitmask order."""
    ell, k = mu.ell, mu.degree
    rows, cols = comb(ell, degree - k) if degree >= k else 0, comb(ell, degree) if 0 <= degree <= ell else 0
    out = np.zeros((rows, cols), dtype=np.int64)
    if rows == 0 or cols == 0:
        return out
    pc, pos = _positions(ell)
    src_all = np.asarray(graded_basis(ell, degree), dtype=np.int64)
    for t, v in mu.mask_items():
        src = src_all[(src_all & t) == t]
        if src.size == 0:
            continue
        rest = src & ~t
        parity = np.zeros(src.size, dtype=np.int64)
        tt = t
        while tt:
            low = tt & -tt
            parity += _popcount_array(rest & (low - 1))
            tt ^= low
        sign = 1 - 2 * (parity & 1)
        np.add.at(out, (pos[rest], pos[src]), v * sign)
    return out


@dataclass(frozen=True)
class GradedPiece:
    """Coordinate vectors in the degree-``degree`` basis ordered by bitmask."""

    ell: int
    degree: int
    vectors: tuple[tuple, ...]

    @classmethod
    def of(cls, x: Multivector, degree: int) -> GradedPiece:
        basis = graded_basis(x.ell, degree)
        index = {m: i for i, m in enumerate(basis)}
        v = [0] * len(basis)
        for m, c in x.coeffs.items():
            if popcount(m) == degree:
                v[index[m]] = c
        return cls(x.ell, degree, (tuple(v),))

    def to_multivectors(self, ring: str) -> list[Multivector]:
        basis = graded_basis(self.ell, self.degree)
        return [Multivector(self.ell, ring, {m: c for m, c in zip(basis, vec) if c}) for vec in self.vectors]
