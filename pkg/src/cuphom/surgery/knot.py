"""Model knot complexes and the integer-surgery mapping cone in the infinity flavor.

Everything is computed on the U=1 fiber. U-powers are kept as integer
exponents so gradings can be checked and, where a Spin^c class glues pieces
along a cycle with inconsistent grading shifts, the rank is taken over F2(U).
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from ..cupform import _is_int, load_json
from ..errors import SchemaError, SemanticError
from ..linalg import F2Matrix, HomologyData, complex_homology_rank, induced_map, is_chain_map

INF = math.inf


@dataclass(frozen=True)
class Generator:
    name: str
    A: int
    M: int


@dataclass(frozen=True)
class Entry:
    source: str
    target: str
    nz: int
    nw: int

    def label(self) -> str:
        return f"{self.source}->{self.target} (nz={self.nz}, nw={self.nw})"


class ModelKnotComplex:
    """Generators with Alexander and relative Maslov gradings plus differential entries."""

    def __init__(self, generators: Sequence[Generator], differential: Sequence[Entry]):
        self.generators = tuple(generators)
        self.differential = tuple(differential)
        self.index = {g.name: i for i, g in enumerate(self.generators)}
        if len(self.index) != len(self.generators):
            raise SchemaError("duplicate generator names")
        for e in self.differential:
            for name in (e.source, e.target):
                if name not in self.index:
                    raise SchemaError(f"differential entry {e.label()} names unknown generator {name!r}")
        self._validate()

    def generator(self, name: str) -> Generator:
        return self.generators[self.index[name]]

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def max_abs_alexander(self) -> int:
        return max((abs(g.A) for g in self.generators), default=0)

    def _validate(self) -> None:
        for e in self.differential:
            if e.nz < 0 or e.nw < 0:
                raise SemanticError(f"entry {e.label()}: counts must be nonnegative")
            x, y = self.generator(e.source), self.generator(e.target)
            if x.A - y.A != e.nz - e.nw:
                raise SemanticError(
                    f"entry {e.label()}: A({x.name}) - A({y.name}) = {x.A - y.A} but nz - nw = {e.nz - e.nw}"
                )
            if x.M - y.M != 1 - 2 * e.nw:
                raise SemanticError(
                    f"entry {e.label()}: M({x.name}) - M({y.name}) = {x.M - y.M} but 1 - 2nw = {1 - 2 * e.nw}"
                )
        alex = Counter(g.A for g in self.generators)
        if alex != Counter({-a: c for a, c in alex.items()}):
            raise SemanticError("Alexander gradings are not symmetric about 0")
        d = self.u1_differential()
        if not (d @ d).is_zero():
            raise SemanticError("differential does not square to zero at U=1")

    def u1_differential(self) -> F2Matrix:
        """Differential with U=1 as a (target x source) matrix."""
        n = self.rank
        entries = [(self.index[e.target], self.index[e.source]) for e in self.differential]
        return F2Matrix.from_entries(n, n, entries)

    @classmethod
    def from_json_obj(cls, obj: Any) -> ModelKnotComplex:
        if not isinstance(obj, dict):
            raise SchemaError("knot complex must be a JSON object")
        extra = set(obj) - {"generators", "differential"}
        if extra:
            raise SchemaError(f"unknown fields: {sorted(extra)}")
        if "generators" not in obj or "differential" not in obj:
            raise SchemaError("knot complex needs 'generators' and 'differential'")
        gens = []
        if not isinstance(obj["generators"], list):
            raise SchemaError("'generators' must be a list")
        for g in obj["generators"]:
            if not isinstance(g, dict) or set(g) != {"name", "A", "M"}:
                raise SchemaError(f"generator must have exactly name, A, M: {g!r}")
            if not isinstance(g["name"], str) or not _is_int(g["A"]) or not _is_int(g["M"]):
                raise SchemaError(f"bad generator field types: {g!r}")
            gens.append(Generator(g["name"], g["A"], g["M"]))
        if not isinstance(obj["differential"], list):
            raise SchemaError("'differential' must be a list")
        entries = []
        for e in obj["differential"]:
            if not isinstance(e, dict) or set(e) != {"from", "to", "nz", "nw"}:
                raise SchemaError(f"differential entry must have exactly from, to, nz, nw: {e!r}")
            if not isinstance(e["from"], str) or not isinstance(e["to"], str):
                raise SchemaError(f"bad generator reference in {e!r}")
            if not _is_int(e["nz"]) or not _is_int(e["nw"]):
                raise SchemaError(f"counts must be integers in {e!r}")
            entries.append(Entry(e["from"], e["to"], e["nz"], e["nw"]))
        return cls(gens, entries)

    @classmethod
    def from_json(cls, text: str) -> ModelKnotComplex:
        return cls.from_json_obj(load_json(text))

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "generators": [{"name": g.name, "A": g.A, "M": g.M} for g in self.generators],
            "differential": [{"from": e.source, "to": e.target, "nz": e.nz, "nw": e.nw} for e in self.differential],
        }


def unknot() -> ModelKnotComplex:
    return ModelKnotComplex([Generator("x", 0, 0)], [])


def trefoil() -> ModelKnotComplex:
    """Staircase of step 1: b hits a with a w-disk and c with a z-disk."""
    return ModelKnotComplex(
        [Generator("a", 1, 0), Generator("b", 0, -1), Generator("c", -1, -2)],
        [Entry("b", "a", 0, 1), Entry("b", "c", 1, 0)],
    )


def _clip(v: float) -> float:
    return v if v > 0 else 0


@dataclass(frozen=True)
class AInfinity:
    """A^∞(s) on the U=1 fiber: exponents per entry and gradings gr_s."""

    knot: ModelKnotComplex
    s: float
    exponents: tuple[int, ...]
    gradings: tuple[int, ...]

    @property
    def differential(self) -> F2Matrix:
        return self.knot.u1_differential()

    def entries(self):
        return zip(self.knot.differential, self.exponents)


def _exponent(k: ModelKnotComplex, e: Entry, s: float) -> int:
    if s == INF:
        return e.nw
    if s == -INF:
        return e.nz
    x, y = k.generator(e.source), k.generator(e.target)
    return int(_clip(x.A - s) - _clip(y.A - s) + e.nw)


def _grading(k: ModelKnotComplex, g: Generator, s: float) -> int:
    if s == INF:
        return g.M
    if s == -INF:
        return g.M - 2 * g.A
    return int(g.M - 2 * _clip(g.A - s))


def _square_is_zero(k: ModelKnotComplex, exps: Sequence[int]) -> bool:
    """d∘d = 0 over F2[U, U^-1], tracking exponents."""
    out: Counter = Counter()
    by_source: dict[str, list[tuple[Entry, int]]] = {}
    for e, x in zip(k.differential, exps):
        by_source.setdefault(e.source, []).append((e, x))
    for e1, x1 in zip(k.differential, exps):
        for e2, x2 in by_source.get(e1.target, []):
            out[(e1.source, e2.target, x1 + x2)] += 1
    return all(c % 2 == 0 for c in out.values())


def a_infinity(k: ModelKnotComplex, s: float) -> AInfinity:
    """Exponent E_s = (A(x)-s)∨0 - (A(y)-s)∨0 + n_w; n_w at +∞ and n_z at -∞."""
    if not (s in (INF, -INF) or float(s).is_integer()):
        raise ValueError(f"s must be an integer or ±inf, got {s!r}")
    exps = tuple(_exponent(k, e, s) for e in k.differential)
    if any(x < 0 for x in exps):
        raise AssertionError("negative U-exponent")
    grs = tuple(_grading(k, g, s) for g in k.generators)
    for e, x in zip(k.differential, exps):
        # ∂ has degree -1 with U of degree -2
        if grs[k.index[e.source]] - 1 != grs[k.index[e.target]] - 2 * x:
            raise AssertionError(f"grading bookkeeping fails on {e.label()}")
    if not _square_is_zero(k, exps):
        raise AssertionError("A^∞(s) differential does not square to zero")
    return AInfinity(k, s, exps, grs)


@dataclass(frozen=True)
class InclusionMap:
    """Diagonal map x -> U^{e(x)} x from A^∞(s) to A^∞(±∞)."""

    s: int
    sign: int
    exponents: tuple[int, ...]
    degree_shift: int

    def u1_matrix(self) -> F2Matrix:
        return F2Matrix.identity(len(self.exponents))


def inclusion_map(k: ModelKnotComplex, s: int, sign: int) -> InclusionMap:
    """I^{±}_s with exponents (±(A(x) - s)) ∨ 0, checked to be a chain map."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not float(s).is_integer():
        raise ValueError("s must be finite")
    src = a_infinity(k, s)
    tgt = a_infinity(k, sign * INF)
    exps = tuple(int(_clip(sign * (g.A - s))) for g in k.generators)
    for e, x_src, x_tgt in zip(k.differential, src.exponents, tgt.exponents):
        i, j = k.index[e.source], k.index[e.target]
        if x_src + exps[j] != exps[i] + x_tgt:
            raise AssertionError(f"inclusion is not a chain map on {e.label()}")
    shifts = {tgt.gradings[i] - 2 * exps[i] - src.gradings[i] for i in range(k.rank)}
    if len(shifts) > 1:
        raise AssertionError("inclusion is not homogeneous")
    return InclusionMap(int(s), sign, exps, shifts.pop() if shifts else 0)


# -- polynomials over F2 as int bitmasks (bit i = coefficient of U^i) --------


def _pmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _pdiv_exact(a: int, b: int) -> int:
    q = 0
    db = b.bit_length()
    while a and a.bit_length() >= db:
        shift = a.bit_length() - db
        q ^= 1 << shift
        a ^= b << shift
    if a:
        raise ArithmeticError("inexact polynomial division")
    return q


def rank_f2_rational(m: Sequence[Sequence[int]]) -> int:
    """Rank over F2(U) of a matrix with entries in F2[U] by fraction-free elimination."""
    a = [list(row) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    prev, r = 1, 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                a[i][j] = _pdiv_exact(_pmul(p, a[i][j]) ^ _pmul(a[i][c], a[r][j]), prev)
            a[i][c] = 0
        prev = p
        r += 1
    return r


# -- the surgery mapping cone -----------------------------------------------


@dataclass(frozen=True)
class Destabilization:
    """Quasi-isomorphisms A^∞(+∞) -> B and A^∞(-∞) -> B on the U=1 fiber."""

    plus: F2Matrix
    minus: F2Matrix

    @classmethod
    def identity(cls, k: ModelKnotComplex) -> Destabilization:
        eye = F2Matrix.identity(k.rank)
        return cls(eye, eye)

    def verify(self, k: ModelKnotComplex) -> None:
        d = k.u1_differential()
        h = HomologyData.of(d)
        for label, f in (("+", self.plus), ("-", self.minus)):
            if f.shape != (k.rank, k.rank):
                raise SemanticError(f"destabilization {label} has shape {f.shape}")
            if not is_chain_map(f, d, d):
                raise SemanticError(f"destabilization {label} is not a chain map")
            fs = induced_map(f, h, h)
            if fs.rank() != h.rank:
                raise SemanticError(f"destabilization {label} is not a quasi-isomorphism")


@dataclass(frozen=True)
class ClassResult:
    label: int
    rank: int
    consistent: bool
    pieces: tuple[tuple[str, int], ...]


@dataclass
class SurgeryComplexSlice:
    knot: ModelKnotComplex
    n: int
    S: int
    pieces: tuple[tuple[str, int], ...]
    classes: dict[int, ClassResult]
    stable: bool = False
    stable_against: int | None = None
    differential: F2Matrix | None = field(default=None, repr=False)

    @property
    def total_rank(self) -> int:
        return sum(c.rank for c in self.classes.values())

    def rank_table(self) -> dict[int, int]:
        return {s: c.rank for s, c in sorted(self.classes.items())}

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "framing": self.n,
            "truncation": self.S,
            "classes": {str(s): r for s, r in self.rank_table().items()},
            "total_rank": self.total_rank,
            "stable": self.stable,
            "stable_against": self.stable_against,
        }


def _window(n: int, S: int) -> tuple[list[int], list[int]]:
    a = list(range(-S, S + 1))
    b = list(range(-S + n, S + 1)) if n >= 0 else list(range(-S, S + n + 1))
    return a, b


def _class_of(s: int, n: int) -> int:
    return s % abs(n) if n else s


def _edges(n: int, a_range: list[int], b_range: list[int]):
    """(source A index s, target B index t, grading shift) for Φ^+ and Φ^-."""
    bset = set(b_range)
    for s in a_range:
        if s in bset:
            yield s, s, 0, "+"
        if s + n in bset:
            yield s, s + n, -2 * s, "-"


def _component_shifts(nodes, edges) -> bool:
    """Whether grading shifts along the class graph admit a consistent gauge."""
    adj: dict[tuple, list[tuple[tuple, int]]] = {v: [] for v in nodes}
    for s, t, shift, _ in edges:
        adj[("A", s)].append((("B", t), shift))
        adj[("B", t)].append((("A", s), -shift))
    level: dict[tuple, int] = {}
    for root in nodes:
        if root in level:
            continue
        level[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w, sh in adj[v]:
                if w not in level:
                    level[w] = level[v] + sh
                    queue.append(w)
                elif level[w] != level[v] + sh:
                    return False
    return True


def _class_rank(k, n, label, a_list, b_list, edges, dest, h_data):
    d = k.u1_differential()
    g = k.rank
    nodes = [("A", s) for s in a_list] + [("B", t) for t in b_list]
    if _component_shifts(nodes, edges):
        offset = {v: i * g for i, v in enumerate(nodes)}
        total = len(nodes) * g
        entries = []
        for v in nodes:
            base = offset[v]
            for r, c in zip(*d.to_dense().nonzero()):
                entries.append((base + int(r), base + int(c)))
        for s, t, _, kind in edges:
            f = dest.plus if kind == "+" else dest.minus
            src, tgt = offset[("A", s)], offset[("B", t)]
            for r, c in zip(*f.to_dense().nonzero()):
                entries.append((tgt + int(r), src + int(c)))
        big = F2Matrix.from_entries(total, total, entries) if entries else F2Matrix(total, total)
        return complex_homology_rank(big), True, big
    # inconsistent gauge: only the n = 0 two-edge cycle A_s => B_s arises
    if len(a_list) != 1 or len(b_list) != 1 or len(edges) != 2:
        raise AssertionError("unexpected inconsistent class graph")
    s = a_list[0]
    x = induced_map(dest.plus, h_data, h_data).to_dense()
    y = induced_map(dest.minus, h_data, h_data).to_dense()
    # Φ^- sits U^s away from Φ^+; clear negative powers by an overall unit
    px, py = (1, 1 << s) if s >= 0 else (1 << -s, 1)
    poly = [[(px if x[i][j] else 0) ^ (py if y[i][j] else 0) for j in range(x.shape[1])] for i in range(x.shape[0])]
    rk = rank_f2_rational(poly) if poly else 0
    return 2 * h_data.rank - 2 * rk, False, None


def _slice(k: ModelKnotComplex, n: int, S: int, dest: Destabilization) -> SurgeryComplexSlice:
    a_range, b_range = _window(n, S)
    for s in a_range:
        a_infinity(k, s)
        inclusion_map(k, s, 1)
        inclusion_map(k, s, -1)
    h_data = HomologyData.of(k.u1_differential())
    edges = list(_edges(n, a_range, b_range))
    labels = sorted({_class_of(s, n) for s in a_range + b_range})
    classes = {}
    for label in labels:
        a_list = [s for s in a_range if _class_of(s, n) == label]
        b_list = [t for t in b_range if _class_of(t, n) == label]
        cls_edges = [e for e in edges if _class_of(e[0], n) == label]
        rk, ok, _ = _class_rank(k, n, label, a_list, b_list, cls_edges, dest, h_data)
        pieces = tuple([("A", s) for s in a_list] + [("B", t) for t in b_list])
        classes[label] = ClassResult(label, rk, ok, pieces)
    pieces = tuple([("A", s) for s in a_range] + [("B", t) for t in b_range])
    return SurgeryComplexSlice(k, n, S, pieces, classes)


def knot_surgery_complex(
    k: ModelKnotComplex,
    n: int,
    dest: Destabilization | None = None,
    S: int | None = None,
) -> SurgeryComplexSlice:
    """Truncated mapping cone for n-surgery with ranks per Spin^c class.

    For n != 0 classes are s mod |n|; for n = 0 every s in the window is its
    own class. Ranks are recomputed at S + 3 and must agree.
    """
    if not _is_int(n):
        raise ValueError("framing must be an integer")
    bound = k.max_abs_alexander + abs(n)
    if S is None:
        S = bound + 2
    if S <= bound:
        raise SemanticError(f"truncation S={S} must exceed max|A| + |n| = {bound}")
    dest = dest if dest is not None else Destabilization.identity(k)
    dest.verify(k)
    out = _slice(k, n, S, dest)
    wider = _slice(k, n, S + 3, dest)
    for label, c in out.classes.items():
        if wider.classes[label].rank != c.rank:
            raise AssertionError(f"rank of class {label} changes between S={S} and S={S + 3}")
    if n == 0:
        extra = set(wider.classes) - set(out.classes)
        if any(wider.classes[s].rank for s in extra):
            raise AssertionError("nonzero rank outside the truncation window")
    out.stable, out.stable_against = True, S + 3
    return out

