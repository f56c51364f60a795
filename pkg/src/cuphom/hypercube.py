"""Hyperboxes of F2 chain complexes: relations, total complexes, compression,
face complexes, acyclic cancellation and mapping-cone ranks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from .cupform import _is_int, load_json
from .errors import RelationError, SchemaError, SemanticError
from .linalg import F2Matrix, HomologyData, NotAComplexError, complex_homology_rank, cone_differential, induced_map

Vertex = tuple[int, ...]


def lattice(size: Sequence[int]) -> list[Vertex]:
    """All vertices of E(size) in lexicographic order."""
    return [tuple(v) for v in itertools.product(*(range(d + 1) for d in size))]


def unit_vectors(n: int) -> list[Vertex]:
    """{0,1}^n in lexicographic order (the zero vector first)."""
    return [tuple(v) for v in itertools.product((0, 1), repeat=n)]


def norm(v: Sequence[int]) -> int:
    return int(sum(v))


def _add(a: Sequence[int], b: Sequence[int]) -> Vertex:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Sequence[int], b: Sequence[int]) -> Vertex:
    return tuple(x - y for x, y in zip(a, b))


def _bits(v: Sequence[int]) -> str:
    return "".join(str(x) for x in v)


class HyperboxComplex:
    """Vertex complexes C^ε with maps D^{ε'}_ε : C^ε -> C^{ε+ε'}.

    ``maps`` is keyed by (ε, ε'); ε' = 0 is the internal differential D^0.
    Missing maps are zero.
    """

    def __init__(
        self,
        size: Sequence[int],
        dims: Mapping[Vertex, int],
        maps: Mapping[tuple[Vertex, Vertex], F2Matrix],
        gradings: Mapping[Vertex, Sequence[int]] | None = None,
    ):
        self.size = tuple(int(d) for d in size)
        if any(d < 0 for d in self.size):
            raise ValueError("hyperbox sides must be nonnegative")
        self.n = len(self.size)
        verts = lattice(self.size)
        if set(dims) != set(verts):
            raise ValueError("dims must list every vertex of the hyperbox exactly once")
        self.dims = {v: int(dims[v]) for v in verts}
        self.gradings = {v: tuple(int(g) for g in (gradings or {}).get(v, (0,) * self.dims[v])) for v in verts}
        for v in verts:
            if len(self.gradings[v]) != self.dims[v]:
                raise ValueError(f"grading at {v} has the wrong length")
        clean: dict[tuple[Vertex, Vertex], F2Matrix] = {}
        for (eps, step), m in maps.items():
            eps, step = tuple(eps), tuple(step)
            if len(eps) != self.n or len(step) != self.n or any(x not in (0, 1) for x in step):
                raise ValueError(f"bad map key {(eps, step)}")
            tgt = _add(eps, step)
            if eps not in self.dims or tgt not in self.dims:
                raise ValueError(f"map {step} at {eps} leaves the hyperbox")
            if m.shape != (self.dims[tgt], self.dims[eps]):
                raise ValueError(f"map {step} at {eps} has shape {m.shape}, expected {(self.dims[tgt], self.dims[eps])}")
            if not m.is_zero():
                clean[(eps, step)] = m
        self.maps = clean

    def vertices(self) -> list[Vertex]:
        return lattice(self.size)

    @property
    def is_hypercube(self) -> bool:
        return all(d == 1 for d in self.size)

    def map(self, eps: Vertex, step: Vertex) -> F2Matrix:
        eps, step = tuple(eps), tuple(step)
        m = self.maps.get((eps, step))
        if m is not None:
            return m
        return F2Matrix(self.dims[_add(eps, step)], self.dims[eps])

    def d0(self, eps: Vertex) -> F2Matrix:
        return self.map(eps, (0,) * self.n)

    def with_maps(self, extra: Mapping[tuple[Vertex, Vertex], F2Matrix]) -> HyperboxComplex:
        """A copy with the given maps added (over F2) to the existing ones."""
        merged = dict(self.maps)
        for key, m in extra.items():
            key = (tuple(key[0]), tuple(key[1]))
            merged[key] = merged[key] + m if key in merged else m
        return HyperboxComplex(self.size, self.dims, merged, self.gradings)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HyperboxComplex):
            return NotImplemented
        return (self.size, self.dims, self.gradings, self.maps) == (other.size, other.dims, other.gradings, other.maps)

    def __repr__(self) -> str:
        return f"HyperboxComplex(size={self.size}, total_dim={sum(self.dims.values())}, maps={len(self.maps)})"

    # JSON
    def to_json_obj(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for v in self.vertices():
            maps = {}
            for step in unit_vectors(self.n):
                m = self.maps.get((v, step))
                if m is not None:
                    dense = m.to_dense()
                    maps[_bits(step)] = [[int(i), int(j)] for i, j in zip(*np.nonzero(dense))]
            out[_bits(v)] = {"dim": self.dims[v], "grading": list(self.gradings[v]), "maps": maps}
        return {"vertices": out}

    @classmethod
    def from_json_obj(cls, obj: Any) -> HyperboxComplex:
        if not isinstance(obj, dict) or set(obj) != {"vertices"}:
            raise SchemaError("hypercube input must be an object with the single key 'vertices'")
        verts = obj["vertices"]
        if not isinstance(verts, dict) or not verts:
            raise SchemaError("'vertices' must be a nonempty object")
        keys = list(verts)
        n = len(keys[0])
        for k in keys:
            if len(k) != n or not k.isdigit():
                raise SchemaError(f"vertex key {k!r} must be a digit string of length {n}")
        size = tuple(max(int(k[i]) for k in keys) for i in range(n))
        expected = {_bits(v) for v in lattice(size)}
        if set(keys) != expected:
            missing = sorted(expected - set(keys))
            raise SchemaError(f"vertex set is not a full hyperbox; missing {missing[:5]}")
        dims: dict[Vertex, int] = {}
        gradings: dict[Vertex, tuple[int, ...]] = {}
        raw_maps: dict[tuple[Vertex, Vertex], list] = {}
        for k, body in verts.items():
            v = tuple(int(c) for c in k)
            if not isinstance(body, dict):
                raise SchemaError(f"vertex {k} must be an object")
            unknown = set(body) - {"dim", "grading", "maps"}
            if unknown or "dim" not in body:
                raise SchemaError(f"vertex {k}: needs 'dim', unknown fields {sorted(unknown)}")
            dim = body["dim"]
            if not _is_int(dim) or dim < 0:
                raise SchemaError(f"vertex {k}: 'dim' must be a nonnegative integer")
            dims[v] = dim
            grading = body.get("grading", [0] * dim)
            if not (isinstance(grading, list) and len(grading) == dim and all(_is_int(g) for g in grading)):
                raise SchemaError(f"vertex {k}: 'grading' must list {dim} integers")
            gradings[v] = tuple(grading)
            maps = body.get("maps", {})
            if not isinstance(maps, dict):
                raise SchemaError(f"vertex {k}: 'maps' must be an object")
            for sk, entries in maps.items():
                if len(sk) != n or any(c not in "01" for c in sk):
                    raise SchemaError(f"vertex {k}: map key {sk!r} must be a 0/1 string of length {n}")
                step = tuple(int(c) for c in sk)
                tgt = _add(v, step)
                if _bits(tgt) not in expected:
                    raise SchemaError(f"vertex {k}: map {sk} leaves the hyperbox")
                if not isinstance(entries, list):
                    raise SchemaError(f"vertex {k}: map {sk} must be a list of [row, col] pairs")
                raw_maps[(v, step)] = entries
        maps_out: dict[tuple[Vertex, Vertex], F2Matrix] = {}
        for (v, step), entries in raw_maps.items():
            rows, cols = dims[_add(v, step)], dims[v]
            for e in entries:
                if not (isinstance(e, list) and len(e) == 2 and all(_is_int(x) for x in e)):
                    raise SchemaError(f"map {_bits(step)} at {_bits(v)}: entry {e!r} must be [row, col]")
                if not (0 <= e[0] < rows and 0 <= e[1] < cols):
                    raise SchemaError(f"map {_bits(step)} at {_bits(v)}: entry {e} outside {rows}x{cols}")
            maps_out[(v, step)] = F2Matrix.from_entries(rows, cols, [tuple(e) for e in entries])
        return cls(size, dims, maps_out, gradings)

    @classmethod
    def from_json(cls, text: str) -> HyperboxComplex:
        return cls.from_json_obj(load_json(text))


@dataclass(frozen=True)
class Violation:
    eps: Vertex
    step: Vertex
    composite: F2Matrix

    def to_json_obj(self) -> dict[str, Any]:
        return {"eps": _bits(self.eps), "eps_prime": _bits(self.step), "nonzero_entries": self.composite.nnz()}


def check_relations(h: HyperboxComplex) -> list[Violation]:
    """Every (ε, ε') whose relation sum Σ_γ D^{ε'-γ}_{ε+γ} D^γ_ε is nonzero."""
    by_source: dict[Vertex, list[tuple[Vertex, F2Matrix]]] = {}
    for (eps, step), m in h.maps.items():
        by_source.setdefault(eps, []).append((step, m))
    sums: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    for eps, first in by_source.items():
        for gamma, a in first:
            mid = _add(eps, gamma)
            for delta, b in by_source.get(mid, ()):
                if any(x and y for x, y in zip(gamma, delta)):
                    continue
                key = (eps, _add(gamma, delta))
                term = b @ a
                sums[key] = sums[key] + term if key in sums else term
    out = [Violation(eps, step, m) for (eps, step), m in sums.items() if not m.is_zero()]
    out.sort(key=lambda v: (v.eps, norm(v.step), v.step))
    return out


def require_relations(h: HyperboxComplex) -> None:
    bad = check_relations(h)
    if bad:
        pairs = ", ".join(f"({_bits(v.eps)}, {_bits(v.step)})" for v in bad[:10])
        raise RelationError(f"hyperbox relation fails at {pairs}", [(v.eps, v.step) for v in bad])


class TotalComplex:
    """A finite F2 complex whose basis elements carry lattice tags.

    A restriction to a subset of the basis is a view: it keeps the parent's
    differential and an index array, and materialises its block lazily.
    """

    def __init__(
        self,
        differential: F2Matrix,
        tags: Sequence[tuple],
        gradings: Sequence[int] | None = None,
        *,
        _indices: npt.NDArray[np.int64] | None = None,
        _root: TotalComplex | None = None,
    ):
        self._root = _root if _root is not None else self
        self._indices = _indices
        if _root is None:
            if differential.rows != differential.cols or differential.rows != len(tags):
                raise ValueError("differential must be square with one tag per basis element")
            self._d = differential
            self._tags = tuple(tuple(t) for t in tags)
            self._gradings = tuple(gradings) if gradings is not None else (0,) * len(tags)
        else:
            self._d = None
            self._tags = tuple(_root._tags[i] for i in _indices)
            self._gradings = tuple(_root._gradings[i] for i in _indices)

    @property
    def differential(self) -> F2Matrix:
        if self._d is None:
            self._d = self._root._d.submatrix(self._indices, self._indices)
        return self._d

    @property
    def dim(self) -> int:
        return len(self._tags)

    @property
    def tags(self) -> tuple[tuple, ...]:
        return self._tags

    @property
    def gradings(self) -> tuple[int, ...]:
        return self._gradings

    @property
    def root_indices(self) -> npt.NDArray[np.int64]:
        """Positions of this complex's basis inside the root complex."""
        if self._indices is None:
            return np.arange(self.dim, dtype=np.int64)
        return self._indices

    def vertex_weights(self) -> tuple[int, ...]:
        return tuple(norm(t) for t in self._tags)

    def positions(self) -> list[tuple]:
        """Distinct tags in first-appearance order."""
        return list(dict.fromkeys(self._tags))

    def indices_at(self, tag: tuple) -> list[int]:
        tag = tuple(tag)
        return [i for i, t in enumerate(self._tags) if t == tag]

    def restrict(self, local: Sequence[int]) -> TotalComplex:
        local = np.asarray(local, dtype=np.int64)
        return TotalComplex(F2Matrix(0, 0), (), _indices=self.root_indices[local], _root=self._root)

    def is_complex(self) -> bool:
        return (self.differential @ self.differential).is_zero()

    def homology_rank(self) -> int:
        return complex_homology_rank(self.differential)

    def block(self, target: tuple, source: tuple) -> F2Matrix:
        return self.differential.submatrix(self.indices_at(target), self.indices_at(source))

    def __repr__(self) -> str:
        return f"TotalComplex(dim={self.dim}, positions={len(self.positions())})"


def _vertex_order(size: Sequence[int]) -> list[Vertex]:
    return sorted(lattice(size), key=lambda v: (norm(v), v))


def total_complex(h: HyperboxComplex) -> TotalComplex:
    """⊕_ε C^ε with D = Σ D^{ε'}_ε; defined for hypercubes satisfying the relations."""
    if not h.is_hypercube:
        raise SemanticError(f"total complex needs a hypercube, got size {h.size}; compress first")
    require_relations(h)
    order = _vertex_order(h.size)
    offset: dict[Vertex, int] = {}
    tags: list[Vertex] = []
    gradings: list[int] = []
    for v in order:
        offset[v] = len(tags)
        tags.extend([v] * h.dims[v])
        # C^ε_{*+|ε|} sits in total degree *
        gradings.extend(g - norm(v) for g in h.gradings[v])
    n = len(tags)
    dense = np.zeros((n, n), dtype=np.uint8)
    for (eps, step), m in h.maps.items():
        tgt = _add(eps, step)
        r, c = offset[tgt], offset[eps]
        dense[r : r + h.dims[tgt], c : c + h.dims[eps]] ^= m.to_dense()
    d = F2Matrix.from_dense(dense)
    if not (d @ d).is_zero():
        raise AssertionError("total differential does not square to zero")
    return TotalComplex(d, tags, gradings)


def _parse_face(face: Sequence[int | None] | str, n: int) -> tuple[int | None, ...]:
    if isinstance(face, str):
        face = [None if c == "*" else int(c) for c in face]
    face = tuple(face)
    if len(face) != n or any(x not in (0, 1, None) for x in face):
        raise ValueError(f"face spec {face} must have {n} entries from 0, 1, None/'*'")
    return face


def face_complex(t: TotalComplex | HyperboxComplex, face: Sequence[int | None] | str) -> TotalComplex:
    """Restriction of the total complex to the vertices of a face (None/'*' = free axis)."""
    if isinstance(t, HyperboxComplex):
        t = total_complex(t)
    n = len(t.tags[0]) if t.dim else len(face)
    spec = _parse_face(face, n)
    local = [i for i, tag in enumerate(t.tags) if all(f is None or f == x for f, x in zip(spec, tag))]
    out = t.restrict(local)
    if not out.is_complex():
        raise AssertionError(f"face {spec} restriction is not a complex")
    return out


# compression


def _chain(mats: Sequence[F2Matrix], dim: int) -> F2Matrix:
    """mats[-1] @ ... @ mats[0], identity of size ``dim`` when empty."""
    out = F2Matrix.identity(dim)
    for m in mats:
        out = m @ out
    return out


def _compress_axis(h: HyperboxComplex, axis: int) -> HyperboxComplex:
    d = h.size[axis]
    if d == 1:
        return h
    n = h.n
    e_axis = tuple(int(i == axis) for i in range(n))
    new_size = tuple(1 if i == axis else s for i, s in enumerate(h.size))

    def old(v: Vertex) -> Vertex:
        return tuple(x * d if i == axis else x for i, x in enumerate(v))

    def at(v: Vertex, k: int) -> Vertex:
        return tuple(k if i == axis else x for i, x in enumerate(v))

    new_verts = lattice(new_size)
    dims = {v: h.dims[old(v)] for v in new_verts}
    gradings = {v: h.gradings[old(v)] for v in new_verts}
    maps: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    for v in new_verts:
        for step in unit_vectors(n):
            tgt = _add(v, step)
            if tgt not in dims:
                continue
            if step[axis] == 0:
                maps[(v, step)] = h.map(old(v), step)
                continue
            other = _sub(step, e_axis)
            if norm(other) == 0:
                a = [h.map(at(v, k), e_axis) for k in range(d)]
                maps[(v, step)] = _chain(a, h.dims[at(v, 0)])
            elif norm(other) == 1:
                top = _add(v, other)
                a = [h.map(at(v, k), e_axis) for k in range(d)]
                b = [h.map(at(top, k), e_axis) for k in range(d)]
                total = F2Matrix(h.dims[at(top, d)], h.dims[at(v, 0)])
                for k in range(d):
                    # B_{d-1}..B_{k+1} H_k A_{k-1}..A_0
                    hk = h.map(at(v, k), step)
                    lower = _chain(a[:k], h.dims[at(v, 0)])
                    upper = _chain(b[k + 1 :], h.dims[at(top, k + 1)])
                    total = total + upper @ hk @ lower
                maps[(v, step)] = total
            else:
                raise SemanticError("general compression out of scope (more than two axes)")
    return HyperboxComplex(new_size, dims, maps, gradings)


def compress(h: HyperboxComplex, order: Sequence[int] | None = None) -> HyperboxComplex:
    """Hypercube on the corner complexes C^{d·ε} of a hyperbox of dimension at most 2.

    ``order`` selects the sequence of axes to compress (default: increasing).
    """
    if h.n > 2:
        raise SemanticError(f"general compression out of scope: dimension {h.n} > 2")
    require_relations(h)
    out = h
    for axis in order if order is not None else range(h.n):
        out = _compress_axis(out, axis)
    if not out.is_hypercube:
        raise SemanticError("compression order must cover every axis")
    require_relations(out)
    return out


# acyclic cancellation


class NotQuasiIsomorphism(SemanticError):
    """An edge selected for cancellation is not a quasi-isomorphism."""

    def __init__(self, message: str, edge: tuple[tuple, tuple]):
        super().__init__(message)
        self.edge = edge


@dataclass(frozen=True)
class Cancellation:
    remainder: TotalComplex
    removed: TotalComplex
    kind: str  # "subcomplex" or "quotient": what the removed piece was
    pairs: tuple[tuple[tuple, tuple], ...]
    rank: int


def _direction(direction: int | Sequence[int], n: int) -> tuple[int, ...]:
    if isinstance(direction, (int, np.integer)):
        if not 0 <= direction < n:
            raise ValueError(f"axis {direction} outside 0..{n - 1}")
        return tuple(int(i == direction) for i in range(n))
    vec = tuple(int(x) for x in direction)
    if len(vec) != n or not any(vec):
        raise ValueError(f"direction {vec} must be a nonzero vector of length {n}")
    return vec


def cancel_acyclic_edge(
    t: TotalComplex,
    direction: int | Sequence[int],
    predicate: Callable[[tuple], bool],
    filtration: Callable[[tuple], float] | None = None,
) -> Cancellation:
    """Remove the positions selected by ``predicate``, paired along ``direction``.

    The selected piece must be a subcomplex or a quotient complex. Its
    positions are paired p -> p + direction; every pairing edge must be a
    quasi-isomorphism of the two vertex complexes. When a filtration is given,
    it must be constant on pairs and never increase along the differential,
    so the associated graded is a sum of cones of those edges. Acyclicity and
    rank preservation are then checked directly.
    """
    if t.dim == 0:
        raise SemanticError("nothing to cancel in an empty complex")
    n = len(t.tags[0])
    vec = _direction(direction, n)
    chosen = [p for p in t.positions() if predicate(p)]
    chosen_set = set(chosen)
    if not chosen:
        raise SemanticError("predicate selects no positions")
    inside = [i for i, tag in enumerate(t.tags) if tag in chosen_set]
    outside = [i for i, tag in enumerate(t.tags) if tag not in chosen_set]
    d = t.differential
    if d.submatrix(outside, inside).is_zero():
        kind = "subcomplex"
    elif d.submatrix(inside, outside).is_zero():
        kind = "quotient"
    else:
        raise SemanticError("selected positions form neither a subcomplex nor a quotient complex")

    # pair along the direction, lowest first
    key = lambda p: sum(a * b for a, b in zip(p, vec))  # noqa: E731
    partner: dict[tuple, tuple] = {}
    pairs: list[tuple[tuple, tuple]] = []
    for p in sorted(chosen, key=key):
        q = _add(p, vec)
        if p in partner:
            continue
        if q in chosen_set and q not in partner:
            partner[p] = q
            partner[q] = p
            pairs.append((p, q))
    unpaired = [p for p in chosen if p not in partner]
    if unpaired:
        raise SemanticError(f"position {unpaired[0]} has no partner along {vec}")

    for p, q in pairs:
        ip, iq = t.indices_at(p), t.indices_at(q)
        cone = d.submatrix(ip + iq, ip + iq)
        if not (cone @ cone).is_zero():
            raise NotQuasiIsomorphism(f"edge {p} -> {q} is not a chain map", (p, q))
        if len(ip) != len(iq) or complex_homology_rank(cone) != 0:
            raise NotQuasiIsomorphism(f"edge {p} -> {q} is not a quasi-isomorphism", (p, q))

    if filtration is not None:
        level = {p: filtration(p) for p in chosen}
        for p, q in pairs:
            if level[p] != level[q]:
                raise SemanticError(f"filtration differs across pair {p} -> {q}")
        index = {p: t.indices_at(p) for p in chosen}
        for a in chosen:
            for b in chosen:
                if a == b or partner[a] == b:
                    continue
                if d.submatrix(index[b], index[a]).is_zero():
                    continue
                if level[b] > level[a]:
                    raise SemanticError(f"differential raises the filtration from {a} to {b}")
                if level[b] == level[a]:
                    raise SemanticError(f"associated graded mixes pairs at {a} and {b}")

    removed = t.restrict(inside)
    if removed.homology_rank() != 0:
        raise AssertionError("selected piece is not acyclic")
    remainder = t.restrict(outside)
    if not remainder.is_complex():
        raise AssertionError("remainder is not a complex")
    before, after = t.homology_rank(), remainder.homology_rank()
    if before != after:
        raise AssertionError(f"cancellation changed the homology rank {before} -> {after}")
    return Cancellation(remainder, removed, kind, tuple(pairs), after)


# mapping cones


@dataclass(frozen=True)
class MappingCone:
    d_source: F2Matrix
    d_target: F2Matrix
    f: F2Matrix

    def __post_init__(self):
        if self.f.shape != (self.d_target.rows, self.d_source.rows):
            raise ValueError("map shape does not match the complexes")
        if not (self.f @ self.d_source == self.d_target @ self.f):
            raise SemanticError("f is not a chain map")

    @classmethod
    def zero_differentials(cls, f: F2Matrix) -> MappingCone:
        return cls(F2Matrix(f.cols, f.cols), F2Matrix(f.rows, f.rows), f)

    def differential(self) -> F2Matrix:
        return cone_differential(self.f, self.d_source, self.d_target)


def cone_rank(m: MappingCone) -> int:
    """dim H(cone); 2 dim H(V) - 2 rk f_* when H(V) and H(W) have equal dimension."""
    direct = complex_homology_rank(m.differential())
    hv, hw = HomologyData.of(m.d_source), HomologyData.of(m.d_target)
    if hv.rank != hw.rank:
        return direct
    formula = 2 * hv.rank - 2 * induced_map(m.f, hv, hw).rank()
    if formula != direct:
        raise AssertionError(f"cone rank formula {formula} disagrees with direct homology {direct}")
    return formula


def theta_matrix(F: F2Matrix, G: F2Matrix, J: F2Matrix, K: F2Matrix) -> F2Matrix:
    """Θ(v, w) = (F v + G w, J w + K v) as a block matrix."""
    return F2Matrix.block([[F, G], [K, J]])


def gluing_reduce(F: F2Matrix, G: F2Matrix, J: F2Matrix, K: F2Matrix) -> F2Matrix:
    """F - G J^{-1} K (a sum over F2); J must be invertible."""
    try:
        jinv = J.inverse()
    except np.linalg.LinAlgError:
        raise SemanticError("J is not invertible") from None
    return F + G @ jinv @ K


# truncation lattice model


def truncation_lattice(d1: F2Matrix, d2: F2Matrix, lo: int = -1, hi: int = 2) -> TotalComplex:
    """Lattice of homology-level vertices tagged (s, ε1, ε2), s in [lo, hi].

    Every vertex is a copy of F2^h with zero differential. The +K_i edges are
    the identity at fixed s, the -K_i edges are Id + d_i into s + 1, and the
    diagonals vanish. The bottom row s = lo keeps only its ε2 = 0 vertices and
    replaces its K1 edges by the unique maps that keep D^2 = 0, standing in
    for the infinite tail of the unbounded lattice.
    """
    h = d1.rows
    if d1.shape != (h, h) or d2.shape != (h, h):
        raise ValueError("d1, d2 must be square of equal size")
    if lo > -1 or hi < 1:
        raise ValueError("window must contain s = -1, 0, 1")
    eye = F2Matrix.identity(h)
    try:
        j_inv = (eye + d2).inverse()
    except np.linalg.LinAlgError:
        raise SemanticError("Id + d2 is not invertible") from None
    minus1 = j_inv @ (eye + d1) @ (eye + d2)
    plus1 = j_inv @ (minus1 + eye + d2)
    tags = [(s, a, b) for s in range(lo, hi + 1) for a in (0, 1) for b in (0, 1) if not (s == lo and b == 1)]
    offset = {p: i * h for i, p in enumerate(tags)}
    n = len(tags) * h
    dense = np.zeros((n, n), dtype=np.uint8)

    def put(src, tgt, m: F2Matrix) -> None:
        if tgt in offset:
            r, c = offset[tgt], offset[src]
            dense[r : r + h, c : c + h] ^= m.to_dense()

    for s, a, b in tags:
        p = (s, a, b)
        cap = s == lo
        if a == 0:
            put(p, (s, 1, b), plus1 if cap else eye)
            put(p, (s + 1, 1, b), minus1 if cap else eye + d1)
        if b == 0:
            put(p, (s, a, 1), eye)
            put(p, (s + 1, a, 1), eye + d2)
    d = F2Matrix.from_dense(dense)
    if not (d @ d).is_zero():
        raise NotAComplexError("lattice model does not square to zero (d1, d2 must commute)")
    return TotalComplex(d, [t for t in tags for _ in range(h)])


def reduce_to_triangle(t: TotalComplex) -> tuple[TotalComplex, list[Cancellation]]:
    """Cancel {s > 1} along +K1, then the boxed region along -K2."""
    first = cancel_acyclic_edge(t, (0, 1, 0), lambda p: p[0] > 1, filtration=lambda p: -(3 * p[0] + p[2]))
    boxed = lambda p: (p[0] == 1 and p[1] == p[2] == 1) or (p[0] == 0 and p[1] + p[2] >= 1) or p[0] <= -1  # noqa: E731
    second = cancel_acyclic_edge(
        first.remainder, (1, 0, 1), boxed, filtration=lambda p: p[0] - 2 * p[1] - p[2]
    )
    return second.remainder, [first, second]


# random generators


def _random_invertible(rng: np.random.Generator, n: int) -> F2Matrix:
    while True:
        m = F2Matrix.from_dense(rng.integers(0, 2, (n, n)))
        if m.rank() == n:
            return m


def _standard_complex(rng: np.random.Generator, max_dim: int) -> tuple[F2Matrix, int, int]:
    """(∂, pairs, homology) with ∂ sending x_i to y_i; homology generators last."""
    n = int(rng.integers(1, max_dim + 1))
    pairs = int(rng.integers(0, n // 2 + 1))
    dense = np.zeros((n, n), dtype=np.uint8)
    for i in range(pairs):
        dense[pairs + i, i] = 1
    return F2Matrix.from_dense(dense), pairs, n - 2 * pairs


@dataclass(frozen=True)
class _Base:
    """A common complex with a commuting family of chain endomorphisms."""

    d: F2Matrix
    pairs: int
    hom: int
    m: F2Matrix

    @classmethod
    def random(cls, rng: np.random.Generator, max_dim: int) -> _Base:
        d, pairs, hom = _standard_complex(rng, max_dim)
        n = d.rows
        dense = np.zeros((n, n), dtype=np.uint8)
        dense[2 * pairs :, 2 * pairs :] = rng.integers(0, 2, (hom, hom))
        return cls(d, pairs, hom, F2Matrix.from_dense(dense))

    @property
    def dim(self) -> int:
        return self.d.rows

    def endo(self, coeffs: Sequence[int]) -> F2Matrix:
        """Polynomial in the homology-block matrix, zero on the acyclic part."""
        dense = np.zeros((self.dim, self.dim), dtype=np.uint8)
        dense[2 * self.pairs :, 2 * self.pairs :] = np.eye(self.hom, dtype=np.uint8)
        out = F2Matrix(self.dim, self.dim)
        power = F2Matrix.from_dense(dense)
        for c in coeffs:
            if c:
                out = out + power
            power = power @ self.m
        return out


def _homotopic(base: _Base, e: F2Matrix, hmat: F2Matrix) -> F2Matrix:
    return e + base.d @ hmat + hmat @ base.d


def random_hyperbox(rng: np.random.Generator, size: Sequence[int], max_dim: int = 6) -> HyperboxComplex:
    """Random valid hyperbox of dimension at most 2 with vertex dims at most ``max_dim``.

    Every vertex is a basis change of one standard complex. Edge maps are
    homology endomorphisms from a commuting family plus null-homotopic terms,
    and each square carries the homotopy that makes its relation exact.
    """
    size = tuple(int(s) for s in size)
    if len(size) > 2:
        raise ValueError("random hyperboxes are built in dimension at most 2")
    base = _Base.random(rng, max_dim)
    d, n = base.d, base.dim
    verts = lattice(size)
    gauge = {v: _random_invertible(rng, n) for v in verts}
    gauge_inv = {v: g.inverse() for v, g in gauge.items()}
    dims = {v: n for v in verts}

    def conj(src: Vertex, tgt: Vertex, m: F2Matrix) -> F2Matrix:
        return gauge[tgt] @ m @ gauge_inv[src]

    maps: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    edge_e: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    edge_h: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    # homology parts depend on the line, not the row, so both paths agree
    line_e: dict[tuple[int, int], F2Matrix] = {}
    for v in verts:
        maps[(v, (0,) * len(size))] = conj(v, v, d)
        for axis in range(len(size)):
            step = tuple(int(i == axis) for i in range(len(size)))
            tgt = _add(v, step)
            if tgt not in dims:
                continue
            if (axis, v[axis]) not in line_e:
                line_e[(axis, v[axis])] = base.endo(rng.integers(0, 2, 3))
            e = line_e[(axis, v[axis])]
            hm = F2Matrix.from_dense(rng.integers(0, 2, (n, n)))
            edge_e[(v, step)], edge_h[(v, step)] = e, hm
            maps[(v, step)] = conj(v, tgt, _homotopic(base, e, hm))
    if len(size) == 2:
        e1, e2 = (1, 0), (0, 1)
        for v in verts:
            tgt = _add(v, (1, 1))
            if tgt not in dims:
                continue
            # both paths equal E E' + ∂K + K∂; the square homotopy is the sum of the K's
            path_a = ((v, e1), (_add(v, e1), e2))
            path_b = ((v, e2), (_add(v, e2), e1))
            total = F2Matrix(n, n)
            for first, second in (path_a, path_b):
                ea, ha = edge_e[first], edge_h[first]
                eb, hb = edge_e[second], edge_h[second]
                k = hb @ d @ ha + hb @ ha @ d + eb @ ha + hb @ ea
                total = total + k
            maps[(v, (1, 1))] = conj(v, tgt, total)
    out = HyperboxComplex(size, dims, maps)
    require_relations(out)
    return out


def random_hypercube(rng: np.random.Generator, n: int, max_dim: int = 4) -> HyperboxComplex:
    """Random valid n-cube: a commuting cube of chain maps conjugated by a random gauge.

    The gauge is block upper-unitriangular for the vertex order, so the
    conjugated total differential again decomposes into hypercube maps.
    """
    size = (1,) * n
    verts = lattice(size)
    base = _Base.random(rng, max_dim)
    dim = base.dim
    # edge maps depend only on the axis, so every square commutes on the nose
    per_axis = [base.endo(rng.integers(0, 2, 3)) for _ in range(n)]
    maps: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    for v in verts:
        maps[(v, (0,) * n)] = base.d
        for axis in range(n):
            if v[axis] == 0:
                maps[(v, tuple(int(i == axis) for i in range(n)))] = per_axis[axis]
    cube = HyperboxComplex(size, {v: dim for v in verts}, maps)
    require_relations(cube)
    t = total_complex(cube)
    order = _vertex_order(size)
    offset = {v: i * dim for i, v in enumerate(order)}
    total = t.differential.to_dense().astype(np.int64)
    gauge = np.zeros_like(total)
    for v in order:
        gauge[offset[v] : offset[v] + dim, offset[v] : offset[v] + dim] = _random_invertible(rng, dim).to_dense()
        for w in order:
            if w != v and all(a >= b for a, b in zip(w, v)) and rng.random() < 0.5:
                gauge[offset[w] : offset[w] + dim, offset[v] : offset[v] + dim] = rng.integers(0, 2, (dim, dim))
    g = F2Matrix.from_dense(gauge)
    conj = (g @ F2Matrix.from_dense(total) @ g.inverse()).to_dense()
    new_maps: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    for v in order:
        for w in order:
            step = _sub(w, v)
            if all(x in (0, 1) for x in step):
                block = conj[offset[w] : offset[w] + dim, offset[v] : offset[v] + dim]
                new_maps[(v, step)] = F2Matrix.from_dense(block)
            elif conj[offset[w] : offset[w] + dim, offset[v] : offset[v] + dim].any():
                raise AssertionError("gauge produced a map against the cube order")
    out = HyperboxComplex(size, {v: dim for v in verts}, new_maps)
    require_relations(out)
    return out


def hypercube_from_total(d: F2Matrix, tags: Sequence[Vertex], size: Sequence[int]) -> HyperboxComplex:
    """Split a tagged square-zero matrix into hypercube maps (inverse of total_complex)."""
    verts = lattice(size)
    index = {v: [i for i, t in enumerate(tags) if tuple(t) == v] for v in verts}
    maps = {}
    for v in verts:
        for w in verts:
            block = d.submatrix(index[w], index[v])
            if block.is_zero():
                continue
            step = _sub(w, v)
            if not all(x in (0, 1) for x in step):
                raise SemanticError(f"differential has a component from {v} to {w} against the cube order")
            maps[(v, step)] = block
    return HyperboxComplex(size, {v: len(index[v]) for v in verts}, maps)


def iter_nonzero_maps(h: HyperboxComplex) -> Iterable[tuple[Vertex, Vertex, F2Matrix]]:
    for (eps, step), m in sorted(h.maps.items()):
        yield eps, step, m
