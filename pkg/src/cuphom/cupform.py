"""Integer alternating 3-forms and the component-splitting bookkeeping for links."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterator, Mapping

import numpy as np

from .errors import SchemaError, SemanticError

Triple = tuple[int, int, int]


def _reject_duplicate_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in pairs:
        if k in out:
            raise SchemaError(f"duplicate key {k!r}")
        out[k] = v
    return out


def load_json(text: str) -> Any:
    """json.loads that rejects duplicate object keys."""
    try:
        return json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from None


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class ThreeForm:
    """Alternating integer trilinear form on Z^ell.

    Stored by its values on increasing triples (1-based); zeros are dropped.
    """

    __slots__ = ("ell", "_items")
    degree = 3

    def __init__(self, ell: int, triples: Mapping[Triple, int] | None = None):
        if not _is_int(ell) or ell < 0:
            raise ValueError(f"ell must be a nonnegative integer, got {ell!r}")
        items = {}
        for key, c in (triples or {}).items():
            key = tuple(int(x) for x in key)
            if len(key) != 3 or not (1 <= key[0] < key[1] < key[2] <= ell):
                raise ValueError(f"triple {key} is not strictly increasing within 1..{ell}")
            if not _is_int(c):
                raise ValueError(f"coefficient of {key} must be an integer")
            if c:
                items[key] = int(c)
        self.ell = ell
        self._items = tuple(sorted(items.items()))

    @property
    def triples(self) -> dict[Triple, int]:
        return dict(self._items)

    def __iter__(self) -> Iterator[tuple[Triple, int]]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThreeForm):
            return NotImplemented
        return self.ell == other.ell and self._items == other._items

    def __hash__(self) -> int:
        return hash((self.ell, self._items))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in self._items)
        return f"ThreeForm(ell={self.ell}, {{{body}}})"

    def __add__(self, other: ThreeForm) -> ThreeForm:
        return connect_sum(self, other)

    def __neg__(self) -> ThreeForm:
        return ThreeForm(self.ell, {k: -v for k, v in self._items})

    def __sub__(self, other: ThreeForm) -> ThreeForm:
        return connect_sum(self, -other)

    def value(self, i: int, j: int, k: int) -> int:
        """Alternating evaluation on any ordering of three indices."""
        idx = [i, j, k]
        if len(set(idx)) < 3:
            return 0
        order = sorted(range(3), key=lambda t: idx[t])
        inversions = sum(1 for a in range(3) for b in range(a + 1, 3) if order[a] > order[b])
        v = self.triples.get(tuple(sorted(idx)), 0)
        return -v if inversions % 2 else v

    def mod2(self) -> ThreeForm:
        return ThreeForm(self.ell, {k: v & 1 for k, v in self._items})

    def mask_items(self) -> list[tuple[int, int]]:
        """(bitmask, coefficient) pairs; generator i is bit i-1."""
        return [((1 << (i - 1)) | (1 << (j - 1)) | (1 << (k - 1)), c) for (i, j, k), c in self._items]

    def support(self) -> set[int]:
        return {i for key, _ in self._items for i in key}

    def is_zero(self) -> bool:
        return not self._items

    def extended(self, ell: int) -> ThreeForm:
        if ell < self.ell:
            raise ValueError("cannot shrink the index range")
        return ThreeForm(ell, self.triples)

    def shifted(self, offset: int, ell: int) -> ThreeForm:
        return ThreeForm(ell, {(i + offset, j + offset, k + offset): c for (i, j, k), c in self._items})

    def to_json_obj(self) -> dict[str, Any]:
        return {"ell": self.ell, "triples": [[i, j, k, c] for (i, j, k), c in self._items]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: Any, allowed_extra: tuple[str, ...] = ()) -> ThreeForm:
        if not isinstance(obj, dict):
            raise SchemaError("form must be a JSON object")
        unknown = set(obj) - {"ell", "triples", *allowed_extra}
        if unknown:
            raise SchemaError(f"unknown fields: {sorted(unknown)}")
        if "ell" not in obj or "triples" not in obj:
            raise SchemaError("form needs 'ell' and 'triples'")
        ell = obj["ell"]
        if not _is_int(ell) or ell < 0:
            raise SchemaError("'ell' must be a nonnegative integer")
        if not isinstance(obj["triples"], list):
            raise SchemaError("'triples' must be a list")
        seen: dict[Triple, int] = {}
        for entry in obj["triples"]:
            if not (isinstance(entry, list) and len(entry) == 4 and all(_is_int(x) for x in entry)):
                raise SchemaError(f"triple entry {entry!r} must be [i, j, k, coeff] of integers")
            i, j, k, c = entry
            if not (1 <= i < j < k <= ell):
                raise SchemaError(f"triple {(i, j, k)} is not strictly increasing within 1..{ell}")
            if (i, j, k) in seen:
                raise SchemaError(f"duplicate triple {(i, j, k)}")
            seen[(i, j, k)] = c
        return cls(ell, seen)

    @classmethod
    def from_json(cls, text: str) -> ThreeForm:
        return cls.from_json_obj(load_json(text))

    @classmethod
    def random(cls, rng: np.random.Generator, ell: int, lo: int = -3, hi: int = 3, density: float = 0.5) -> ThreeForm:
        triples = {}
        for t in combinations(range(1, ell + 1), 3):
            if rng.random() < density:
                triples[t] = int(rng.integers(lo, hi + 1))
        return cls(ell, triples)


@dataclass(frozen=True)
class LinkModel:
    """Linking matrix (zero diagonal) plus the triple linking form of a link."""

    ell: int
    linking: tuple[tuple[int, ...], ...]
    milnor: ThreeForm

    def __post_init__(self):
        lk = np.array(self.linking, dtype=np.int64).reshape(self.ell, self.ell)
        if not np.array_equal(lk, lk.T):
            raise SemanticError("linking matrix must be symmetric")
        if np.any(np.diag(lk)):
            raise SemanticError("linking matrix must have zero diagonal")
        if self.milnor.ell != self.ell:
            raise ValueError("form and linking matrix disagree on the component count")

    @property
    def homologically_split(self) -> bool:
        return not any(v for row in self.linking for v in row)

    @classmethod
    def split(cls, milnor: ThreeForm) -> LinkModel:
        n = milnor.ell
        return cls(n, tuple(tuple(0 for _ in range(n)) for _ in range(n)), milnor)

    @classmethod
    def from_json_obj(cls, obj: Any) -> LinkModel:
        form = ThreeForm.from_json_obj(obj, allowed_extra=("linking",))
        n = form.ell
        raw = obj.get("linking")
        if raw is None:
            return cls.split(form)
        if not (isinstance(raw, list) and len(raw) == n and all(isinstance(r, list) and len(r) == n for r in raw)):
            raise SchemaError(f"'linking' must be a {n}x{n} integer matrix")
        if not all(_is_int(v) for r in raw for v in r):
            raise SchemaError("'linking' entries must be integers")
        return cls(n, tuple(tuple(r) for r in raw), form)


def complexity(mu: ThreeForm) -> int:
    """Number of nonzero triples."""
    return len(mu)


def connect_sum(a: ThreeForm, b: ThreeForm) -> ThreeForm:
    """Coefficientwise sum (triple linking numbers add under band sum)."""
    if a.ell != b.ell:
        raise ValueError(f"forms live on different index ranges ({a.ell} vs {b.ell})")
    out = a.triples
    for k, v in b:
        out[k] = out.get(k, 0) + v
    return ThreeForm(a.ell, out)


def disjoint_sum(a: ThreeForm, b: ThreeForm) -> ThreeForm:
    """Form on ell_a + ell_b generators with b's indices shifted past a's."""
    n = a.ell + b.ell
    return connect_sum(a.extended(n), b.shifted(a.ell, n))


def _check_index(mu: ThreeForm, r: int) -> None:
    if not 1 <= r <= mu.ell:
        raise ValueError(f"index {r} outside 1..{mu.ell}")


def component_part(mu: ThreeForm, r: int) -> ThreeForm:
    """Triples containing r."""
    _check_index(mu, r)
    return ThreeForm(mu.ell, {k: v for k, v in mu if r in k})


def free_part(mu: ThreeForm, r: int) -> ThreeForm:
    """Triples avoiding r; component_part + free_part == mu."""
    _check_index(mu, r)
    return ThreeForm(mu.ell, {k: v for k, v in mu if r not in k})


def split_component(mu: ThreeForm, r: int) -> tuple[ThreeForm, ThreeForm]:
    """Isolate the lexicographically last triple through r.

    Returns (rest, isolated) with rest + isolated == mu.
    """
    part = component_part(mu, r)
    if len(part) < 2:
        raise SemanticError(f"no reduction available: index {r} lies in {len(part)} nonzero triple(s)")
    key, coeff = part._items[-1]
    isolated = ThreeForm(mu.ell, {key: coeff})
    rest = ThreeForm(mu.ell, {k: v for k, v in mu if k != key})
    return rest, isolated


@dataclass(frozen=True)
class ReductionNode:
    """A node of the splitting tree.

    kind is "leaf", "connect_sum" (split at ``index``) or "disjoint" (the first
    triple shares no index with the rest).
    """

    form: ThreeForm
    kind: str
    index: int | None = None
    children: tuple[ReductionNode, ...] = field(default=())

    def leaves(self) -> list[ReductionNode]:
        if not self.children:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)

    def walk(self) -> Iterator[ReductionNode]:
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json_obj(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "complexity": complexity(self.form), "form": self.form.to_json_obj()}
        if self.index is not None:
            out["index"] = self.index
        if self.children:
            out["children"] = [c.to_json_obj() for c in self.children]
        return out


def reduction_index(mu: ThreeForm) -> int | None:
    """Smallest index lying in at least two nonzero triples."""
    counts: dict[int, int] = {}
    for key, _ in mu:
        for i in key:
            counts[i] = counts.get(i, 0) + 1
    shared = [i for i, c in counts.items() if c >= 2]
    return min(shared) if shared else None


def reduction_trace(mu: ThreeForm) -> ReductionNode:
    """Split until every leaf has complexity at most one."""
    if complexity(mu) <= 1:
        return ReductionNode(mu, "leaf")
    r = reduction_index(mu)
    if r is not None:
        rest, isolated = split_component(mu, r)
        return ReductionNode(mu, "connect_sum", r, (reduction_trace(rest), reduction_trace(isolated)))
    # no shared index: the triples are pairwise disjoint
    (key, coeff), *_ = mu
    first = ThreeForm(mu.ell, {key: coeff})
    rest = ThreeForm(mu.ell, {k: v for k, v in mu if k != key})
    return ReductionNode(mu, "disjoint", None, (reduction_trace(first), reduction_trace(rest)))
