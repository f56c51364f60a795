"""Spectral sequences of finite filtered F2 complexes.

Convention: F_p is spanned by basis elements of filtration at most p, the
differential never raises filtration, and d_r maps E_r^p to E_r^{p-r}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .cupform import ThreeForm
from .errors import SemanticError
from .exterior import contraction_matrix, graded_basis, mask_of
from .hypercube import TotalComplex
from .linalg import F2Matrix, complement_rows, complex_homology_rank, coordinates, kernel_basis, row_basis


class FilteredComplex:
    def __init__(
        self,
        differential: F2Matrix,
        filtration: Sequence[int],
        gradings: Sequence[int] | None = None,
        tags: Sequence[tuple] | None = None,
    ):
        n = differential.rows
        if differential.cols != n or len(filtration) != n:
            raise ValueError("differential must be square with one filtration value per basis element")
        self.differential = differential
        self.filtration = np.asarray(filtration, dtype=np.int64)
        self.gradings = tuple(gradings) if gradings is not None else (0,) * n
        self.tags = tuple(tuple(t) for t in tags) if tags is not None else None
        if not (differential @ differential).is_zero():
            raise ValueError("differential does not square to zero")
        dense = differential.to_dense()
        rows, cols = np.nonzero(dense)
        if np.any(self.filtration[rows] > self.filtration[cols]):
            raise ValueError("differential raises the filtration")

    @property
    def dim(self) -> int:
        return self.differential.rows

    @property
    def levels(self) -> list[int]:
        if self.dim == 0:
            return []
        return list(range(int(self.filtration.min()), int(self.filtration.max()) + 1))

    @property
    def depth(self) -> int:
        return 0 if self.dim == 0 else int(self.filtration.max() - self.filtration.min())

    def level_counts(self) -> dict[int, int]:
        return {p: int(np.sum(self.filtration == p)) for p in self.levels}

    def homology_rank(self) -> int:
        return complex_homology_rank(self.differential)

    @cached_property
    def _dense(self) -> np.ndarray:
        return self.differential.to_dense()

    def cycles(self, p: int, r: int) -> F2Matrix:
        """Z_r^p = {x in F_p : dx in F_{p-r}} as rows."""
        cols = np.flatnonzero(self.filtration <= p)
        rows = np.flatnonzero(self.filtration > p - r)
        block = F2Matrix.from_dense(self._dense[np.ix_(rows, cols)].reshape(len(rows), len(cols)))
        out = np.zeros((0, self.dim), dtype=np.uint8)
        basis = kernel_basis(block)
        if basis:
            out = np.zeros((len(basis), self.dim), dtype=np.uint8)
            out[:, cols] = np.vstack(basis)
        return F2Matrix.from_dense(out)

    def image(self, vectors: F2Matrix) -> F2Matrix:
        return vectors @ self.differential.T


def from_hypercube(t: TotalComplex, ell: int | None = None) -> FilteredComplex:
    """Filtration ℓ - ‖ε‖ on the total complex of an ℓ-cube."""
    if t.dim == 0:
        return FilteredComplex(t.differential, [], t.gradings, t.tags)
    ell = len(t.tags[0]) if ell is None else ell
    return FilteredComplex(t.differential, [ell - sum(tag) for tag in t.tags], t.gradings, t.tags)


@dataclass(frozen=True)
class Page:
    """E_r with coset representatives per level and d_r blocks E_r^p -> E_r^{p-r}."""

    r: int
    levels: tuple[int, ...]
    representatives: dict[int, F2Matrix]
    denominators: dict[int, F2Matrix]
    d: dict[int, F2Matrix]

    def dims(self) -> dict[int, int]:
        return {p: self.representatives[p].rows for p in self.levels}

    @property
    def total_dim(self) -> int:
        return sum(self.dims().values())

    def d_is_zero(self) -> bool:
        return all(m.is_zero() for m in self.d.values())

    def d_rank(self) -> int:
        return sum(m.rank() for m in self.d.values())

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "dims": {str(p): n for p, n in self.dims().items()},
            "total": self.total_dim,
            "d_rank": self.d_rank(),
        }


def _span(*parts: F2Matrix) -> F2Matrix:
    stacked = parts[0]
    for p in parts[1:]:
        stacked = stacked.vstack(p)
    if stacked.rows == 0:
        return stacked
    return row_basis(stacked)


def page(fc: FilteredComplex, r: int) -> Page:
    """E_r^p = Z_r^p / (Z_{r-1}^{p-1} + d Z_{r-1}^{p+r-1}) with induced d_r."""
    if r < 1:
        raise ValueError("page index must be at least 1")
    levels = tuple(fc.levels)
    reps: dict[int, F2Matrix] = {}
    dens: dict[int, F2Matrix] = {}
    for p in levels:
        z = fc.cycles(p, r)
        b = _span(fc.cycles(p - 1, r - 1), fc.image(fc.cycles(p + r - 1, r - 1)))
        if coordinates(_span(z), b) is None:
            raise AssertionError(f"boundaries escape the cycles at level {p}")
        dens[p] = b
        reps[p] = z.take_rows(complement_rows(b, z))
    d: dict[int, F2Matrix] = {}
    for p in levels:
        q = p - r
        if q not in reps:
            continue
        images = fc.image(reps[p])
        basis = dens[q].vstack(reps[q])
        c = coordinates(basis, images)
        if c is None:
            raise AssertionError(f"d_{r} image at level {p} lies outside Z_{r}^{q}")
        d[p] = c.take_cols(range(dens[q].rows, basis.rows)).T
    out = Page(r, levels, reps, dens, d)
    for p, m in out.d.items():
        nxt = out.d.get(p - r)
        if nxt is not None and not (nxt @ m).is_zero():
            raise AssertionError(f"d_{r} does not square to zero at level {p}")
    return out


def pages(fc: FilteredComplex, up_to: int) -> list[Page]:
    """E_1 .. E_{up_to}, checking E_{r+1} = H(E_r, d_r) levelwise."""
    out = [page(fc, 1)]
    for r in range(2, up_to + 1):
        nxt = page(fc, r)
        prev = out[-1]
        for p in prev.levels:
            into = prev.d.get(p + prev.r)
            out_of = prev.d.get(p)
            expect = prev.dims()[p] - (out_of.rank() if out_of is not None else 0) - (into.rank() if into is not None else 0)
            if nxt.dims()[p] != expect:
                raise AssertionError(f"E_{r} at level {p} is not the homology of E_{r - 1}")
        out.append(nxt)
    return out


@dataclass(frozen=True)
class CollapseReport:
    collapses: bool
    collapse_page: int
    nonzero_pages: tuple[int, ...]
    e_infinity: int
    total_homology: int
    page_dims: tuple[int, ...]

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "collapses": self.collapses,
            "collapse_page": self.collapse_page,
            "nonzero_differentials": list(self.nonzero_pages),
            "e_infinity": self.e_infinity,
            "total_homology": self.total_homology,
            "page_dims": list(self.page_dims),
        }


def collapse_check(fc: FilteredComplex, r: int) -> CollapseReport:
    """Whether d_k = 0 for every k >= r, with E_inf checked against H(total)."""
    last = max(fc.depth, 1) + 1
    seq = pages(fc, max(last, r))
    nonzero = tuple(pg.r for pg in seq if not pg.d_is_zero())
    e_inf = seq[-1].total_dim
    total = fc.homology_rank()
    if e_inf != total:
        raise AssertionError(f"E_inf has dimension {e_inf} but H(total) has {total}")
    for pg in seq:
        if pg.r > fc.depth and not pg.d_is_zero():
            raise AssertionError(f"d_{pg.r} nonzero beyond the filtration depth {fc.depth}")
    collapse_page = (max(nonzero) + 1) if nonzero else 1
    return CollapseReport(
        collapses=all(k < r for k in nonzero),
        collapse_page=collapse_page,
        nonzero_pages=nonzero,
        e_infinity=e_inf,
        total_homology=total,
        page_dims=tuple(pg.total_dim for pg in seq),
    )


@dataclass(frozen=True)
class E3Identification:
    ell: int
    matches: bool
    by_degree: dict[int, bool]
    d3_rank: int
    correspondence: dict[int, F2Matrix]

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "matches": self.matches,
            "by_degree": {str(p): ok for p, ok in self.by_degree.items()},
            "d3_rank": self.d3_rank,
        }


def _exterior_position(tag: tuple, ell: int) -> tuple[int, int]:
    """(degree, index in the bitmask-ordered basis) for the generator at vertex ε."""
    subset = [i + 1 for i, e in enumerate(tag) if e == 0]
    deg = len(subset)
    return deg, graded_basis(ell, deg).index(mask_of(subset))


def identify_e3_with_exterior(fc: FilteredComplex, mu: ThreeForm) -> E3Identification:
    """Match E_3^p with Λ^p via leading parts and compare d_3 with ι_μ mod 2."""
    ell = mu.ell
    if fc.tags is None or len(fc.tags) != 2**ell or len(set(fc.tags)) != 2**ell:
        raise SemanticError("expected a cup-model cube with one generator per vertex")
    if any(len(t) != ell or any(x not in (0, 1) for x in t) for t in fc.tags):
        raise SemanticError("tags are not vertices of an ell-cube")
    e3 = page(fc, 3)
    # leading-part coordinates: rep -> Λ^p basis
    corr: dict[int, F2Matrix] = {}
    for p in e3.levels:
        reps = e3.representatives[p].to_dense()
        size = len(graded_basis(ell, p))
        lead = np.zeros((reps.shape[0], size), dtype=np.uint8)
        for i, tag in enumerate(fc.tags):
            if fc.filtration[i] == p:
                deg, j = _exterior_position(tag, ell)
                lead[:, j] = reps[:, i]
        m = F2Matrix.from_dense(lead)
        if m.rows != size or m.rank() != size:
            raise SemanticError(f"E_3 at level {p} is not identified with Λ^{p} (d_1 or d_2 nonzero)")
        corr[p] = m
    by_degree: dict[int, bool] = {}
    rank = 0
    for p, block in e3.d.items():
        # block acts on rep coordinates (columns); change to Λ coordinates
        lam = corr[p - 3].T @ block @ corr[p].T.inverse()
        expected = F2Matrix.from_dense(contraction_matrix(mu, p) & 1)
        by_degree[p] = lam == expected
        rank += block.rank()
    return E3Identification(ell, all(by_degree.values()), dict(sorted(by_degree.items())), rank, corr)
