"""Homology ranks and homology-level maps over F2 (and ranks over Q)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .f2 import F2Matrix, complement_rows, coordinates, kernel_basis, row_basis
from .integer import IntMatrix, smith_normal_form
from .modular import rank_modular

Matrix = F2Matrix | IntMatrix

# above this many entries the Q-rank switches from SNF to modular elimination
SNF_ENTRY_LIMIT = 20_000


class NotAComplexError(ValueError):
    pass


def rank_q(m: IntMatrix, method: str = "auto") -> int:
    """Rank over Q. ``method`` is "snf", "modular" or "auto"."""
    if m.rows == 0 or m.cols == 0:
        return 0
    if method == "auto":
        method = "snf" if m.rows * m.cols <= SNF_ENTRY_LIMIT else "modular"
    if method == "snf":
        return smith_normal_form(m, transforms=False).rank
    if method == "modular":
        return rank_modular(m)
    raise ValueError(f"unknown method {method!r}")


def rank(m: Matrix, ring: str) -> int:
    if ring == "F2":
        return (m if isinstance(m, F2Matrix) else m.mod2()).rank()
    if ring == "Q":
        if isinstance(m, F2Matrix):
            raise TypeError("an F2 matrix has no Q rank")
        return rank_q(m)
    raise ValueError(f"unknown ring {ring!r}")


def _compose_is_zero(out: Matrix, inn: Matrix, ring: str) -> bool:
    if ring == "F2":
        a = out if isinstance(out, F2Matrix) else out.mod2()
        b = inn if isinstance(inn, F2Matrix) else inn.mod2()
        return (a @ b).is_zero()
    return (out @ inn).is_zero()


def homology_ranks(boundary_in: Matrix, boundary_out: Matrix, ring: str = "F2") -> int:
    """dim ker(boundary_out) - rank(boundary_in) at the middle space."""
    if boundary_in.rows != boundary_out.cols:
        raise ValueError("boundary maps do not share the middle space")
    if not _compose_is_zero(boundary_out, boundary_in, ring):
        raise NotAComplexError("not a complex")
    n = boundary_out.cols
    return n - rank(boundary_out, ring) - rank(boundary_in, ring)


def complex_homology_rank(d: F2Matrix) -> int:
    """Total homology dimension of (F2^n, d) with d square and d @ d = 0."""
    if d.rows != d.cols:
        raise ValueError("differential must be square")
    if not (d @ d).is_zero():
        raise NotAComplexError("not a complex")
    return d.rows - 2 * d.rank()


@dataclass(frozen=True)
class HomologyData:
    """Explicit homology of (F2^n, d): cycles, boundaries and class representatives.

    Vectors are stored as rows. Representatives extend the boundary basis to a
    cycle basis by deterministic pivoting.
    """

    dim: int
    boundaries: F2Matrix
    representatives: F2Matrix

    @property
    def rank(self) -> int:
        return self.representatives.rows

    @classmethod
    def of(cls, d: F2Matrix) -> HomologyData:
        if d.rows != d.cols:
            raise ValueError("differential must be square")
        if not (d @ d).is_zero():
            raise NotAComplexError("not a complex")
        n = d.cols
        z = F2Matrix.from_row_vectors(kernel_basis(d), n)
        b = row_basis(d.T) if n else F2Matrix(0, n)
        reps = z.take_rows(complement_rows(b, z))
        return cls(n, b, reps)

    def classes(self, cycles: F2Matrix) -> F2Matrix:
        """Coordinates (rows) of the classes of the given cycles (rows)."""
        basis = self.boundaries.vstack(self.representatives)
        c = coordinates(basis, cycles)
        if c is None:
            raise ValueError("vector is not a cycle")
        return c.take_cols(range(self.boundaries.rows, basis.rows))


def induced_map(f: F2Matrix, source: HomologyData, target: HomologyData) -> F2Matrix:
    """Matrix of f_* : H(source) -> H(target) acting on column coordinates."""
    if f.shape != (target.dim, source.dim):
        raise ValueError("map shape does not match the complexes")
    if source.rank == 0:
        return F2Matrix(target.rank, 0)
    images = source.representatives @ f.T
    return target.classes(images).T


def is_chain_map(f: F2Matrix, d_source: F2Matrix, d_target: F2Matrix) -> bool:
    return f @ d_source == d_target @ f


def cone_differential(f: F2Matrix, d_source: F2Matrix, d_target: F2Matrix) -> F2Matrix:
    """Differential of the mapping cone on source ⊕ target."""
    zero = F2Matrix(d_source.rows, d_target.cols)
    return F2Matrix.block([[d_source, zero], [f, d_target]])


def solve_f2(a: F2Matrix, b: np.ndarray) -> np.ndarray | None:
    """Some x with a @ x = b, or None."""
    aug = a.hstack(F2Matrix.from_dense(np.asarray(b, dtype=np.uint8).reshape(-1, 1)))
    red, piv = aug.echelon(reduced=True)
    if piv.size and piv[-1] == a.cols:
        return None
    dense = red.to_dense()
    x = np.zeros(a.cols, dtype=np.uint8)
    for r, c in enumerate(piv):
        x[c] = dense[r, a.cols]
    return x
