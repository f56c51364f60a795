"""Exact linear algebra over F2, Z and Q."""

from .f2 import F2Matrix, coordinates, complement_rows, kernel_basis, rank_f2, row_basis
from .homology import (
    HomologyData,
    NotAComplexError,
    complex_homology_rank,
    cone_differential,
    homology_ranks,
    induced_map,
    is_chain_map,
    rank,
    rank_q,
    solve_f2,
)
from .integer import IntMatrix, SmithForm, bareiss_rank, smith_normal_form
from .modular import rank_mod_p, rank_modular

__all__ = [
    "F2Matrix",
    "HomologyData",
    "IntMatrix",
    "NotAComplexError",
    "SmithForm",
    "bareiss_rank",
    "complement_rows",
    "complex_homology_rank",
    "cone_differential",
    "coordinates",
    "homology_ranks",
    "induced_map",
    "is_chain_map",
    "kernel_basis",
    "rank",
    "rank_f2",
    "rank_mod_p",
    "rank_modular",
    "rank_q",
    "row_basis",
    "smith_normal_form",
    "solve_f2",
]
