"""The cup homology complex (Λ*, ι_μ), its ranks over F2 and Q, and the Ψ calculus.

U is never materialised: the differential pairs an exterior-degree drop of 3
with one power of U^-1, so the rank over the Laurent ring equals the dimension
of H(Λ*, ι_μ) over the coefficient field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np
import numpy.typing as npt

from .cupform import ThreeForm, component_part, connect_sum, disjoint_sum, free_part
from .errors import SemanticError
from .exterior import contraction_matrix, popcount
from .linalg import F2Matrix, HomologyData, IntMatrix, induced_map, kernel_basis, rank_q


@dataclass(frozen=True)
class UConvention:
    """Grading bookkeeping: U has degree -2 and the differential carries U^-1."""

    u_degree: int = -2
    differential_u_power: int = -1


@dataclass(frozen=True)
class CupComplex:
    mu: ThreeForm
    ring: str = "F2"
    u_convention: UConvention = field(default_factory=UConvention)

    def __post_init__(self):
        if self.ring not in ("F2", "Q"):
            raise ValueError(f"ring must be F2 or Q, got {self.ring!r}")

    @property
    def ell(self) -> int:
        return self.mu.ell

    def integer_block(self, degree: int) -> npt.NDArray[np.int64]:
        return contraction_matrix(self.mu, degree)

    def differential_matrix(self, degree: int) -> F2Matrix | IntMatrix:
        return differential_matrix(self, degree)


def differential_matrix(c: CupComplex, degree: int) -> F2Matrix | IntMatrix:
    """ι_μ from Λ^degree to Λ^(degree-3), bitmask basis order."""
    if not 0 <= degree <= c.ell:
        raise ValueError(f"degree {degree} outside 0..{c.ell}")
    block = c.integer_block(degree)
    if c.ring == "F2":
        return F2Matrix.from_dense(block & 1)
    return IntMatrix(block)


@dataclass(frozen=True)
class RankReport:
    ell: int
    rank_f2: int | None
    rank_q: int | None
    by_degree: tuple[int, ...]
    two_torsion: bool | None

    def to_json_obj(self) -> dict:
        return {
            "rank_f2": self.rank_f2,
            "rank_q": self.rank_q,
            "by_degree": list(self.by_degree),
            "two_torsion": self.two_torsion,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def _degree_ranks_f2(mu: ThreeForm) -> list[int]:
    out = [0] * (mu.ell + 1)
    for i in range(3, mu.ell + 1):
        out[i] = F2Matrix.from_dense(contraction_matrix(mu, i) & 1).rank()
    return out


def _degree_ranks_q(mu: ThreeForm) -> list[int]:
    out = [0] * (mu.ell + 1)
    for i in range(3, mu.ell + 1):
        out[i] = rank_q(IntMatrix(contraction_matrix(mu, i)))
    return out


def _homology_by_degree(ell: int, ranks: list[int]) -> list[int]:
    # H^i = dim Λ^i - rank(d on Λ^i) - rank(d on Λ^{i+3})
    return [comb(ell, i) - ranks[i] - (ranks[i + 3] if i + 3 <= ell else 0) for i in range(ell + 1)]


def homology_rank(c: CupComplex | ThreeForm, rings: tuple[str, ...] = ("F2", "Q")) -> RankReport:
    """Homology ranks of (Λ*, ι_μ) in the requested rings."""
    mu = c.mu if isinstance(c, CupComplex) else c
    ell = mu.ell
    rank_f2 = rank_qq = None
    by_degree: tuple[int, ...] = ()
    if "F2" in rings:
        ranks = _degree_ranks_f2(mu)
        by_degree = tuple(_homology_by_degree(ell, ranks))
        rank_f2 = sum(by_degree)
        assert rank_f2 + 2 * sum(ranks) == 1 << ell
    if "Q" in rings:
        ranks_q = _degree_ranks_q(mu)
        rank_qq = sum(_homology_by_degree(ell, ranks_q))
        if not by_degree:
            by_degree = tuple(_homology_by_degree(ell, ranks_q))
    torsion = None if rank_f2 is None or rank_qq is None else rank_f2 > rank_qq
    if torsion is not None and rank_f2 < rank_qq:
        raise AssertionError("F2 rank below Q rank")
    return RankReport(ell, rank_f2, rank_qq, by_degree, torsion)


def check_square_zero(mu: ThreeForm, ring: str = "Z") -> bool:
    """d∘d = 0 on every degree, over Z or F2."""
    for i in range(6, mu.ell + 1):
        a = contraction_matrix(mu, i)
        b = contraction_matrix(mu, i - 3)
        prod = b @ a
        if ring == "F2":
            prod = prod & 1
        if np.any(prod):
            return False
    return True


def full_contraction(mu, ell: int | None = None) -> npt.NDArray[np.int64]:
    """Contraction on the whole algebra as a 2^ell square matrix in bitmask order."""
    ell = mu.ell if ell is None else ell
    n = 1 << ell
    out = np.zeros((n, n), dtype=np.int64)
    masks = np.arange(n, dtype=np.int64)
    for t, v in mu.mask_items():
        src = masks[(masks & t) == t]
        rest = src & ~t
        parity = np.zeros(src.size, dtype=np.int64)
        tt = t
        while tt:
            low = tt & -tt
            parity += np.array([popcount(int(x)) for x in (rest & (low - 1))], dtype=np.int64)
            tt ^= low
        np.add.at(out, (rest, src), v * (1 - 2 * (parity & 1)))
    return out


@dataclass(frozen=True)
class PsiData:
    """Homology-level maps of a split at index r (all over F2)."""

    r: int
    nu: ThreeForm
    homology_dim: int
    d1: F2Matrix
    d2: F2Matrix
    dk: F2Matrix
    psi: F2Matrix


def _split_maps(mu1: ThreeForm, mu2: ThreeForm, r: int):
    if mu1.ell != mu2.ell:
        raise ValueError("forms on different index ranges")
    nu = free_part(mu1, r)
    if free_part(mu2, r) != nu:
        raise SemanticError(f"forms disagree on triples avoiding index {r}")
    ell = mu1.ell
    n = 1 << ell
    bit = 1 << (r - 1)
    base = [m for m in range(n) if not m & bit]
    lifted = [m | bit for m in base]
    d_nu = (full_contraction(nu) & 1)[np.ix_(base, base)]

    def part_map(mu: ThreeForm) -> F2Matrix:
        full = full_contraction(component_part(mu, r)) & 1
        # precompose with e_S -> e_{S+r}
        return F2Matrix.from_dense(full[np.ix_(base, lifted)])

    return nu, F2Matrix.from_dense(d_nu), part_map(mu1), part_map(mu2)


def psi_data(mu1: ThreeForm, mu2: ThreeForm, r: int) -> PsiData:
    nu, d_nu, c1, c2 = _split_maps(mu1, mu2, r)
    for c in (c1, c2):
        if c @ d_nu != d_nu @ c:
            raise AssertionError("contraction piece is not a chain map")
    h = HomologyData.of(d_nu)
    d1 = induced_map(c1, h, h)
    d2 = induced_map(c2, h, h)
    dk = induced_map(c1 + c2, h, h)
    eye = F2Matrix.identity(h.rank)
    for d in (d1, d2):
        if (eye + d) @ (eye + d) != eye:
            raise AssertionError("(Id + d)^2 != Id on homology")
    psi = dk + d1 @ d2
    assembled = eye + (eye + d1) @ (eye + d2).inverse()
    if psi != assembled:
        raise AssertionError("Ψ formula disagrees with Id + (Id+d1)(Id+d2)^-1")
    return PsiData(r, nu, h.rank, d1, d2, dk, psi)


def psi_map(mu1: ThreeForm, mu2: ThreeForm, r: int) -> F2Matrix:
    """Ψ = d1 + d2 + d1∘d2 on H(Λ*(generators other than r), ι_ν)."""
    return psi_data(mu1, mu2, r).psi


@dataclass(frozen=True)
class ContainmentReport:
    holds: bool
    counterexample: tuple[int, ...] | None
    homology_dim: int
    rank_dk: int
    rank_psi: int
    cone_rank_dk: int
    cone_rank_psi: int
    rank_hc: int

    def to_json_obj(self) -> dict:
        return {
            "holds": self.holds,
            "counterexample": list(self.counterexample) if self.counterexample is not None else None,
            "homology_dim": self.homology_dim,
            "rank_dk": self.rank_dk,
            "rank_psi": self.rank_psi,
            "cone_rank_psi": self.cone_rank_psi,
            "rank_hc": self.rank_hc,
        }


def kernel_containment_check(mu1: ThreeForm, mu2: ThreeForm, r: int) -> ContainmentReport:
    """Whether ker (d^K)_* lies in ker Ψ; the first failing kernel vector otherwise."""
    data = psi_data(mu1, mu2, r)
    bad = None
    for v in kernel_basis(data.dk):
        if data.psi.apply(v).any():
            bad = tuple(int(x) for x in v)
            break
    whole = connect_sum(data.nu, connect_sum(component_part(mu1, r), component_part(mu2, r)))
    rank_hc = homology_rank(whole, ("F2",)).rank_f2
    rk_dk, rk_psi = data.dk.rank(), data.psi.rank()
    cone_dk = 2 * data.homology_dim - 2 * rk_dk
    if cone_dk != rank_hc:
        raise AssertionError(f"cone of (d^K)_* has rank {cone_dk}, direct cup homology {rank_hc}")
    return ContainmentReport(
        holds=bad is None,
        counterexample=bad,
        homology_dim=data.homology_dim,
        rank_dk=rk_dk,
        rank_psi=rk_psi,
        cone_rank_dk=cone_dk,
        cone_rank_psi=2 * data.homology_dim - 2 * rk_psi,
        rank_hc=rank_hc,
    )


def kunneth_rank(a: ThreeForm, b: ThreeForm, ring: str = "F2") -> int:
    """rank(a) * rank(b), asserted equal to the rank of the disjoint sum."""
    key = "rank_f2" if ring == "F2" else "rank_q"
    ra = getattr(homology_rank(a, (ring,)), key)
    rb = getattr(homology_rank(b, (ring,)), key)
    direct = getattr(homology_rank(disjoint_sum(a, b), (ring,)), key)
    if direct != ra * rb:
        raise AssertionError(f"Künneth failure: {direct} != {ra} * {rb}")
    return ra * rb
