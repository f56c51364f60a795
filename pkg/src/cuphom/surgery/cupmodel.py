"""The cup-model hypercube: one generator per vertex, μ on the 3-diagonals."""

from __future__ import annotations

from typing import Mapping

from ..cupform import ThreeForm
from ..hypercube import HyperboxComplex, Vertex, lattice, norm, require_relations
from ..linalg import F2Matrix


def build_cup_model_cube(mu: ThreeForm) -> HyperboxComplex:
    """D^{ε'} with ε' supported on {i,j,k} is μ(i,j,k) mod 2 wherever ε_i = ε_j = ε_k = 0."""
    ell = mu.ell
    size = (1,) * ell
    verts = lattice(size)
    one = F2Matrix.identity(1)
    maps: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    odd = [t for t, c in mu.triples.items() if c % 2]
    for eps in verts:
        for t in odd:
            if all(eps[i - 1] == 0 for i in t):
                step = tuple(1 if i + 1 in t else 0 for i in range(ell))
                maps[(eps, step)] = one
    h = HyperboxComplex(size, {v: 1 for v in verts}, maps)
    require_relations(h)
    return h


def perturb_model(h: HyperboxComplex, extra: Mapping[tuple[Vertex, Vertex], F2Matrix | int]) -> HyperboxComplex:
    """Add higher diagonal maps (‖ε'‖ >= 4) and re-check the hyperbox relations."""
    clean: dict[tuple[Vertex, Vertex], F2Matrix] = {}
    for (eps, step), m in extra.items():
        eps, step = tuple(eps), tuple(step)
        if norm(step) < 4:
            raise ValueError(f"perturbation {step} at {eps} must have length at least 4")
        if isinstance(m, int):
            m = F2Matrix.from_dense([[m & 1]])
        clean[(eps, step)] = m
    if not clean:
        return h
    out = h.with_maps(clean)
    require_relations(out)
    return out

