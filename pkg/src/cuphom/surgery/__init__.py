"""Surgery models: Spin^c lattices, knot surgery mapping cones and the cup-model cube."""

from .cupmodel import build_cup_model_cube, perturb_model
from .knot import (
    AInfinity,
    Destabilization,
    Entry,
    Generator,
    InclusionMap,
    ModelKnotComplex,
    SurgeryComplexSlice,
    a_infinity,
    inclusion_map,
    knot_surgery_complex,
    rank_f2_rational,
    trefoil,
    unknot,
)
from .lattice import FramedLinkLattice, SpincClass, SpincSummary, psi_map_lattice, spinc_classes

__all__ = [
    "AInfinity",
    "Destabilization",
    "Entry",
    "FramedLinkLattice",
    "Generator",
    "InclusionMap",
    "ModelKnotComplex",
    "SpincClass",
    "SpincSummary",
    "SurgeryComplexSlice",
    "a_infinity",
    "build_cup_model_cube",
    "inclusion_map",
    "knot_surgery_complex",
    "perturb_model",
    "psi_map_lattice",
    "rank_f2_rational",
    "spinc_classes",
    "trefoil",
    "unknot",
]
