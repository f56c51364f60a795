"""Cup homology, hypercubes of chain complexes and surgery mapping cones over F2."""

__version__ = "0.1.0"
