"""Numerical symplectic linear algebra and filtered GF(2) chain machinery.

Modules:
    symplin  -- symplectic forms, Lagrangian frames and paths, det^2
    maslov   -- crossing-form indices of path pairs, det^2 winding
    handle   -- the subcritical handle local model and its flows
    profiles -- radial Hamiltonian profiles, action ledger, cutoffs
    spectrum -- chord levels and indices on the handle rotation locus
    homalg   -- filtered GF(2) complexes, homology, direct limits
    cli      -- the command-line front end
"""

from .halfint import HalfInt

__version__ = "0.1.0"

__all__ = ["HalfInt", "__version__"]
