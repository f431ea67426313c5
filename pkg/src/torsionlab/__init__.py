"""Finite-dimensional workbench for eta invariants, refined and Cappell-Miller
torsion of complexes with chirality, and truncated Selberg/Ruelle zeta functions."""

from .spectral import (
    AgmonAngle,
    BranchCutError,
    EtaResult,
    Spectrum,
    SpectralError,
    branch_log,
    det_theta,
    eta,
    graded_det,
    is_agmon,
    ldet_theta,
    spectral_decompose,
    zeta_theta,
)
from .complexes import ComplexError, GradedComplex
from .detline import DetLineElement, c_gamma, fuse, phi, refined_torsion

__version__ = "0.1.0"
