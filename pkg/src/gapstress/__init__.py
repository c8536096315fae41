"""Stress concentration factors for nearly touching stiff inclusions.

Numerical library for the planar Lame system and the perfect conductivity
problem with two m-convex inclusions separated by a thin gap: explicit
auxiliary fields, thin-gap integrals, graded P1 finite elements, the
factor linear systems solved by both LU and determinant ratios, and
epsilon-sweep experiments that fit the gradient blow-up rates.
"""

from gapstress.elastic import ElasticityTensor, RigidMotion, lame_constants, rigid_basis
from gapstress.geometry import (
    AnisotropicProfile,
    DomainSpec,
    MonomialProfile,
    TabulatedProfile,
    delta,
    load_config,
    validate_hypotheses,
)

__all__ = [
    "ElasticityTensor",
    "RigidMotion",
    "lame_constants",
    "rigid_basis",
    "MonomialProfile",
    "AnisotropicProfile",
    "TabulatedProfile",
    "DomainSpec",
    "delta",
    "validate_hypotheses",
    "load_config",
]

__version__ = "0.1.0"
