"""
Geometry layer.

Boxes, the norm-based (NasSet) and polynomial superlevel (PasSet) set
families, monomial bases and JSON serialization.
"""

from .box import Box, as_points, box_membership
from .polynomials import (
    MonomialBasis,
    basis_size,
    box_faces,
    box_moments,
    monomial_exponents,
    putinar_polynomial,
    substitution_matrix,
)
from .serialization import set_from_dict, set_to_dict
from .sets import (
    ApproximatingSet,
    NasSet,
    NormType,
    PasSet,
    PutinarCertificate,
    log_unit_ball_volume,
    nas_membership,
    nas_volume,
    pas_membership,
)

__all__ = [
    "ApproximatingSet",
    "Box",
    "MonomialBasis",
    "NasSet",
    "NormType",
    "PasSet",
    "PutinarCertificate",
    "as_points",
    "basis_size",
    "box_faces",
    "box_membership",
    "box_moments",
    "log_unit_ball_volume",
    "monomial_exponents",
    "nas_membership",
    "nas_volume",
    "pas_membership",
    "putinar_polynomial",
    "set_from_dict",
    "set_to_dict",
    "substitution_matrix",
]
