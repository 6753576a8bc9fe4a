"""Certificates, contractive realizations, and determinantal representations
for rational matrix functions on polynomially defined domains."""

from .errors import (
    CertificateNotFound,
    CommutationError,
    RealizationError,
    ScreenFailure,
    SerializationError,
    ShapeMismatchError,
)
from .polynomials import (
    CommutingTuple,
    HermPoly,
    MatPoly,
    bivar_outer,
    coeff_matrix,
    eval_matpoly,
    grlex_monomials,
    herm_congruence,
    hereditary_eval,
)

__all__ = [
    "CertificateNotFound",
    "CommutationError",
    "CommutingTuple",
    "HermPoly",
    "MatPoly",
    "RealizationError",
    "ScreenFailure",
    "SerializationError",
    "ShapeMismatchError",
    "bivar_outer",
    "coeff_matrix",
    "eval_matpoly",
    "grlex_monomials",
    "herm_congruence",
    "hereditary_eval",
]
