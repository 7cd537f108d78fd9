"""Superregular block Toeplitz matrices and MDP convolutional codes over GF(p^N)."""

__version__ = "0.1.0"

from .finite_field import FieldCtx, FieldElement, field_for_degree, make_field  # noqa: E402
from .linalg import Matrix  # noqa: E402
from .superregular import CodeParams, check_superregular, min_field_search  # noqa: E402
from .convcode import ConvCode, column_distance, is_mdp, mdp_construct  # noqa: E402

__all__ = [
    "CodeParams",
    "ConvCode",
    "FieldCtx",
    "FieldElement",
    "Matrix",
    "check_superregular",
    "column_distance",
    "field_for_degree",
    "is_mdp",
    "make_field",
    "mdp_construct",
    "min_field_search",
]
