"""tubecalc: tube algebras of spherical fusion categories, concretely.

Turn a declaratively specified spherical semisimple (multi)fusion category
into linear algebra: fusion-tree Hom spaces, the tube algebra, its
representation theory, and the braided monoidal structure on those
representations (fusion products, associators, braiding, twists, duals,
S and T matrices).
"""

from .scalars import (
    Scalar,
    TolerancePolicy,
    approx_eq,
    parse_scalar,
    ScalarError,
    BackendMismatch,
    NotExactlyRepresentable,
    ParseError,
)
from .category import CategorySpec, load_spec, validate, qdim
from .homspace import BoundaryWord, FusionTree, HomVector, Calculus

__all__ = [
    "Scalar",
    "TolerancePolicy",
    "approx_eq",
    "parse_scalar",
    "ScalarError",
    "BackendMismatch",
    "NotExactlyRepresentable",
    "ParseError",
    "CategorySpec",
    "load_spec",
    "validate",
    "qdim",
    "BoundaryWord",
    "FusionTree",
    "HomVector",
    "Calculus",
]

__version__ = "0.1.0"
