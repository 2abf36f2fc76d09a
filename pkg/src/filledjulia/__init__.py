"""Certified approximation of filled Julia sets of complex polynomials."""

from .cells import CellSet, contained_in, from_disks, hausdorff_upper, neighborhood
from .driver import (
    Budgets,
    RenderResult,
    SiegelParams,
    Status,
    golden_inner_radius_upper,
    render_filled_julia,
    render_siegel_with_radius,
)
from .dyadic import ComplexBox, Dyadic, DyadicComplex, box_mul
from .errors import BoundaryAmbiguityError, DyadicOverflowError, PreconditionError, ResourceError
from .inner import inner_cover
from .oracle import (
    Polynomial,
    PolynomialOracle,
    eval_enclosure,
    iterate_enclosure,
    iterate_map_poly,
    parse_polynomial,
)
from .outer import escape_radius, preimage_approx
from .roots import OrbitCertificate, OrbitKind, enumerate_repelling, isolate_roots, verify_certificate

__version__ = "0.1.0"

__all__ = [
    "CellSet",
    "contained_in",
    "from_disks",
    "hausdorff_upper",
    "neighborhood",
    "Budgets",
    "RenderResult",
    "SiegelParams",
    "Status",
    "golden_inner_radius_upper",
    "render_filled_julia",
    "render_siegel_with_radius",
    "ComplexBox",
    "Dyadic",
    "DyadicComplex",
    "box_mul",
    "BoundaryAmbiguityError",
    "DyadicOverflowError",
    "PreconditionError",
    "ResourceError",
    "inner_cover",
    "Polynomial",
    "PolynomialOracle",
    "eval_enclosure",
    "iterate_enclosure",
    "iterate_map_poly",
    "parse_polynomial",
    "escape_radius",
    "preimage_approx",
    "OrbitCertificate",
    "OrbitKind",
    "enumerate_repelling",
    "isolate_roots",
    "verify_certificate",
]
