"""Exact computations with restricted differential-operator algebras over
prime fields: PBW normal forms, p-curvature of connections, and Frobenius
descent of the associated Hitchin invariants."""

from .poly import (
    Derivation,
    NotDescendable,
    Poly,
    PolyParseError,
    PolyRing,
    PrimeField,
    ResourceLimitError,
    parse_poly,
)

__all__ = [
    "Derivation",
    "NotDescendable",
    "Poly",
    "PolyParseError",
    "PolyRing",
    "PrimeField",
    "ResourceLimitError",
    "parse_poly",
]
