"""Deterministic and seeded-random input panels for the validators.

The identities being checked are polynomial in the coefficients of their
inputs, so a panel of all monomials up to a fixed degree together with a
batch of seeded random polynomials is conclusive at desk scale.  All
randomness is driven by an explicit ``random.Random`` instance so reports
are reproducible.
"""

from __future__ import annotations

import itertools
import random

from .poly import Poly, PolyRing


def monomial_panel(ring: PolyRing, max_degree: int = 3) -> list[Poly]:
    """All monomials of total degree at most ``max_degree`` (including 1)."""
    out = []
    n = ring.nvars
    for total in range(max_degree + 1):
        for cuts in itertools.combinations(range(total + n - 1), n - 1):
            exps = []
            prev = -1
            for c in cuts:
                exps.append(c - prev - 1)
                prev = c
            exps.append(total + n - 2 - prev)
            out.append(ring.monomial(tuple(exps)))
    return out


def random_poly(rng: random.Random, ring: PolyRing, max_degree: int = 3, max_terms: int = 3) -> Poly:
    out = ring.zero()
    for _ in range(rng.randrange(1, max_terms + 1)):
        e = [0] * ring.nvars
        for _ in range(rng.randrange(max_degree + 1)):
            e[rng.randrange(ring.nvars)] += 1
        out = out + ring.monomial(tuple(e), rng.randrange(1, ring.p))
    return out


def poly_panel(ring: PolyRing, trials: int, seed: int = 0, max_degree: int = 3) -> list[Poly]:
    """Monomial panel plus ``trials`` seeded random polynomials."""
    rng = random.Random(seed)
    out = monomial_panel(ring, max_degree)
    out.extend(random_poly(rng, ring, max_degree) for _ in range(trials))
    return out


def random_vector(rng, ring, length, max_degree=3, max_terms=2):
    return tuple(random_poly(rng, ring, max_degree, max_terms) for _ in range(length))


def random_matrix(rng, ring, rows, cols=None, max_degree=2, max_terms=2):
    cols = rows if cols is None else cols
    return tuple(
        tuple(random_poly(rng, ring, max_degree, max_terms) for _ in range(cols))
        for _ in range(rows)
    )
