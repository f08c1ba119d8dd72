"""Restricted Lie algebroids on free modules, given by structure constants.

A presentation consists of a free module H of rank m over a polynomial
ring R, a bracket table [e_a, e_b] = sum_k c_ab^k e_k, an anchor derivation
delta(e_a) for each basis element, and a p-operation table
e_a^[p] = sum_k q_a^k e_k.  Elements of H are plain tuples of m
polynomials (the coefficient vector in the chosen basis).

The bracket of two general elements is forced by the tables together with
the Leibniz rule:

    [D, E] = sum_ab D_a E_b [e_a, e_b] + delta_D(E_b) e_b - delta_E(D_a) e_a

and the p-operation extends from the basis by the two restricted axioms
(additivity up to the universal Lie polynomials of Jacobson's formula, and
the twisted scaling rule for function multiples).  None of the axioms are
assumed: :func:`validate_algebroid` and :func:`validate_p_structure` check
them on monomial-plus-random panels and report each one separately.

Constructors are provided for the standard families: the tangent algebroid
(anchor the identity, p-operation the p-th power of vector fields), Higgs
algebroids (zero bracket and anchor, p-operation any p-linear map), the
one-parameter Rees deformation connecting the two, and p-structure shifts
by central elements.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .panels import monomial_panel, random_poly, random_vector
from .poly import Derivation, Poly, PolyRing, det
from .report import ValidationReport

def _fresh_name(ring: PolyRing, base: str) -> str:
    if base not in ring.variables:
        return base
    k = 0
    while f"{base}{k}" in ring.variables:
        k += 1
    return f"{base}{k}"


@dataclass(frozen=True)
class AlgebroidPresentation:
    """(H, bracket, anchor, p-operation) on a free module of rank m."""

    ring: PolyRing
    rank: int
    bracket: tuple  # bracket[a][b] = coefficient vector of [e_a, e_b]
    anchor: tuple   # anchor[a] = Derivation delta(e_a)
    p_op: tuple     # p_op[a] = coefficient vector of e_a^[p]

    def __post_init__(self):
        m = self.rank
        if m < 1:
            raise ValueError("rank must be at least 1")
        bracket = tuple(tuple(tuple(row) for row in table) for table in self.bracket)
        p_op = tuple(tuple(row) for row in self.p_op)
        anchor = tuple(self.anchor)
        object.__setattr__(self, "bracket", bracket)
        object.__setattr__(self, "p_op", p_op)
        object.__setattr__(self, "anchor", anchor)
        if len(bracket) != m or any(len(t) != m for t in bracket):
            raise ValueError("bracket table must be rank x rank")
        if any(len(v) != m for t in bracket for v in t):
            raise ValueError("bracket entries must be coefficient vectors of length rank")
        if len(anchor) != m:
            raise ValueError("one anchor derivation per basis element required")
        if len(p_op) != m or any(len(v) != m for v in p_op):
            raise ValueError("p-operation table must be rank x rank")
        for table in bracket:
            for vec in table:
                for c in vec:
                    if c.ring != self.ring:
                        raise ValueError("bracket coefficient from a different ring")
        for d in anchor:
            if d.ring != self.ring:
                raise ValueError("anchor derivation over a different ring")
        for vec in p_op:
            for c in vec:
                if c.ring != self.ring:
                    raise ValueError("p-operation coefficient from a different ring")

    @property
    def p(self) -> int:
        return self.ring.p

    # -- elements of H ----------------------------------------------------

    def h_zero(self):
        return tuple(self.ring.zero() for _ in range(self.rank))

    def h_basis(self, a: int):
        return tuple(
            self.ring.one() if k == a else self.ring.zero() for k in range(self.rank)
        )

    def h_add(self, D, E):
        return tuple(d + e for d, e in zip(D, E))

    def h_sub(self, D, E):
        return tuple(d - e for d, e in zip(D, E))

    def h_scale(self, f: Poly, D):
        return tuple(f * d for d in D)

    def h_is_zero(self, D) -> bool:
        return all(c.is_zero() for c in D)

    def anchor_of(self, D) -> Derivation:
        """The anchor of a general element, sum g_a * delta(e_a)."""
        out = Derivation.zero(self.ring)
        for g, d in zip(D, self.anchor):
            if not g.is_zero():
                out = out + d.scale(g)
        return out

    def h_bracket(self, D, E):
        """Bracket of two coefficient vectors, extended by the Leibniz rule."""
        out = list(self.h_zero())
        delta_D = self.anchor_of(D)
        delta_E = self.anchor_of(E)
        for a, g in enumerate(D):
            if g.is_zero():
                continue
            for b, h in enumerate(E):
                if h.is_zero():
                    continue
                gh = g * h
                for k, c in enumerate(self.bracket[a][b]):
                    if not c.is_zero():
                        out[k] = out[k] + gh * c
        for b, h in enumerate(E):
            if not h.is_zero():
                out[b] = out[b] + delta_D(h)
        for a, g in enumerate(D):
            if not g.is_zero():
                out[a] = out[a] - delta_E(g)
        return tuple(out)

    def h_ad_iter(self, D, E, k: int):
        for _ in range(k):
            E = self.h_bracket(D, E)
        return E

    def h_lie_polynomials(self, x, y):
        """The universal Lie polynomials s_1, ..., s_{p-1} of Jacobson's
        formula, computed inside H (which is closed under the bracket).

        They are read off from the expansion
        ad(tau*x + y)^(p-1)(x) = sum_i i*s_i(x, y)*tau^(i-1)
        over the ring extended by a fresh central variable tau.
        """
        p = self.p
        tau_name = _fresh_name(self.ring, "tau")
        big_ring = self.ring.extended(tau_name)
        big = self.map_to(big_ring)
        tau = big_ring.variable(tau_name)
        x_big = tuple(c.map_to(big_ring) for c in x)
        y_big = tuple(c.map_to(big_ring) for c in y)
        z = big.h_add(big.h_scale(tau, x_big), y_big)
        w = big.h_ad_iter(z, x_big, p - 1)
        out = []
        for i in range(1, p):
            inv_i = self.ring.field.inv(i)
            comps = []
            for c in w:
                parts = c.split_variable(tau_name)
                comps.append(parts.get(i - 1, self.ring.zero()) * inv_i)
            out.append(tuple(comps))
        return out

    def p_operation(self, D):
        """e -> e^[p] on a general element, extended from the basis table.

        A single-term element g*e_a maps to g^p e_a^[p] + (g delta_a)^{p-1}(g) e_a;
        multi-term elements are folded with Jacobson's correction terms
        sum_i s_i between the partial sum and the next term.
        """
        p = self.p
        terms = [(a, g) for a, g in enumerate(D) if not g.is_zero()]
        if not terms:
            return self.h_zero()
        result = None
        partial = None
        for a, g in terms:
            scaled_anchor = self.anchor[a].scale(g)
            single = self.h_add(
                self.h_scale(g**p, self.p_op[a]),
                self.h_scale(scaled_anchor.apply_iter(g, p - 1), self.h_basis(a)),
            )
            term = self.h_scale(g, self.h_basis(a))
            if result is None:
                result, partial = single, term
                continue
            result = self.h_add(result, single)
            for s in self.h_lie_polynomials(partial, term):
                result = self.h_add(result, s)
            partial = self.h_add(partial, term)
        return result

    # -- transport --------------------------------------------------------

    def map_to(self, big_ring: PolyRing) -> "AlgebroidPresentation":
        """The same presentation over a ring with extra variables (which are
        central: no anchor acts on them)."""
        bracket = tuple(
            tuple(tuple(c.map_to(big_ring) for c in vec) for vec in table)
            for table in self.bracket
        )
        anchor = tuple(d.map_to(big_ring) for d in self.anchor)
        p_op = tuple(tuple(c.map_to(big_ring) for c in vec) for vec in self.p_op)
        return AlgebroidPresentation(big_ring, self.rank, bracket, anchor, p_op)

    def __str__(self):
        return (
            f"algebroid of rank {self.rank} over "
            f"F_{self.p}[{', '.join(self.ring.variables)}]"
        )


# -- validators -------------------------------------------------------------


def validate_algebroid(A: AlgebroidPresentation, *, trials=10, seed=0, max_degree=3) -> ValidationReport:
    """Check the Lie algebroid axioms of a presentation.

    Antisymmetry and Jacobi are checked on all basis pairs/triples;
    the Leibniz rule on basis pairs against a monomial-plus-random panel;
    anchor compatibility delta([D1, D2]) = [delta(D1), delta(D2)] on all
    basis pairs.
    """
    rep = ValidationReport(f"algebroid axioms: {A}")
    m = A.rank
    rng = random.Random(seed)

    bad = []
    for a in range(m):
        for b in range(m):
            for k in range(m):
                want = -A.bracket[b][a][k] if a != b else A.ring.zero()
                if A.bracket[a][b][k] != want:
                    bad.append(f"[e{a + 1},e{b + 1}] component {k + 1}")
    rep.add("antisymmetry", not bad, witness="; ".join(bad) or None, pairs=m * m)

    bad = []
    for a in range(m):
        for b in range(a, m):
            for c in range(b, m):
                ea, eb, ec = A.h_basis(a), A.h_basis(b), A.h_basis(c)
                total = A.h_bracket(ea, A.h_bracket(eb, ec))
                total = A.h_add(total, A.h_bracket(eb, A.h_bracket(ec, ea)))
                total = A.h_add(total, A.h_bracket(ec, A.h_bracket(ea, eb)))
                if not A.h_is_zero(total):
                    bad.append(f"(e{a + 1},e{b + 1},e{c + 1})")
    rep.add("jacobi", not bad, witness="; ".join(bad) or None)

    panel = monomial_panel(A.ring, max_degree)
    panel += [random_poly(rng, A.ring, max_degree) for _ in range(trials)]
    bad = []
    for a in range(m):
        for b in range(m):
            ea, eb = A.h_basis(a), A.h_basis(b)
            for f in panel:
                lhs = A.h_bracket(ea, A.h_scale(f, eb))
                rhs = A.h_add(
                    A.h_scale(f, A.h_bracket(ea, eb)),
                    A.h_scale(A.anchor[a](f), eb),
                )
                if lhs != rhs:
                    bad.append(f"[e{a + 1}, ({f})*e{b + 1}]")
    rep.add("leibniz", not bad, witness="; ".join(bad[:3]) or None, panel=len(panel))

    bad = []
    for a in range(m):
        for b in range(m):
            lhs = A.anchor_of(A.bracket[a][b])
            rhs = A.anchor[a].commutator(A.anchor[b])
            if lhs != rhs:
                bad.append(f"(e{a + 1},e{b + 1})")
    rep.add("anchor_bracket_compatibility", not bad, witness="; ".join(bad) or None)
    return rep


def validate_p_structure(A: AlgebroidPresentation, *, trials=10, seed=0, max_degree=3) -> ValidationReport:
    """Check the restricted-structure axioms of the p-operation table.

    Assumes :func:`validate_algebroid` passed.  The compatibility of the
    anchor with the p-operation, delta(D^[p]) = delta(D)^p, is reported in
    its own section: it holds in all the families built here but is
    validated separately rather than assumed.
    """
    rep = ValidationReport(f"restricted structure: {A}")
    m, p = A.rank, A.p
    rng = random.Random(seed)

    bad = []
    for a in range(m):
        for b in range(m):
            lhs = A.h_bracket(A.p_op[a], A.h_basis(b))
            rhs = A.h_ad_iter(A.h_basis(a), A.h_basis(b), p)
            if lhs != rhs:
                bad.append(f"ad(e{a + 1}^[p])(e{b + 1})")
    rep.add("ad_axiom_on_basis", not bad, witness="; ".join(bad) or None)

    bad = []
    for _ in range(trials):
        d1 = random_vector(rng, A.ring, m, max_degree)
        d2 = random_vector(rng, A.ring, m, max_degree)
        lhs = A.p_operation(A.h_add(d1, d2))
        rhs = A.h_add(A.p_operation(d1), A.p_operation(d2))
        for s in A.h_lie_polynomials(d1, d2):
            rhs = A.h_add(rhs, s)
        if lhs != rhs:
            bad.append(f"D1=({', '.join(map(str, d1))}), D2=({', '.join(map(str, d2))})")
    rep.add("additivity_with_lie_polynomials", not bad, witness="; ".join(bad[:1]) or None, trials=trials)

    bad = []
    for _ in range(trials):
        f = random_poly(rng, A.ring, max_degree)
        D = random_vector(rng, A.ring, m, max_degree)
        lhs = A.p_operation(A.h_scale(f, D))
        correction = A.anchor_of(A.h_scale(f, D)).apply_iter(f, p - 1)
        rhs = A.h_add(A.h_scale(f**p, A.p_operation(D)), A.h_scale(correction, D))
        if lhs != rhs:
            bad.append(f"f={f}, D=({', '.join(map(str, D))})")
    rep.add("function_multiple_rule", not bad, witness="; ".join(bad[:1]) or None, trials=trials)

    # (f delta_D)^{p-1}(f) = -f delta_D^{p-1}(f^{p-1}): the sign is
    # (p-1)! = -1 by Wilson's theorem.
    bad = []
    for _ in range(trials):
        f = random_poly(rng, A.ring, max_degree)
        D = random_vector(rng, A.ring, m, max_degree)
        nu = A.anchor_of(D)
        lhs = nu.scale(f).apply_iter(f, p - 1)
        rhs = -(f * nu.apply_iter(f ** (p - 1), p - 1))
        if lhs != rhs:
            bad.append(f"f={f}, D=({', '.join(map(str, D))})")
    rep.add("iterated_anchor_identity", not bad, witness="; ".join(bad[:1]) or None, trials=trials)

    bad = []
    for a in range(m):
        if A.anchor_of(A.p_op[a]) != A.anchor[a].pth_power():
            bad.append(f"e{a + 1}")
    rep.add(
        "anchor_restricted_compatibility",
        not bad,
        section="anchor_compatibility",
        witness="; ".join(bad) or None,
    )
    return rep


# -- standard families -------------------------------------------------------


def tangent_algebroid(ring: PolyRing) -> AlgebroidPresentation:
    """Coordinate vector fields with the identity anchor and the p-th power
    of derivations as p-operation.  On a ring with a deformation variable
    only the ordinary coordinate directions appear."""
    coords = ring.coordinate_indices()
    m = len(coords)
    zero_vec = tuple(ring.zero() for _ in range(m))
    bracket = tuple(tuple(zero_vec for _ in range(m)) for _ in range(m))
    anchor = tuple(Derivation.coordinate(ring, j) for j in coords)
    p_op = []
    for d in anchor:
        dp = d.pth_power()
        for j, comp in enumerate(dp.components):
            if j not in coords and not comp.is_zero():
                raise ValueError("p-th power leaves the coordinate directions")
        p_op.append(tuple(dp.components[j] for j in coords))
    return AlgebroidPresentation(ring, m, bracket, anchor, tuple(p_op))


def higgs_algebroid(ring: PolyRing, rank: int, alpha) -> AlgebroidPresentation:
    """Zero bracket and anchor; the p-operation is the p-linear map with
    basis values alpha[a] = coefficient vector of e_a^[p]."""
    zero_vec = tuple(ring.zero() for _ in range(rank))
    bracket = tuple(tuple(zero_vec for _ in range(rank)) for _ in range(rank))
    anchor = tuple(Derivation.zero(ring) for _ in range(rank))
    p_op = tuple(tuple(row) for row in alpha)
    return AlgebroidPresentation(ring, rank, bracket, anchor, p_op)


def rees_algebroid(A: AlgebroidPresentation, variable: str = "t") -> AlgebroidPresentation:
    """The one-parameter deformation over the ring extended by t: bracket
    and anchor are scaled by t, the p-operation by t^(p-1).  At t = 1 this
    recovers A; at t = 0 the bracket and anchor vanish and the p-operation
    becomes the trivial one."""
    if A.ring.rees_variable is not None:
        raise ValueError("deformation variable already present")
    if variable in A.ring.variables:
        raise ValueError(f"variable {variable!r} already used by the ring")
    big_ring = PolyRing(A.ring.field, A.ring.variables + (variable,), variable)
    big = A.map_to(big_ring)
    t = big_ring.variable(variable)
    bracket = tuple(
        tuple(tuple(t * c for c in vec) for vec in table) for table in big.bracket
    )
    anchor = tuple(d.scale(t) for d in big.anchor)
    tp = t ** (A.p - 1)
    p_op = tuple(tuple(tp * c for c in vec) for vec in big.p_op)
    return AlgebroidPresentation(big_ring, A.rank, bracket, anchor, p_op)


def specialize_t(A: AlgebroidPresentation, value: int) -> AlgebroidPresentation:
    """Substitute a field constant for the deformation variable and drop it."""
    name = A.ring.rees_variable
    if name is None:
        raise ValueError("no deformation variable to specialize")
    j = A.ring.variables.index(name)
    small = PolyRing(
        A.ring.field, A.ring.variables[:j] + A.ring.variables[j + 1 :], None
    )
    bracket = tuple(
        tuple(tuple(c.substitute_constant(name, value) for c in vec) for vec in table)
        for table in A.bracket
    )
    anchors = []
    for d in A.anchor:
        if not d.components[j].is_zero():
            raise ValueError("anchor acts on the deformation variable")
        comps = tuple(
            c.substitute_constant(name, value)
            for k, c in enumerate(d.components)
            if k != j
        )
        anchors.append(Derivation(small, comps))
    p_op = tuple(
        tuple(c.substitute_constant(name, value) for c in vec) for vec in A.p_op
    )
    return AlgebroidPresentation(small, A.rank, bracket, tuple(anchors), p_op)


# -- p-structure shifts ------------------------------------------------------


@dataclass(frozen=True)
class PStructureShift:
    """A p-structure shifted by a p-linear central map: on basis elements
    e_a^[p]' = e_a^[p] + phi_a, where each phi_a is a central element of
    the enveloping algebra of filtration degree at most 1 (often a function
    whose ordinary exponents are all divisible by p).

    The shifted operation need not stay inside H, so this is an
    enveloping-level structure; the p-curvature and descent machinery
    accept it wherever a plain presentation is accepted.
    """

    base: AlgebroidPresentation
    phi: tuple  # one OperatorElement per basis element

    @property
    def algebroid(self) -> AlgebroidPresentation:
        return self.base

    @property
    def ring(self) -> PolyRing:
        return self.base.ring

    def shifted_p_op(self, a: int):
        """e_a^[p]' as an enveloping-algebra element."""
        from . import operators

        return operators.from_h_element(self.base, self.base.p_op[a]) + self.phi[a]


def shift_p_structure(A: AlgebroidPresentation, phi) -> PStructureShift:
    """Shift the p-operation of A by phi (one value per basis element,
    given as polynomials or degree-at-most-1 operators).

    Each value is checked to be central in the enveloping algebra; a
    non-central value is rejected, since the shifted operation would
    violate the ad-axiom.
    """
    from . import operators

    values = []
    for v in phi:
        if isinstance(v, Poly):
            v = operators.from_poly(A, v)
        if v.algebroid != A:
            raise ValueError("shift value over a different algebroid")
        if v.degree() > 1:
            raise ValueError("shift values must have filtration degree at most 1")
        if not v.is_central():
            raise ValueError(f"shift value {v} is not central")
        values.append(v)
    if len(values) != A.rank:
        raise ValueError("one shift value per basis element required")
    return PStructureShift(A, tuple(values))


# -- anchor surjectivity -----------------------------------------------------


def anchor_generic_surjectivity(A: AlgebroidPresentation):
    """Whether the anchor hits all coordinate directions at the generic
    point: true iff some maximal minor of the coordinate-by-generator
    anchor matrix is a nonzero polynomial.  Returns (flag, witness minor).
    """
    coords = A.ring.coordinate_indices()
    n = len(coords)
    if A.rank < n:
        return False, None
    matrix = [[A.anchor[a].components[j] for a in range(A.rank)] for j in coords]
    for cols in itertools.combinations(range(A.rank), n):
        minor = det([[matrix[i][c] for c in cols] for i in range(n)])
        if not minor.is_zero():
            return True, minor
    return False, None
