"""Characteristic-polynomial invariants of the p-curvature and their
Frobenius descent.

The p-curvature matrices psi_1, ..., psi_m commute pairwise, so the
universal combination Psi(y) = sum_a y_a psi_a over formal dual variables
y_a has a well-behaved characteristic polynomial

    det(lam * I - Psi(y)) = sum_k (-1)^k e_k(y) lam^(r-k).

The invariants recorded here are the e_k: homogeneous degree-k polynomials
in the dual variables whose coefficients are ring elements.  (The sign
normalization is a convention; e_k is the k-th elementary symmetric
function of the eigenvalues, e_1 the trace and e_r the determinant.)

Descent asks whether every coefficient is a Frobenius pullback, i.e. has
all ordinary exponents divisible by p.  For modules over an algebroid
whose anchor is generically surjective this always succeeds (that is the
content of the descent theorem checked by the acceptance suite); a zero
anchor admits counterexamples, and failures are reported coefficient by
coefficient with the offending monomials.

The section-level machinery is Cartier-type: on a trivialized Frobenius
pullback the canonical connection differentiates coefficients, a section
descends exactly when all its canonical derivatives vanish, and descent is
implemented by dividing exponents by p (coefficients are their own p-th
roots over the prime field).
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebroid import AlgebroidPresentation, anchor_generic_surjectivity, _fresh_name
from .connection import PCurvature, check_higgs_commutativity, mat_scale, mat_trace
from .poly import Derivation, NotDescendable, Poly, PolyRing, det
from .report import ValidationReport


def _group_by_variables(f: Poly, names) -> dict:
    """Split off the named variables: a map from their exponent tuples to
    coefficients over the ring without them."""
    ring = f.ring
    idxs = [ring.variables.index(n) for n in names]
    keep = [i for i in range(ring.nvars) if i not in idxs]
    rees = ring.rees_variable if ring.rees_variable not in names else None
    small = PolyRing(ring.field, tuple(ring.variables[i] for i in keep), rees)
    grouped: dict = {}
    for e, c in f.terms.items():
        key = tuple(e[i] for i in idxs)
        rest = tuple(e[i] for i in keep)
        grouped.setdefault(key, {})[rest] = c
    return {key: Poly(small, terms) for key, terms in grouped.items()}


@dataclass(frozen=True)
class CharPoly:
    """det(lam*I - sum_a y_a psi_a), expanded over the ring extended by the
    dual variables and lam."""

    ring: PolyRing  # extended ring
    value: Poly
    lam: str
    duals: tuple

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class HitchinInvariants:
    """The elementary symmetric invariants e_1, ..., e_r of the universal
    p-curvature combination; coefficients[k-1] maps each dual-variable
    exponent tuple to its ring coefficient."""

    rank: int
    generators: int
    ring: PolyRing  # base ring of the module
    coefficients: tuple  # coefficients[k-1]: dict[y-exponents, Poly]

    def items(self):
        for k, table in enumerate(self.coefficients, start=1):
            for yexp in sorted(table):
                yield k, yexp, table[yexp]

    def render(self, k: int) -> str:
        table = self.coefficients[k - 1]
        if not table:
            return "0"
        chunks = []
        for yexp in sorted(table, reverse=True):
            coeff = table[yexp]
            mono = "*".join(
                f"y{a + 1}" if e == 1 else f"y{a + 1}^{e}"
                for a, e in enumerate(yexp)
                if e
            )
            cs = str(coeff)
            if not mono:
                chunks.append(cs)
            elif cs == "1":
                chunks.append(mono)
            elif len(coeff.terms) > 1:
                chunks.append(f"({cs})*{mono}")
            else:
                chunks.append(f"{cs}*{mono}")
        return " + ".join(chunks)

    def __str__(self):
        return "; ".join(f"e{k} = {self.render(k)}" for k in range(1, self.rank + 1))


def characteristic_polynomial(C: PCurvature) -> CharPoly:
    """Expand det(lam*I - sum_a y_a psi_a) exactly.  The p-curvature
    matrices must commute pairwise (they do for any valid input; this is
    re-checked, not assumed)."""
    if not check_higgs_commutativity(C).passed:
        raise ValueError("p-curvature matrices do not commute")
    base = C.ring
    m = C.algebroid.rank
    duals = []
    for a in range(m):
        duals.append(_fresh_name(base.extended(*duals) if duals else base, f"y{a + 1}"))
    lam = _fresh_name(base.extended(*duals), "lam")
    ext = base.extended(*duals, lam)
    r = C.module.rank
    psi_total = None
    for a in range(m):
        scaled = mat_scale(
            ext.variable(duals[a]),
            tuple(tuple(c.map_to(ext) for c in row) for row in C.psi[a]),
        )
        psi_total = scaled if psi_total is None else tuple(
            tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(psi_total, scaled)
        )
    lam_poly = ext.variable(lam)
    matrix = tuple(
        tuple(
            (lam_poly - psi_total[i][j]) if i == j else -psi_total[i][j]
            for j in range(r)
        )
        for i in range(r)
    )
    return CharPoly(ext, det(matrix), lam, tuple(duals))


def hitchin_invariants(C: PCurvature) -> HitchinInvariants:
    """Read the invariants e_k off the characteristic polynomial as the
    (-1)^k-normalized coefficients of lam^(r-k)."""
    cp = characteristic_polynomial(C)
    r = C.module.rank
    m = C.algebroid.rank
    by_lam = cp.value.split_variable(cp.lam)
    coefficients = []
    for k in range(1, r + 1):
        part = by_lam.get(r - k)
        table = {}
        if part is not None:
            if k % 2 == 1:
                part = -part
            table = {
                yexp: coeff
                for yexp, coeff in _group_by_variables(part, cp.duals).items()
                if not coeff.is_zero()
            }
        coefficients.append(table)
    return HitchinInvariants(r, m, C.ring, tuple(coefficients))


# -- canonical connection and Cartier descent --------------------------------


def canonical_derivative(section, derivation: Derivation):
    """The canonical connection on a trivialized Frobenius pullback
    differentiates coefficients."""
    return tuple(derivation(f) for f in section)


def section_descends(section) -> bool:
    """True iff all canonical derivatives in coordinate directions vanish."""
    ring = section[0].ring
    return all(
        canonical_derivative(section, Derivation.coordinate(ring, j))
        == tuple(ring.zero() for _ in section)
        for j in ring.coordinate_indices()
    )


def descend_section(section):
    """Invert the Frobenius pullback on a section, entry by entry; the
    first entry that is not a p-th power is returned as the failure."""
    out = []
    for f in section:
        root = f.pth_root()
        if isinstance(root, NotDescendable):
            return root
        out.append(root)
    return tuple(out)


# -- trace flatness ------------------------------------------------------------


def validate_trace_flatness(C: PCurvature) -> ValidationReport:
    """Anchor derivatives of all invariant coefficients vanish.

    Taking the trace of the commutation identity [psi_a, A_b] = delta_b . psi_a
    kills the left side, so delta_b(tr psi_a) = 0; the same holds for every
    coefficient of the higher invariants.  A zero anchor makes the check
    vacuous; that is flagged rather than hidden.
    """
    if C.ring.p <= 2:
        raise ValueError("trace flatness requires p > 2")
    rep = ValidationReport("anchor flatness of the invariants")
    A = C.algebroid
    anchors = [(b, d) for b, d in enumerate(A.anchor) if not d.is_zero()]
    if not anchors:
        rep.add("anchor_derivatives_of_traces", True, anchor="degenerate (all zero)")
        rep.add("anchor_derivatives_of_invariants", True, anchor="degenerate (all zero)")
        return rep
    bad = []
    for a in range(A.rank):
        trace = mat_trace(C.psi[a])
        for b, d in anchors:
            if not d(trace).is_zero():
                bad.append(f"delta_{b + 1}(tr psi_{a + 1}) = {d(trace)}")
    rep.add("anchor_derivatives_of_traces", not bad, witness="; ".join(bad[:2]) or None)
    invariants = hitchin_invariants(C)
    bad = []
    for k, yexp, coeff in invariants.items():
        for b, d in anchors:
            if not d(coeff).is_zero():
                bad.append(f"delta_{b + 1} on e{k}[{yexp}]")
    rep.add("anchor_derivatives_of_invariants", not bad, witness="; ".join(bad[:2]) or None)
    return rep


# -- descent of the invariants ---------------------------------------------------


@dataclass(frozen=True)
class DescentReport:
    """Per-coefficient outcome of Frobenius descent of the invariants."""

    invariants: HitchinInvariants
    entries: tuple  # ((k, yexp, Poly-or-NotDescendable), ...)
    anchor_surjective: bool

    @property
    def all_descend(self) -> bool:
        return all(not isinstance(v, NotDescendable) for _, _, v in self.entries)

    def witnesses(self):
        return [
            (k, yexp, v) for k, yexp, v in self.entries if isinstance(v, NotDescendable)
        ]

    def descended(self):
        """The image invariants, for the entries that descended."""
        return [
            (k, yexp, v) for k, yexp, v in self.entries if not isinstance(v, NotDescendable)
        ]


def descend_invariants(I: HitchinInvariants, A: AlgebroidPresentation) -> DescentReport:
    """Extract p-th roots of every invariant coefficient.

    When the anchor is generically surjective (and the module was flat),
    total success is the theorem; otherwise partial failure is possible
    and every failure carries its offending monomials.  Over a deformation
    ring only the ordinary exponents are tested, matching the Frobenius
    acting trivially on the parameter.
    """
    if I.ring.p <= 2:
        raise ValueError("descent requires p > 2")
    entries = []
    for k, yexp, coeff in I.items():
        root = coeff.pth_root()
        if not isinstance(root, NotDescendable):
            if root.frobenius() != coeff:
                raise AssertionError("descended coefficient does not pull back")
        entries.append((k, yexp, root))
    surjective, _ = anchor_generic_surjectivity(A)
    return DescentReport(I, tuple(entries), surjective)
