"""Modules over an enveloping algebra, presented by connection matrices.

A module structure on a free module E of rank r is given by one r x r
polynomial matrix per algebroid generator:

    nabla_{e_a}(s) = delta_a(s) + A_a . s

with the anchor derivation applied entrywise.  The induced action of an
arbitrary enveloping-algebra element is a matrix whose entries are
crystalline differential operators over the same ring (a Weyl-type
algebra); :class:`MatrixDiffOp` realizes those endomorphism-valued
operators with exact normal-form entries.

The coefficient action of the Weyl algebra on polynomials has a kernel:
any monomial containing a p-th power of a coordinate derivation acts as
zero (the p-th coefficient-wise derivative vanishes identically), and
monomials with all exponents below p act faithfully.  Reducing modulo that
kernel (:meth:`MatrixDiffOp.reduce_action`) therefore gives a normal form
for the endomorphism an operator induces, and the p-curvature's order-0
property becomes a syntactic assertion on it.

The p-curvature of a flat module is

    psi_a = (nabla_{e_a})^p - nabla_{e_a^[p]}

one pure matrix per generator; the validators check that the psi_a are
O_X-linear, p-linear in the generator direction, pairwise commuting, and
commute with the module action.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import operators as ops
from .algebroid import AlgebroidPresentation, PStructureShift, tangent_algebroid
from .poly import Derivation, Poly, PolyRing
from .report import ValidationReport

# -- small exact matrix helpers (entries are Poly) ---------------------------


def identity_matrix(ring: PolyRing, r: int):
    return tuple(
        tuple(ring.one() if i == j else ring.zero() for j in range(r)) for i in range(r)
    )


def zero_matrix(ring: PolyRing, r: int):
    return tuple(tuple(ring.zero() for _ in range(r)) for _ in range(r))


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(f: Poly, a):
    return tuple(tuple(f * x for x in row) for row in a)


def mat_mul(a, b):
    r, mid, c = len(a), len(b), len(b[0])
    out = []
    for i in range(r):
        row = []
        for j in range(c):
            total = a[i][0] * b[0][j]
            for k in range(1, mid):
                total = total + a[i][k] * b[k][j]
            row.append(total)
        out.append(tuple(row))
    return tuple(out)


def mat_pow(a, k: int, ring: PolyRing):
    result = identity_matrix(ring, len(a))
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        if k > 1:
            base = mat_mul(base, base)
        k >>= 1
    return result


def mat_commutator(a, b):
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def mat_trace(a):
    total = a[0][0]
    for i in range(1, len(a)):
        total = total + a[i][i]
    return total


def mat_derive(d: Derivation, a):
    return tuple(tuple(d(x) for x in row) for row in a)


def mat_is_zero(a) -> bool:
    return all(x.is_zero() for row in a for x in row)


def mat_str(a) -> str:
    return "[" + "; ".join(", ".join(str(x) for x in row) for row in a) + "]"


# -- matrix differential operators -------------------------------------------


class MatrixDiffOp:
    """A square matrix of Weyl-algebra elements, acting on polynomial
    vectors with the derivations applied coefficient-wise."""

    __slots__ = ("weyl", "entries")

    def __init__(self, weyl: AlgebroidPresentation, entries):
        self.weyl = weyl
        self.entries = tuple(tuple(row) for row in entries)

    @property
    def rank(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, weyl, r):
        one = ops.one(weyl)
        z = ops.zero(weyl)
        return cls(weyl, [[one if i == j else z for j in range(r)] for i in range(r)])

    @classmethod
    def from_matrix(cls, weyl, matrix):
        return cls(weyl, [[ops.from_poly(weyl, f) for f in row] for row in matrix])

    def __eq__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        return self.weyl == other.weyl and self.entries == other.entries

    def __add__(self, other):
        return MatrixDiffOp(
            self.weyl,
            [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __sub__(self, other):
        return MatrixDiffOp(
            self.weyl,
            [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __mul__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        r = self.rank
        out = []
        for i in range(r):
            row = []
            for j in range(r):
                total = ops.zero(self.weyl)
                for k in range(r):
                    total = total + self.entries[i][k] * other.entries[k][j]
                row.append(total)
            out.append(row)
        return MatrixDiffOp(self.weyl, out)

    def __pow__(self, k: int):
        result = MatrixDiffOp.identity(self.weyl, self.rank)
        base = self
        while k:
            if k & 1:
                result = result * base
            if k > 1:
                base = base * base
            k >>= 1
        return result

    def scale(self, f: Poly):
        return MatrixDiffOp(self.weyl, [[x.scale(f) for x in row] for row in self.entries])

    def commutator(self, other):
        return self * other - other * self

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.entries for x in row)

    def order(self) -> int:
        """Largest filtration degree among the entries; -1 if zero."""
        return max((x.degree() for row in self.entries for x in row), default=-1)

    def reduce_action(self) -> "MatrixDiffOp":
        """Drop the terms that act as zero on polynomial vectors: monomials
        in which some coordinate derivation appears with exponent >= p."""
        p = self.weyl.p
        out = []
        for row in self.entries:
            new_row = []
            for x in row:
                terms = {b: f for b, f in x.terms.items() if all(k < p for k in b)}
                new_row.append(ops.OperatorElement(self.weyl, terms))
            out.append(new_row)
        return MatrixDiffOp(self.weyl, out)

    def as_matrix(self):
        """The entries as plain polynomials; requires order at most 0."""
        if self.order() > 0:
            raise ValueError(f"operator has order {self.order()} > 0")
        return tuple(tuple(x.function_part() for x in row) for row in self.entries)

    def apply(self, section):
        """Act on a polynomial vector (coefficient-wise derivations)."""
        coords = self.weyl.ring.coordinate_indices()
        out = []
        for row in self.entries:
            total = self.weyl.ring.zero()
            for x, s in zip(row, section):
                for beta, f in x.terms.items():
                    value = s
                    for a, k in enumerate(beta):
                        for _ in range(k):
                            value = value.derive(coords[a])
                    total = total + f * value
            out.append(total)
        return tuple(out)

    def __str__(self):
        return "[" + "; ".join(", ".join(str(x) for x in row) for row in self.entries) + "]"


# -- connection modules -------------------------------------------------------


@dataclass(frozen=True)
class ConnectionModule:
    """A free rank-r module with a connection matrix per generator."""

    algebroid: AlgebroidPresentation
    rank: int
    matrices: tuple  # matrices[a] = r x r Poly matrix

    def __post_init__(self):
        matrices = tuple(tuple(tuple(row) for row in m) for m in self.matrices)
        object.__setattr__(self, "matrices", matrices)
        if len(matrices) != self.algebroid.rank:
            raise ValueError("one connection matrix per generator required")
        r = self.rank
        for m in matrices:
            if len(m) != r or any(len(row) != r for row in m):
                raise ValueError("connection matrices must be rank x rank")
            for row in m:
                for c in row:
                    if c.ring != self.algebroid.ring:
                        raise ValueError("matrix entry from a different ring")

    @property
    def ring(self) -> PolyRing:
        return self.algebroid.ring

    def weyl(self) -> AlgebroidPresentation:
        """The Weyl-type algebra acting on the trivialized module."""
        return tangent_algebroid(self.ring)

    def anchor_op(self, derivation: Derivation) -> ops.OperatorElement:
        """Embed a derivation as a degree-1 Weyl-algebra element."""
        weyl = self.weyl()
        coords = self.ring.coordinate_indices()
        ri = self.ring.rees_index
        if ri is not None and not derivation.components[ri].is_zero():
            raise ValueError("derivation acts on the deformation variable")
        coeffs = tuple(derivation.components[j] for j in coords)
        return ops.from_h_element(weyl, coeffs)

    def generator_action(self, a: int) -> MatrixDiffOp:
        """nabla_{e_a} = delta_a + A_a as a matrix operator."""
        weyl = self.weyl()
        d_op = self.anchor_op(self.algebroid.anchor[a])
        base = MatrixDiffOp.from_matrix(weyl, self.matrices[a])
        diag = MatrixDiffOp(
            weyl,
            [
                [d_op if i == j else ops.zero(weyl) for j in range(self.rank)]
                for i in range(self.rank)
            ],
        )
        return diag + base


def nabla_of(M: ConnectionModule, f: Poly, coeffs) -> MatrixDiffOp:
    """The action of the degree-(at most)-1 element f + sum g_a e_a."""
    weyl = M.weyl()
    out = MatrixDiffOp.from_matrix(weyl, mat_scale(f, identity_matrix(M.ring, M.rank)))
    for a, g in enumerate(coeffs):
        if not g.is_zero():
            out = out + M.generator_action(a).scale(g)
    return out


def represent_lambda1(M: ConnectionModule, op: ops.OperatorElement) -> MatrixDiffOp:
    f, coeffs = op.lambda1_parts()
    return nabla_of(M, f, coeffs)


def represent_operator(M: ConnectionModule, op: ops.OperatorElement) -> MatrixDiffOp:
    """The action of an arbitrary enveloping-algebra element, sending each
    normal-form word to the corresponding product of generator actions."""
    weyl = M.weyl()
    actions = [M.generator_action(a) for a in range(M.algebroid.rank)]
    out = MatrixDiffOp(weyl, [[ops.zero(weyl)] * M.rank for _ in range(M.rank)])
    for beta, f in op.terms.items():
        word = MatrixDiffOp.identity(weyl, M.rank)
        for a, k in enumerate(beta):
            for _ in range(k):
                word = word * actions[a]
        out = out + word.scale(f)
    return out


def validate_flatness(M: ConnectionModule) -> ValidationReport:
    """[nabla_{e_a}, nabla_{e_b}] = nabla_{[e_a, e_b]} for all pairs."""
    rep = ValidationReport(f"flatness of rank-{M.rank} module over {M.algebroid}")
    A = M.algebroid
    actions = [M.generator_action(a) for a in range(A.rank)]
    bad = []
    for a in range(A.rank):
        for b in range(a + 1, A.rank):
            curvature = actions[a].commutator(actions[b]) - nabla_of(
                M, M.ring.zero(), A.bracket[a][b]
            )
            if not curvature.is_zero():
                bad.append(f"(e{a + 1},e{b + 1}): {curvature}")
    rep.add("flatness", not bad, witness="; ".join(bad[:2]) or None, pairs=A.rank * (A.rank - 1) // 2)
    return rep


@dataclass(frozen=True)
class PCurvature:
    """The p-curvature matrices psi_a = (nabla_{e_a})^p - nabla_{e_a^[p]}."""

    module: ConnectionModule
    structure: object  # AlgebroidPresentation or PStructureShift
    psi: tuple  # psi[a] = r x r Poly matrix

    @property
    def algebroid(self) -> AlgebroidPresentation:
        return self.module.algebroid

    @property
    def ring(self) -> PolyRing:
        return self.module.ring


def p_curvature(M: ConnectionModule, structure=None, allow_nonflat=False) -> PCurvature:
    """Compute the p-curvature of a flat module.

    The matrix power (nabla_{e_a})^p is formed exactly in the Weyl-type
    algebra, the action of e_a^[p] is subtracted, and the difference is
    reduced modulo the kernel of the coefficient action.  A nonzero
    higher-order remainder signals a broken p-operation or a non-flat
    input and raises.
    """
    if structure is None:
        structure = M.algebroid
    A = M.algebroid
    if not allow_nonflat and not validate_flatness(M).passed:
        raise ValueError("module is not flat (pass allow_nonflat=True to override)")
    p = A.p
    psi = []
    for a in range(A.rank):
        power = M.generator_action(a) ** p
        if isinstance(structure, PStructureShift):
            target = represent_lambda1(M, structure.shifted_p_op(a))
        else:
            target = nabla_of(M, M.ring.zero(), A.p_op[a])
        difference = (power - target).reduce_action()
        if difference.order() > 0:
            raise ValueError(
                f"p-curvature of e{a + 1} has a differential part of order "
                f"{difference.order()}: {difference}"
            )
        psi.append(difference.as_matrix())
    return PCurvature(M, structure, tuple(psi))


def check_abstract_action_oracle(C: PCurvature) -> ValidationReport:
    """Independent route to the same matrices: form the central element
    e_a^p - e_a^[p] abstractly in the enveloping algebra of the
    presentation, represent it on the module word by word, and compare."""
    rep = ValidationReport("p-curvature against the abstract central element")
    M, A = C.module, C.algebroid
    bad = []
    for a in range(A.rank):
        central = ops.p_curvature_element(C.structure, ops.generator(A, a))
        represented = represent_operator(M, central).reduce_action()
        if represented.order() > 0:
            bad.append(f"e{a + 1}: represented element has positive order")
            continue
        if represented.as_matrix() != C.psi[a]:
            bad.append(
                f"e{a + 1}: {mat_str(represented.as_matrix())} != {mat_str(C.psi[a])}"
            )
    rep.add("abstract_action_oracle", not bad, witness="; ".join(bad[:2]) or None)
    return rep


def check_p_linearity(C: PCurvature, panel) -> ValidationReport:
    """psi(f * e_a), computed from scratch through the twisted scaling rule,
    must equal f^p * psi_a."""
    rep = ValidationReport("p-linearity of the p-curvature")
    M, A = C.module, C.algebroid
    p = A.p
    bad = []
    for f in panel:
        for a in range(A.rank):
            coeffs = A.h_scale(f, A.h_basis(a))
            direction = ops.from_h_element(A, coeffs)
            power = nabla_of(M, M.ring.zero(), coeffs) ** p
            target = represent_lambda1(
                M, ops.p_operation_lambda1(C.structure, direction)
            )
            difference = (power - target).reduce_action()
            if difference.order() > 0:
                bad.append(f"f={f}, e{a + 1}: positive order")
                continue
            if difference.as_matrix() != mat_scale(f**p, C.psi[a]):
                bad.append(f"f={f}, e{a + 1}")
    rep.add("p_linearity", not bad, witness="; ".join(bad[:2]) or None, panel=len(panel))
    return rep


def check_higgs_commutativity(C: PCurvature) -> ValidationReport:
    """The p-curvature matrices commute pairwise."""
    rep = ValidationReport("commutativity of the p-curvature matrices")
    bad = []
    m = C.algebroid.rank
    for a in range(m):
        for b in range(a + 1, m):
            if not mat_is_zero(mat_commutator(C.psi[a], C.psi[b])):
                bad.append(f"[psi_{a + 1}, psi_{b + 1}]")
    rep.add("pairwise_commuting", not bad, witness="; ".join(bad) or None, pairs=m * (m - 1) // 2)
    return rep


def check_flat_commutation(C: PCurvature) -> ValidationReport:
    """Each psi_a commutes with the full module action: as operators,
    [psi_a, nabla_{e_b}] = 0, which in matrix form reads

        [psi_a, A_b] = delta_b . psi_a

    with the anchor applied entrywise on the right-hand side."""
    rep = ValidationReport("commutation of the p-curvature with the module action")
    M, A = C.module, C.algebroid
    weyl = M.weyl()
    bad_op, bad_matrix = [], []
    for a in range(A.rank):
        psi_op = MatrixDiffOp.from_matrix(weyl, C.psi[a])
        for b in range(A.rank):
            if not psi_op.commutator(M.generator_action(b)).is_zero():
                bad_op.append(f"[psi_{a + 1}, nabla_{b + 1}]")
            lhs = mat_commutator(C.psi[a], M.matrices[b])
            rhs = mat_derive(A.anchor[b], C.psi[a])
            if lhs != rhs:
                bad_matrix.append(f"(a={a + 1}, b={b + 1})")
    rep.add("commutes_with_module_action", not bad_op, witness="; ".join(bad_op[:2]) or None)
    rep.add("matrix_commutation_identity", not bad_matrix, witness="; ".join(bad_matrix[:2]) or None)
    return rep
