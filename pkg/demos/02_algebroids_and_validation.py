"""
Restricted Lie algebroids from structure constants
==================================================

The tangent and Higgs families, the axiom validators, and what a broken
p-operation looks like in a report.
"""

from pcurv.algebroid import (
    AlgebroidPresentation,
    anchor_generic_surjectivity,
    higgs_algebroid,
    tangent_algebroid,
    validate_algebroid,
    validate_p_structure,
)
from pcurv.poly import PolyRing, PrimeField

R = PolyRing(PrimeField(3), ("x", "y"))

# Coordinate vector fields: identity anchor, p-th powers as the p-operation.
T = tangent_algebroid(R)
print(T)
print(validate_algebroid(T).render_text())
print(validate_p_structure(T).render_text())

# The anchor hits every direction, with the unit matrix as witness minor.
flag, minor = anchor_generic_surjectivity(T)
print("anchor generically surjective:", flag, "| witness minor:", minor)

# A Higgs algebroid: zero bracket and anchor, any p-linear p-operation.
line = PolyRing(PrimeField(3), ("x",))
H = higgs_algebroid(line, 1, [[line.variable("x")]])
print()
print(H)
print(validate_p_structure(H).render_text())
print("anchor generically surjective:", anchor_generic_surjectivity(H)[0])

# Corrupt the tangent line by declaring e^[3] = e.  The p-th power of the
# coordinate field is zero, so the anchor compatibility check fires.
print()
T1 = tangent_algebroid(line)
bad = AlgebroidPresentation(line, 1, T1.bracket, T1.anchor, ((line.one(),),))
print(validate_p_structure(bad).render_text())
