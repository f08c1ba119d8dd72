"""
Exact polynomials over a prime field
====================================

Arithmetic, derivations, and the Frobenius map on F_p[x, y].
"""

from pcurv.poly import Derivation, NotDescendable, PolyRing, PrimeField, parse_poly

# A polynomial ring over F_3 with two coordinates.
R = PolyRing(PrimeField(3), ("x", "y"))

# Parsing reduces coefficients mod p; rendering uses the same grammar.
f = parse_poly("x^2 + 4", R)
print("x^2 + 4 over F_3      :", f)

g = parse_poly("2*x*y - y", R)
print("2*x*y - y over F_3    :", g)

# In characteristic 3 the third power is the Frobenius: cross terms vanish.
print("(x + y)^3             :", parse_poly("x + y", R) ** 3)
print("frobenius(x + y)      :", parse_poly("x + y", R).frobenius())

# Derivations act by the Leibniz rule and are determined by their values
# on the coordinates.  The p-th power of a derivation is a derivation again.
euler = Derivation(R, (R.variable("x"), R.zero()))
print("euler(x^2)            :", euler(parse_poly("x^2", R)))
print("euler^3 components    :", [str(c) for c in euler.pth_power().components])

# p-th roots exist exactly when every exponent is divisible by p; the
# failure is a value carrying the offending monomials, not an exception.
print("root of x^6 + 2       :", parse_poly("x^6 + 2", R).pth_root())
bad = parse_poly("x^3 - x^2", R).pth_root()
assert isinstance(bad, NotDescendable)
print("root of x^3 - x^2     :", bad)
