"""
Quantum-torus commutators in the semi-derived algebra
=====================================================

Over a 2-periodic complex category the localized Hall algebra is a free
module over a quantum torus of contractible classes. The commutator of
two stalk classes lands entirely in the torus part: each order of
multiplication produces the same stable class but a different
contractible twist, and the difference survives with coefficient q - 1.
"""

from hallforge.linalg import Field
from hallforge.quiver import Quiver
from hallforge.complexes import ComplexCategory
from hallforge.sdh import SDH

q = 2
cat = ComplexCategory(Quiver(1, []), Field(q), "periodic", period=2)
A = SDH(cat)

# stalks of the projective in the two residue degrees
x = A.normalize(cat.stalk(1, 0))
y = A.normalize(cat.stalk(1, 1))


def show(label, elem):
    parts = []
    for (gamma, m_id), coeff in sorted(elem.items()):
        named = A.torus.named(gamma)
        t = "*".join(f"t[{k}]^{e}" for k, e in sorted(named.items())) or "1"
        parts.append(f"{coeff} * {t} * [{m_id}]")
    print(f"{label} = " + (" + ".join(parts) if parts else "0"))


show("x", x)
show("y", y)

xy = A.product(x, y)
yx = A.product(y, x)
show("x*y", xy)
show("y*x", yx)

# commutator: both products share the class of the direct sum, the
# leftover is (q-1) times a difference of torus generators
comm = A.add(xy, A.scale(-1, yx))
show("x*y - y*x", comm)

coeffs = sorted(c for c in comm.values())
assert coeffs == [1 - q, q - 1]

# torus elements are invertible: a contractible class normalizes to a unit
u = A.normalize(cat.contractible_gen(1, 0))
show("\nunit from a contractible", u)
gamma = next(iter(u))[0]
inv = A.torus_inverse(gamma)
show("its inverse", inv)
show("product", A.product(u, inv))
assert A.equal(A.product(u, inv), A.basis(A.torus.zero(), A.zero_class))
