"""hallforge: exact Hall algebra computations over finite fields.

Layers, bottom up:

- linalg: dense exact linear algebra over F_p.
- quiver: quiver representations; Hom, Ext^1, Krull-Schmidt, enumeration.
- complexes: Frobenius categories of complexes of projectives (bounded or
  Z/m-periodic), stable homs, extension classes, contractible handling.
- hall: Ringel-Hall algebra of a finitary exact category, Euler twists,
  structure-constant tables with a persistent cache.
- sdh: quantum torus, semi-derived Hall algebra (localization at the
  contractibles), derived Hall algebra of the stable category, and the
  comparison between the two.
- files/suites/cli: JSON formats, verification suites, and the `hallforge`
  command line tool.

All coefficients are exact rationals (or rationals extended by v with
v**2 = q); there is no floating point anywhere in the computational path.
"""

__version__ = "0.1.0"
