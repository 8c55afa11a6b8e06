"""Hall algebra core: counting products over either backend.

The product of basis classes [A] and [C] has [B]-coefficient
|Ext^1(A, C)_B| / |Hom(A, C)|, where Ext^1(A, C)_B counts extension classes
of conflations C >-> B' ->> A with B' isomorphic to B.  Coefficients live
in Q (plain product) or in Q adjoined a square root v of q (twisted
product, which scales each pairwise product by v^{e(A, C)} with e the
Euler exponent of the pair).

Backends present a uniform interface over the two object kinds:
representations of an acyclic quiver, and complexes of projectives.  Both
count with plain Hom cardinalities and classify objects up to (strict)
isomorphism; structure constants are cached by content, keyed on canonical
object encodings, so cached and fresh runs produce identical output.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

import numpy as np

from .config import Caps, DEFAULT_CAPS
from .errors import EulerUndefined, SpecError
from . import complexes as cx
from .linalg import Field, Matrix
from .quiver import (
    Quiver,
    Registry,
    Rep,
    euler_exponent,
    ext1_space,
    hom_dim,
    iso_test,
    middle_term,
    rep_registry,
)


class SqrtExt:
    """Element a + b v of Q(v), v^2 = q: exact scalars for twisted products."""

    __slots__ = ("q", "a", "b")

    def __init__(self, q: int, a, b=0):
        self.q = int(q)
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def v(cls, q: int) -> "SqrtExt":
        return cls(q, 0, 1)

    @classmethod
    def v_power(cls, q: int, e: int) -> "SqrtExt":
        """v^e for any integer e (v^-1 = v/q)."""
        if e % 2 == 0:
            return cls(q, Fraction(q) ** (e // 2), 0)
        return cls(q, 0, Fraction(q) ** ((e - 1) // 2))

    def _coerce(self, other) -> "SqrtExt":
        if isinstance(other, SqrtExt):
            if other.q != self.q:
                raise ValueError("mixing square roots of different primes")
            return other
        return SqrtExt(self.q, other)

    def __add__(self, other):
        o = self._coerce(other)
        return SqrtExt(self.q, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return SqrtExt(self.q, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return SqrtExt(self.q, -self.a, -self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        return SqrtExt(
            self.q,
            self.a * o.a + self.b * o.b * self.q,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def inverse(self) -> "SqrtExt":
        d = self.a * self.a - self.b * self.b * self.q
        if d == 0:
            if self.a == 0 and self.b == 0:
                raise ZeroDivisionError("inverse of zero")
            raise ZeroDivisionError("norm vanished; q is not a rational square")
        return SqrtExt(self.q, self.a / d, -self.b / d)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = SqrtExt(self.q, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __eq__(self, other):
        if isinstance(other, SqrtExt):
            return (self.q, self.a, self.b) == (other.q, other.a, other.b)
        return self.b == 0 and self.a == other

    def __hash__(self):
        return hash((self.q, self.a, self.b))

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        return f"{self.a}+{self.b}v"


# ---- backends ----


class RepBackend:
    """Quiver representations up to isomorphism."""

    kind = "reps"

    def __init__(self, quiver: Quiver, field: Field, caps: Caps = DEFAULT_CAPS):
        self.quiver = quiver
        self.field = field
        self.caps = caps
        self.registry = rep_registry(caps)

    def signature(self) -> tuple:
        return ("reps", self.quiver.n, self.quiver.arrows, self.field.p)

    def classify(self, obj: Rep) -> int:
        return self.registry.classify(obj)

    def object(self, i: int) -> Rep:
        return self.registry.object(i)

    def encode(self, obj: Rep) -> tuple:
        return obj.encoding()

    def decode(self, enc) -> Rep:
        dims, maps = enc
        mats = []
        for (t, h), rows in zip(self.quiver.arrows, maps):
            r, c = dims[h - 1], dims[t - 1]
            mats.append(
                Matrix(
                    self.field,
                    np.array([list(row) for row in rows], dtype=np.int64).reshape(r, c)
                    if r * c
                    else np.zeros((r, c), dtype=np.int64),
                )
            )
        return Rep(self.quiver, self.field, dims, mats)

    def zero_id(self) -> int:
        return self.classify(Rep.zero(self.quiver, self.field))

    def hom_card(self, a: Rep, c: Rep) -> int:
        return self.field.p ** hom_dim(a, c)

    def raw_ext_data(self, a: Rep, c: Rep):
        """(hom cardinality, [(middle encoding, class count)])."""
        ext = ext1_space(a, c, self.caps)
        counts: dict[tuple, int] = {}
        for f in ext.reps:
            enc = middle_term(a, c, f).encoding()
            counts[enc] = counts.get(enc, 0) + 1
        # group by iso class but keep encodings: pick one witness per class
        reg = Registry(lambda x, y: iso_test(x, y, self.caps), lambda r: r.dims)
        grouped: dict[int, int] = {}
        witness: dict[int, tuple] = {}
        for enc, n in sorted(counts.items()):
            obj = self.decode(enc)
            i = reg.classify(obj)
            grouped[i] = grouped.get(i, 0) + n
            witness.setdefault(i, enc)
        return self.hom_card(a, c), [
            (witness[i], grouped[i]) for i in sorted(witness)
        ]

    def euler_exp(self, a: Rep, c: Rep) -> int:
        return euler_exponent(self.quiver, a.dims, c.dims)


class CxBackend:
    """Complexes of projectives up to (strict) isomorphism: the exact
    category whose conflations are the degreewise-split short exact
    sequences."""

    kind = "complexes"

    def __init__(self, cat: cx.ComplexCategory, caps: Caps = DEFAULT_CAPS):
        self.cat = cat
        self.quiver = cat.quiver
        self.field = cat.field
        self.caps = caps
        self.registry = cx.cx_registry(cat, caps)

    def signature(self) -> tuple:
        return self.cat.signature()

    def classify(self, obj: cx.Complex) -> int:
        return self.registry.classify(obj)

    def object(self, i: int) -> cx.Complex:
        return self.registry.object(i)

    def encode(self, obj: cx.Complex) -> tuple:
        return obj.encoding()

    def decode(self, enc) -> cx.Complex:
        comps_part, diffs_part = enc
        comps = {n: tuple(m) for n, m in comps_part}
        diffs = {}
        for n, vmats in diffs_part:
            src = self.cat.rep_of(comps[n])
            tgt = self.cat.rep_of(comps[self.cat.next_deg(n)])
            mats = []
            for v, rows in enumerate(vmats):
                r, c = tgt.dims[v], src.dims[v]
                mats.append(
                    Matrix(
                        self.field,
                        np.array([list(x) for x in rows], dtype=np.int64).reshape(r, c)
                        if r * c
                        else np.zeros((r, c), dtype=np.int64),
                    )
                )
            diffs[n] = tuple(mats)
        return cx.Complex(self.cat, comps, diffs, validate=False)

    def zero_id(self) -> int:
        return self.classify(self.cat.zero_complex())

    def hom_card(self, a: cx.Complex, c: cx.Complex) -> int:
        return cx.hom_card(a, c)

    def raw_ext_data(self, a: cx.Complex, c: cx.Complex):
        ext = cx.ext1_classes(a, c, self.caps)
        counts: dict[tuple, int] = {}
        for f in ext.reps:
            enc = cx.middle_term_cx(a, c, f).encoding()
            counts[enc] = counts.get(enc, 0) + 1
        reg = cx.cx_registry(self.cat, self.caps)
        grouped: dict[int, int] = {}
        witness: dict[int, tuple] = {}
        for enc, n in sorted(counts.items()):
            obj = self.decode(enc)
            i = reg.classify(obj)
            grouped[i] = grouped.get(i, 0) + n
            witness.setdefault(i, enc)
        return self.hom_card(a, c), [
            (witness[i], grouped[i]) for i in sorted(witness)
        ]

    def euler_exp(self, a: cx.Complex, c: cx.Complex) -> int:
        return cx.euler_exponent_cx(a, c)  # raises EulerUndefined when periodic


# ---- content-addressed structure-constant cache ----


def _enc_to_json(enc):
    """Nested tuples -> nested lists (canonical JSON form)."""
    if isinstance(enc, tuple):
        return [_enc_to_json(x) for x in enc]
    return enc


def _json_to_enc(obj):
    if isinstance(obj, list):
        return tuple(_json_to_enc(x) for x in obj)
    return obj


def pair_key(signature: tuple, enc_a, enc_c) -> str:
    blob = json.dumps(
        [_enc_to_json(signature), _enc_to_json(enc_a), _enc_to_json(enc_c)],
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode()).hexdigest()


class MemoryCache:
    """Dict-backed structure cache; files.py provides the persistent one."""

    def __init__(self):
        self.data: dict[str, dict] = {}
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> dict | None:
        rec = self.data.get(key)
        if rec is None:
            self.misses += 1
        else:
            self.hits += 1
        return rec

    def put(self, key: str, record: dict) -> None:
        self.data[key] = record


class HallAlgebra:
    """Hall products over a backend, with content-keyed memoization.

    Elements are plain dicts {class id: coefficient}; coefficients are
    Fractions (plain product) or SqrtExt scalars (twisted product).
    """

    def __init__(self, backend, cache=None):
        self.backend = backend
        self.cache = cache if cache is not None else MemoryCache()
        self.q = backend.field.p

    # -- elements --

    def basis(self, obj) -> dict:
        return {self.backend.classify(obj): Fraction(1)}

    def add(self, x: dict, y: dict) -> dict:
        out = dict(x)
        for k, v in y.items():
            s = out.get(k, 0) + v
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return out

    def scale(self, c, x: dict) -> dict:
        if c == 0:
            return {}
        return {k: c * v for k, v in x.items()}

    def equal(self, x: dict, y: dict) -> bool:
        keys = set(x) | set(y)
        for k in keys:
            if x.get(k, 0) != y.get(k, 0):
                return False
        return True

    # -- structure constants --

    def ext_data(self, a_id: int, c_id: int):
        """(hom cardinality, [(middle id, class count)]), cache-backed."""
        a = self.backend.object(a_id)
        c = self.backend.object(c_id)
        key = pair_key(self.backend.signature(), self.backend.encode(a), self.backend.encode(c))
        rec = self.cache.get(key)
        if rec is None:
            hom, middles = self.backend.raw_ext_data(a, c)
            rec = {
                "hom": hom,
                "middles": [[_enc_to_json(enc), n] for enc, n in middles],
            }
            self.cache.put(key, rec)
        out = []
        for enc_json, n in rec["middles"]:
            enc = _json_to_enc(enc_json)
            b_id = self.backend.classify(self.backend.decode(enc))
            out.append((b_id, n))
        return rec["hom"], out

    # -- products --

    def product(self, x: dict, y: dict) -> dict:
        """Plain counting product, coefficients in Q."""
        out: dict[int, Fraction] = {}
        for a_id, ca in sorted(x.items()):
            for c_id, cc in sorted(y.items()):
                hom, middles = self.ext_data(a_id, c_id)
                for b_id, n in middles:
                    coeff = ca * cc * Fraction(n, hom)
                    s = out.get(b_id, Fraction(0)) + coeff
                    if s == 0:
                        out.pop(b_id, None)
                    else:
                        out[b_id] = s
        return out

    def twisted_product(self, x: dict, y: dict) -> dict:
        """Euler-twisted product: pairwise scaled by v^{e(A, C)}, v^2 = q."""
        out: dict[int, SqrtExt] = {}
        for a_id, ca in sorted(x.items()):
            for c_id, cc in sorted(y.items()):
                a = self.backend.object(a_id)
                c = self.backend.object(c_id)
                tw = SqrtExt.v_power(self.q, self.backend.euler_exp(a, c))
                hom, middles = self.ext_data(a_id, c_id)
                for b_id, n in middles:
                    coeff = (
                        SqrtExt(self.q, ca) if not isinstance(ca, SqrtExt) else ca
                    ) * (
                        SqrtExt(self.q, cc) if not isinstance(cc, SqrtExt) else cc
                    ) * tw * SqrtExt(self.q, Fraction(n, hom))
                    s = out.get(b_id, SqrtExt(self.q, 0)) + coeff
                    if s.is_zero():
                        out.pop(b_id, None)
                    else:
                        out[b_id] = s
        return out


def verify_associativity(
    algebra: HallAlgebra,
    ids: list[int],
    twisted: bool = False,
    jobs: int | None = None,
) -> list[dict]:
    """Check ([a][b])[c] = [a]([b][c]) over all triples from `ids`.

    Structure constants for every needed pair are computed first, in
    deterministic order (so class ids never depend on the check schedule);
    the triple comparisons are then pure arithmetic and safe to fan out.
    Returns one record per failing triple.
    """
    prod = algebra.twisted_product if twisted else algebra.product
    one = (lambda i: {i: SqrtExt(algebra.q, 1)}) if twisted else (lambda i: {i: Fraction(1)})
    # deterministic closure: first all products of listed pairs, then the
    # pairs those products introduce
    firsts: dict[tuple[int, int], dict] = {}
    for a in ids:
        for b in ids:
            firsts[(a, b)] = prod(one(a), one(b))
    for a in ids:
        for b in ids:
            ab = firsts[(a, b)]
            for c in ids:
                bc = firsts[(b, c)]
                for mid in sorted(ab):
                    algebra.ext_data(mid, c)
                for mid in sorted(bc):
                    algebra.ext_data(a, mid)
    failures = []

    def check(a, b, c):
        left = prod(firsts[(a, b)], one(c))
        right = prod(one(a), firsts[(b, c)])
        if not algebra.equal(left, right):
            return {"triple": [a, b, c], "left": left, "right": right}
        return None

    triples = [(a, b, c) for a in ids for b in ids for c in ids]
    if jobs and jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            for res in ex.map(lambda t: check(*t), triples):
                if res is not None:
                    failures.append(res)
    else:
        for t in triples:
            res = check(*t)
            if res is not None:
                failures.append(res)
    return failures
