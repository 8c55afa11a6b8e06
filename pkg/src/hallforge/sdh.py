"""Localized Hall module over the torus of contractible classes.

Every object of a complex category splits as K ⊕ m with K contractible and
m minimal, and the classes of contractible complexes form a quantum torus
under the Hall product (they pair trivially in ext).  Inverting those
classes turns the Hall algebra into a free module with basis
t_gamma ⋄ [m], gamma an integer exponent vector over the contractible
generators and m a minimal complex.  This module implements that basis,
the rewriting of arbitrary classes onto it, the localized product, the
relative Euler pairing and the product it twists, the corrected product on
stable classes with negative-ext factors, and verification routines for
freeness and for the tensor-factorization comparison.

Elements are dicts mapping (gamma, stable_id) -> Fraction.
"""

from fractions import Fraction

from . import complexes as cx
from .complexes import Complex, ComplexCategory, contractible_generators
from .config import DEFAULT_CAPS, Caps
from .errors import (
    DerivedUndefined,
    RelEulerUndefined,
    SpecError,
    WindowOverflow,
)
from .hall import CxBackend, HallAlgebra


def _q_power(q: int, e: int) -> Fraction:
    if e >= 0:
        return Fraction(q**e)
    return Fraction(1, q ** (-e))


class QuantumTorus:
    """Multiplicative group ring of contractible classes.

    t_gamma ⋄ t_delta = pairing(gamma, delta)^-1 t_{gamma+delta}, where the
    pairing is the hom cardinality extended biadditively to exponents.
    """

    def __init__(self, cat: ComplexCategory, caps: Caps = DEFAULT_CAPS):
        self.cat = cat
        self.q = cat.field.p
        self.gens = contractible_generators(cat)
        self.keys = list(self.gens)
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.rank = len(self.keys)
        # pairing_exp[g][h] = log_q |Hom(K_g, K_h)|
        self.pairing_exp = [
            [cx.hom_dim_cx(self.gens[g], self.gens[h]) for h in self.keys]
            for g in self.keys
        ]

    def zero(self) -> tuple:
        return (0,) * self.rank

    def vector(self, exps: dict) -> tuple:
        """Exponent tuple from a {generator key: multiplicity} dict."""
        out = [0] * self.rank
        for k, m in exps.items():
            out[self.index[k]] = m
        return tuple(out)

    def named(self, gamma: tuple) -> dict:
        return {k: g for k, g in zip(self.keys, gamma) if g}

    def add(self, a: tuple, b: tuple) -> tuple:
        return tuple(x + y for x, y in zip(a, b))

    def neg(self, a: tuple) -> tuple:
        return tuple(-x for x in a)

    def pairing_exponent(self, gamma: tuple, delta: tuple) -> int:
        e = 0
        for g, cg in enumerate(gamma):
            if not cg:
                continue
            row = self.pairing_exp[g]
            for h, ch in enumerate(delta):
                if ch:
                    e += cg * ch * row[h]
        return e

    def pairing(self, gamma: tuple, delta: tuple) -> Fraction:
        return _q_power(self.q, self.pairing_exponent(gamma, delta))


class SDH:
    """Free torus-module with basis t_gamma ⋄ [m], m minimal."""

    def __init__(self, cat: ComplexCategory, caps: Caps = DEFAULT_CAPS, cache=None):
        self.cat = cat
        self.caps = caps
        self.q = cat.field.p
        self.torus = QuantumTorus(cat, caps)
        self.strict = HallAlgebra(CxBackend(cat, caps), cache=cache)
        self.stable = cx.stable_registry(cat, caps)
        self.zero_class = self.stable.classify(cat.zero_complex())
        self._hom_from_gen: dict = {}
        self._hom_to_gen: dict = {}
        self._rel_ids: dict = {}

    # -- hom bookkeeping --

    def _gen_hom_dims(self, m_id: int) -> list:
        """log_q |Hom(K_g, m)| per generator."""
        dims = self._hom_from_gen.get(m_id)
        if dims is None:
            m = self.stable.object(m_id)
            dims = [cx.hom_dim_cx(self.torus.gens[k], m) for k in self.torus.keys]
            self._hom_from_gen[m_id] = dims
        return dims

    def _gen_hom_dims_rev(self, m_id: int) -> list:
        """log_q |Hom(m, K_g)| per generator."""
        dims = self._hom_to_gen.get(m_id)
        if dims is None:
            m = self.stable.object(m_id)
            dims = [cx.hom_dim_cx(m, self.torus.gens[k]) for k in self.torus.keys]
            self._hom_to_gen[m_id] = dims
        return dims

    def gen_hom(self, gamma: tuple, m_id: int) -> Fraction:
        """|Hom(K_gamma, m)| extended to integer exponent vectors."""
        dims = self._gen_hom_dims(m_id)
        return _q_power(self.q, sum(g * d for g, d in zip(gamma, dims)))

    def commutation(self, delta: tuple, m_id: int) -> Fraction:
        """Scalar in [m] ⋄ t_delta = commutation(delta, m) t_delta ⋄ [m].

        Equals the ratio |Hom(K_delta, m)| / |Hom(m, K_delta)|.
        """
        fwd = self._gen_hom_dims(m_id)
        rev = self._gen_hom_dims_rev(m_id)
        e = sum(d * (f - r) for d, f, r in zip(delta, fwd, rev))
        return _q_power(self.q, e)

    # -- elements --

    def zero(self) -> dict:
        return {}

    def basis(self, gamma: tuple, m_id: int) -> dict:
        if len(gamma) != self.torus.rank:
            raise SpecError("exponent vector has wrong length")
        return {(tuple(gamma), m_id): Fraction(1)}

    def torus_element(self, gamma: tuple) -> dict:
        return self.basis(gamma, self.zero_class)

    def torus_inverse(self, gamma: tuple) -> dict:
        """Inverse of t_gamma: pairing(gamma, gamma)^-1 t_{-gamma}."""
        inv = 1 / self.torus.pairing(gamma, gamma)
        return {(self.torus.neg(gamma), self.zero_class): inv}

    def normalize(self, x: Complex) -> dict:
        """Rewrite the class of an object onto the basis.

        x = K_gamma ⊕ m gives [x] = |Hom(K_gamma, m)| t_gamma ⋄ [m].
        """
        m, exps = cx.strip_contractibles(x)
        gamma = self.torus.vector(exps)
        m_id = self.stable.classify(m)
        return {(gamma, m_id): self.gen_hom(gamma, m_id)}

    def normalize_element(self, element: dict) -> dict:
        """Rewrite a strict-class element {strict_id: coeff} onto the basis."""
        out: dict = {}
        for sid in sorted(element):
            co = element[sid]
            for key, val in self.normalize(self.strict.backend.object(sid)).items():
                out[key] = out.get(key, Fraction(0)) + co * val
        return _prune(out)

    def stable_class(self, x: Complex) -> int:
        """Stable class id of an object (its minimal part's class)."""
        m, _ = cx.strip_contractibles(x)
        return self.stable.classify(m)

    def realize(self, gamma: tuple, m_id: int) -> Complex:
        """An object whose class is gen_hom(gamma, m) t_gamma ⋄ [m].

        Requires gamma >= 0 componentwise.
        """
        if any(g < 0 for g in gamma):
            raise SpecError("cannot realize negative exponents as an object")
        acc = self.stable.object(m_id)
        for k, g in zip(self.torus.keys, gamma):
            for _ in range(g):
                acc = cx.direct_sum_cx(acc, self.torus.gens[k])
        return acc

    def add(self, x: dict, y: dict) -> dict:
        out = dict(x)
        for k, v in y.items():
            out[k] = out.get(k, Fraction(0)) + v
        return _prune(out)

    def scale(self, c, x: dict) -> dict:
        if c == 0:
            return {}
        return {k: c * v for k, v in x.items()}

    def equal(self, x: dict, y: dict) -> bool:
        return _prune(dict(x)) == _prune(dict(y))

    # -- products --

    def product(self, x: dict, y: dict) -> dict:
        """Localized Hall product on the torus-module basis.

        Torus parts move left through object parts via the commutation
        scalar, object parts multiply in the strict algebra, and every
        resulting class is rewritten onto the basis.
        """
        out: dict = {}
        for (gamma, m_id), c1 in sorted(x.items()):
            m_elem = self.strict.basis(self.stable.object(m_id))
            for (delta, s_id), c2 in sorted(y.items()):
                pref = (
                    c1
                    * c2
                    * self.commutation(delta, m_id)
                    / self.torus.pairing(gamma, delta)
                )
                gd = self.torus.add(gamma, delta)
                s_elem = self.strict.basis(self.stable.object(s_id))
                strict_prod = self.strict.product(m_elem, s_elem)
                for b_id in sorted(strict_prod):
                    coeff = strict_prod[b_id]
                    rewritten = self.normalize(self.strict.backend.object(b_id))
                    ((eps, u_id), homc), = rewritten.items()
                    key = (self.torus.add(gd, eps), u_id)
                    term = pref * coeff * homc / self.torus.pairing(gd, eps)
                    out[key] = out.get(key, Fraction(0)) + term
        return _prune(out)

    # -- relative Euler pairing and the twisted product --

    def rel_euler_exponent(self, a: Complex, b: Complex) -> int:
        """log_q of the relative Euler pairing of two objects.

        |Hom_F| / |stable Hom| times the alternating product of negative
        stable ext cardinalities, truncated past the window width where
        shifted supports are disjoint.
        """
        if self.cat.kind == "periodic":
            raise RelEulerUndefined(
                "relative Euler pairing needs a bounded window"
            )
        e = cx.hom_dim_cx(a, b) - cx.stable_hom_dim(a, b)
        width = self.cat.hi - self.cat.lo
        sign = 1
        for i in range(1, width + 2):
            e += sign * cx.stable_hom_dim(a, cx.shift(b, -i))
            sign = -sign
        return e

    def rel_euler(self, a: Complex, b: Complex) -> Fraction:
        return _q_power(self.q, self.rel_euler_exponent(a, b))

    def _rel_exponent_ids(self, m_id: int, s_id: int) -> int:
        key = (m_id, s_id)
        e = self._rel_ids.get(key)
        if e is None:
            e = self.rel_euler_exponent(
                self.stable.object(m_id), self.stable.object(s_id)
            )
            self._rel_ids[key] = e
        return e

    def _rel_exponent_keys(self, kx: tuple, ky: tuple) -> int:
        """Biadditive extension of the relative Euler exponent to keys."""
        gamma, m_id = kx
        delta, s_id = ky
        e = self._rel_exponent_ids(m_id, s_id)
        fwd_s = self._gen_hom_dims(s_id)
        rev_m = self._gen_hom_dims_rev(m_id)
        e += sum(g * d for g, d in zip(gamma, fwd_s))
        e += sum(d * r for d, r in zip(delta, rev_m))
        e += self.torus.pairing_exponent(gamma, delta)
        return e

    def tw_product(self, x: dict, y: dict) -> dict:
        """Product twisted by the relative Euler pairing.

        Torus elements are central for this product.
        """
        out: dict = {}
        for kx, c1 in sorted(x.items()):
            for ky, c2 in sorted(y.items()):
                tw = _q_power(self.q, self._rel_exponent_keys(kx, ky))
                part = self.product({kx: c1 * tw}, {ky: c2})
                out = self.add(out, part)
        return out

    # -- product on stable classes with negative-ext corrections --

    def _dh_pair(self, a_id: int, c_id: int) -> dict:
        if self.cat.kind == "periodic":
            raise DerivedUndefined(
                "stable-class product needs a bounded window"
            )
        a = self.stable.object(a_id)
        c = self.stable.object(c_id)
        counts: dict = {}
        ext = cx.ext1_classes(a, c, self.caps)
        for f in ext.reps:
            mid = cx.middle_term_cx(a, c, f)
            m, _ = cx.strip_contractibles(mid)
            u = self.stable.classify(m)
            counts[u] = counts.get(u, 0) + 1
        denom = Fraction(cx.stable_hom_card(a, c))
        corr = Fraction(1)
        width = self.cat.hi - self.cat.lo
        sign = 1
        for i in range(1, width + 2):
            card = cx.stable_hom_card(a, cx.shift(c, -i))
            corr = corr * card if sign > 0 else corr / card
            sign = -sign
        return {u: Fraction(counts[u]) * corr / denom for u in sorted(counts)}

    def dh_product(self, x: dict, y: dict) -> dict:
        """Product of {stable_id: coeff} elements: extension classes with
        middles classified stably, stable hom cardinalities, and the
        alternating negative-ext correction.  Bounded windows only."""
        out: dict = {}
        for a_id in sorted(x):
            for c_id in sorted(y):
                pair = self._dh_pair(a_id, c_id)
                co = x[a_id] * y[c_id]
                for u, v in pair.items():
                    out[u] = out.get(u, Fraction(0)) + co * v
        return {k: v for k, v in sorted(out.items()) if v != 0}

    def dh_basis(self, x: Complex) -> dict:
        return {self.stable_class(x): Fraction(1)}

    # -- shift pushforward --

    def pushforward_shift(self, x: dict, k: int = 1) -> dict:
        """Image of an element under the shift functor.

        Generators move by K_{P_i @ n}[k] = K_{P_i @ n-k}; minimal parts are
        shifted and reclassified.  Raises WindowOverflow when the image
        leaves a bounded window.
        """
        out: dict = {}
        for (gamma, m_id), co in sorted(x.items()):
            named = self.torus.named(gamma)
            moved = {}
            for key, g in named.items():
                i, n = _parse_gen_key(key)
                if self.cat.kind == "periodic":
                    tn = self.cat.wrap(n - k)
                else:
                    tn = n - k
                    if not (self.cat.lo <= tn <= self.cat.hi - 1):
                        raise WindowOverflow(
                            f"shift moves generator {key} outside the window"
                        )
                tkey = cx.generator_key(i, tn)
                moved[tkey] = moved.get(tkey, 0) + g
            shifted = cx.shift(self.stable.object(m_id), k)
            if self.cat.kind == "bounded":
                window = set(self.cat.degrees())
                if any(n not in window for n in shifted.comps):
                    raise WindowOverflow(
                        "shift moves a minimal part outside the window"
                    )
            m, exps = cx.strip_contractibles(shifted)
            if exps:
                raise SpecError("shift of a minimal complex must stay minimal")
            key2 = (self.torus.vector(moved), self.stable.classify(m))
            out[key2] = out.get(key2, Fraction(0)) + co
        return _prune(out)

    # -- verification --

    def solve_exponents(self, a_id: int, c_id: int, u_id: int):
        """Exponent vector kappa with sum_g kappa_g cl(K_g) = cl(a) + cl(c)
        - cl(u) in the degreewise class group, or None when unsolvable.

        The system is unitriangular in the degree filtration, so the
        solution is unique when it exists.  Bounded windows only.
        """
        if self.cat.kind == "periodic":
            raise DerivedUndefined("class-group solve needs a bounded window")
        nverts = self.cat.quiver.n
        target: dict = {}

        def accumulate(x: Complex, s: int):
            for n, mults in x.comps.items():
                for i in range(nverts):
                    if mults[i]:
                        key = (n, i)
                        target[key] = target.get(key, 0) + s * mults[i]

        accumulate(self.stable.object(a_id), 1)
        accumulate(self.stable.object(c_id), 1)
        accumulate(self.stable.object(u_id), -1)
        kappa = {}
        for n in range(self.cat.lo, self.cat.hi):
            for i in range(1, nverts + 1):
                g = target.pop((n, i - 1), 0)
                if g:
                    kappa[cx.generator_key(i, n)] = g
                    key_up = (n + 1, i - 1)
                    target[key_up] = target.get(key_up, 0) - g
        if any(v for v in target.values()):
            return None
        return self.torus.vector(kappa)

    def compare_toen(self, pairs=None, max_degree_dim: int = 1, max_total_dim=None) -> dict:
        """Tensor-factorization check for the twisted product.

        The basis map mu(t_gamma ⋄ [m]) = [m] ⊗ t_gamma is tested twice on
        each pair of stable classes:

        * literally, against dh_product on the stable factor and plain
          exponent addition on the group-algebra factor; any discrepancy is
          reported per pair (first offending term), not asserted away;
        * in corrected form, where the group-algebra exponent of each term
          is the unique solution of the degreewise class-group equation and
          the coefficients must satisfy
          tw_coeff(eps, u) = dh_coeff(u) * |Hom(K_eps, u)| exactly.

        "ok" reflects the corrected form; the literal residual is data.
        """
        if pairs is None:
            ids = self.stable_sample(
                max_degree_dim=max_degree_dim, max_total_dim=max_total_dim
            )
            pairs = [(a, c) for a in ids for c in ids]
        failures = []
        literal = []
        for a_id, c_id in pairs:
            lhs = self.tw_product(
                self.basis(self.torus.zero(), a_id),
                self.basis(self.torus.zero(), c_id),
            )
            rhs = self._dh_pair(a_id, c_id)
            lhs_classes = set()
            pair_literal = None
            for (eps, u_id), co in sorted(lhs.items()):
                lhs_classes.add(u_id)
                if any(eps) and pair_literal is None:
                    pair_literal = {
                        "pair": (a_id, c_id),
                        "class": u_id,
                        "lhs_exponents": self.torus.named(eps),
                        "rhs_exponents": {},
                    }
                kappa = self.solve_exponents(a_id, c_id, u_id)
                if kappa != eps:
                    failures.append(
                        {
                            "pair": (a_id, c_id),
                            "class": u_id,
                            "kind": "exponent",
                            "observed": eps,
                            "solved": kappa,
                        }
                    )
                    continue
                want = rhs.get(u_id, Fraction(0)) * self.gen_hom(eps, u_id)
                if co != want:
                    failures.append(
                        {
                            "pair": (a_id, c_id),
                            "class": u_id,
                            "kind": "coefficient",
                            "lhs": str(co),
                            "rhs": str(want),
                        }
                    )
            if lhs_classes != set(rhs):
                failures.append(
                    {
                        "pair": (a_id, c_id),
                        "kind": "support",
                        "lhs": sorted(lhs_classes),
                        "rhs": sorted(rhs),
                    }
                )
            if pair_literal is not None:
                literal.append(pair_literal)
        return {
            "ok": not failures,
            "pairs": len(pairs),
            "failures": failures,
            "literal_ok": not literal,
            "literal_discrepancies": literal,
        }

    def stable_sample(self, max_degree_dim=None, max_total_dim=None) -> list:
        """Ids of all stable classes with a minimal representative within
        the given size bounds, in first-encounter order."""
        seen = []
        strict_reg = cx.enumerate_complexes(
            self.cat,
            max_degree_dim=max_degree_dim,
            max_total_dim=max_total_dim,
            caps=self.caps,
        )
        for i in range(len(strict_reg)):
            obj = strict_reg.object(i)
            if not cx.is_minimal(obj):
                continue
            sid = self.stable.classify(obj)
            if sid not in seen:
                seen.append(sid)
        return seen

    def verify_freeness(self, max_degree_dim=None, max_total_dim=None) -> dict:
        """Freeness of the module over the torus, in four checks.

        i.   rewriting is idempotent: every object rewrites to one basis
             term, and rewriting the chosen representative of that term
             returns it unchanged;
        ii.  stably isomorphic objects rewrite to the same stable id, with
             torus parts differing by an invertible monomial (checked by
             padding every object with each generator);
        iii. the retraction is the identity on torus generators, and
             distinct generators stay distinct;
        iv.  distinct stable classes never mix: objects rewriting to the
             same stable id are stably isomorphic.
        """
        crit: dict = {}
        strict_reg = cx.enumerate_complexes(
            self.cat,
            max_degree_dim=max_degree_dim,
            max_total_dim=max_total_dim,
            caps=self.caps,
        )
        objs = [strict_reg.object(i) for i in range(len(strict_reg))]

        failures_i = []
        keys = {}
        for idx, obj in enumerate(objs):
            elem = self.normalize(obj)
            if len(elem) != 1:
                failures_i.append({"object": obj.encoding(), "terms": len(elem)})
                continue
            ((gamma, m_id), co), = elem.items()
            keys[idx] = (gamma, m_id)
            if co != self.gen_hom(gamma, m_id):
                failures_i.append({"object": obj.encoding(), "coeff": str(co)})
                continue
            rep = self.stable.object(m_id)
            again = self.normalize(rep)
            if again != {(self.torus.zero(), m_id): Fraction(1)}:
                failures_i.append({"object": obj.encoding(), "kind": "not idempotent"})
        crit["i"] = {"ok": not failures_i, "objects": len(objs), "failures": failures_i}

        failures_ii = []
        for idx, obj in enumerate(objs):
            if idx not in keys:
                continue
            gamma, m_id = keys[idx]
            for g, key in enumerate(self.torus.keys):
                padded = cx.direct_sum_cx(obj, self.torus.gens[key])
                elem = self.normalize(padded)
                e_g = tuple(1 if j == g else 0 for j in range(self.torus.rank))
                want_key = (self.torus.add(gamma, e_g), m_id)
                if set(elem) != {want_key}:
                    failures_ii.append(
                        {"object": obj.encoding(), "generator": key}
                    )
                    continue
                ratio = elem[want_key] / self.gen_hom(gamma, m_id)
                if ratio != self.gen_hom(e_g, m_id):
                    failures_ii.append(
                        {"object": obj.encoding(), "generator": key, "ratio": str(ratio)}
                    )
        crit["ii"] = {"ok": not failures_ii, "failures": failures_ii}

        failures_iii = []
        seen_exponents = set()
        for g, key in enumerate(self.torus.keys):
            elem = self.normalize(self.torus.gens[key])
            e_g = tuple(1 if j == g else 0 for j in range(self.torus.rank))
            if elem != {(e_g, self.zero_class): Fraction(1)}:
                failures_iii.append({"generator": key, "image": _fmt_elem(elem)})
            if e_g in seen_exponents:
                failures_iii.append({"generator": key, "kind": "collision"})
            seen_exponents.add(e_g)
        crit["iii"] = {
            "ok": not failures_iii,
            "generators": list(self.torus.keys),
            "failures": failures_iii,
        }

        failures_iv = []
        for i in range(len(objs)):
            if i not in keys:
                continue
            for j in range(i + 1, len(objs)):
                if j not in keys:
                    continue
                same_id = keys[i][1] == keys[j][1]
                stably_iso = cx.stable_iso_test(objs[i], objs[j], self.caps)
                if same_id != stably_iso:
                    failures_iv.append(
                        {
                            "objects": (objs[i].encoding(), objs[j].encoding()),
                            "same_id": same_id,
                            "stably_isomorphic": stably_iso,
                        }
                    )
        crit["iv"] = {"ok": not failures_iv, "failures": failures_iv}
        return {"ok": all(c["ok"] for c in crit.values()), "criteria": crit}


def _prune(d: dict) -> dict:
    return {k: v for k, v in sorted(d.items()) if v != 0}


def _fmt_elem(d: dict) -> list:
    return [[list(k[0]), k[1], str(v)] for k, v in sorted(d.items())]


def _parse_gen_key(key: str) -> tuple:
    head, n = key.split("@")
    return int(head[1:]), int(n)
