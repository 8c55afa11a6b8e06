"""Representations of acyclic quivers over F_p.

Conventions:

- Vertices are numbered 1..n; arrows are (tail, head) pairs and the quiver
  must be acyclic.
- A representation assigns dims[v] to each vertex and to each arrow a
  matrix of shape (dims[head], dims[tail]) acting on column vectors.
- A morphism a -> b is a tuple of per-vertex matrices g_v of shape
  (b.dims[v], a.dims[v]) with g_head a_alpha = b_alpha g_tail for every
  arrow alpha.
- Ext^1(a, c) classifies conflations c >-> B ->> a.  The cocycle space is
  the full space of arrow-indexed matrices f_alpha: a_tail -> c_head; the
  coboundary subspace is the image of (g_v) -> (c_alpha g_tail - g_head
  a_alpha).  The middle term of a cocycle f puts c first:
  B_v = c_v (+) a_v with arrow blocks [[c_alpha, f_alpha], [0, a_alpha]].

Everything is deterministic: dimension vectors enumerate in graded
lexicographic order, matrices in lexicographic entry order, and registries
assign ids in first-encounter order.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import Caps, DEFAULT_CAPS
from .errors import (
    EndoSearchCapExceeded,
    EnumCapExceeded,
    ExtEnumCapExceeded,
    IsoEnumCapExceeded,
)
from .linalg import Field, Matrix, block2x2, kernel_basis, rank, rref, solve_matrix


class Quiver:
    """Finite acyclic quiver with vertices 1..n."""

    __slots__ = ("n", "arrows", "_topo")

    def __init__(self, n: int, arrows):
        if n < 1:
            raise ValueError("quiver needs at least one vertex")
        arrows = tuple((int(t), int(h)) for t, h in arrows)
        for t, h in arrows:
            if not (1 <= t <= n and 1 <= h <= n):
                raise ValueError(f"arrow ({t},{h}) out of vertex range 1..{n}")
        self.n = n
        self.arrows = arrows
        self._topo = self._toposort()

    def _toposort(self) -> tuple[int, ...]:
        indeg = {v: 0 for v in range(1, self.n + 1)}
        for _, h in self.arrows:
            indeg[h] += 1
        order = []
        ready = [v for v in range(1, self.n + 1) if indeg[v] == 0]
        while ready:
            v = ready.pop(0)
            order.append(v)
            for t, h in self.arrows:
                if t == v:
                    indeg[h] -= 1
                    if indeg[h] == 0:
                        ready.append(h)
        if len(order) != self.n:
            raise ValueError("quiver has an oriented cycle")
        return tuple(order)

    @property
    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def __eq__(self, other):
        return isinstance(other, Quiver) and (self.n, self.arrows) == (other.n, other.arrows)

    def __hash__(self):
        return hash((self.n, self.arrows))

    def __repr__(self):
        return f"Quiver({self.n}, {list(self.arrows)})"


class Rep:
    """Representation: dimension vector plus one matrix per arrow."""

    __slots__ = ("quiver", "field", "dims", "maps", "_enc")

    def __init__(self, quiver: Quiver, field: Field, dims, maps):
        dims = tuple(int(d) for d in dims)
        if len(dims) != quiver.n or any(d < 0 for d in dims):
            raise ValueError("dimension vector must list one value >= 0 per vertex")
        maps = tuple(maps)
        if len(maps) != len(quiver.arrows):
            raise ValueError("need one matrix per arrow")
        for (t, h), m in zip(quiver.arrows, maps):
            if m.a.shape != (dims[h - 1], dims[t - 1]):
                raise ValueError(
                    f"arrow ({t},{h}) matrix has shape {m.a.shape}, "
                    f"expected {(dims[h - 1], dims[t - 1])}"
                )
        self.quiver = quiver
        self.field = field
        self.dims = dims
        self.maps = maps
        self._enc = None

    @classmethod
    def zero(cls, quiver: Quiver, field: Field) -> "Rep":
        dims = (0,) * quiver.n
        maps = [Matrix.zeros(field, 0, 0) for _ in quiver.arrows]
        return cls(quiver, field, dims, maps)

    @classmethod
    def simple(cls, quiver: Quiver, field: Field, v: int) -> "Rep":
        dims = tuple(1 if u == v else 0 for u in range(1, quiver.n + 1))
        maps = [
            Matrix.zeros(field, dims[h - 1], dims[t - 1]) for t, h in quiver.arrows
        ]
        return cls(quiver, field, dims, maps)

    def total_dim(self) -> int:
        return sum(self.dims)

    def encoding(self) -> tuple:
        """Canonical hashable form: dims plus row-major arrow entries."""
        if self._enc is None:
            self._enc = (self.dims, tuple(m.entries() for m in self.maps))
        return self._enc

    def __eq__(self, other):
        return isinstance(other, Rep) and self.encoding() == other.encoding()

    def __hash__(self):
        return hash(self.encoding())

    def __repr__(self):
        return f"Rep(dims={self.dims})"


def direct_sum(a: Rep, b: Rep) -> Rep:
    dims = tuple(x + y for x, y in zip(a.dims, b.dims))
    field = a.field
    maps = []
    for i, (t, h) in enumerate(a.quiver.arrows):
        maps.append(
            block2x2(
                field,
                a.maps[i],
                Matrix.zeros(field, a.dims[h - 1], b.dims[t - 1]),
                Matrix.zeros(field, b.dims[h - 1], a.dims[t - 1]),
                b.maps[i],
            )
        )
    return Rep(a.quiver, field, dims, maps)


def _kron_mod(p: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b) % p


def _hom_constraint_matrix(a: Rep, b: Rep) -> tuple[np.ndarray, list[int], list[tuple[int, int]]]:
    """Rows: intertwiner equations; columns: row-major vec of each g_v.

    Returns (matrix, vertex offsets, per-vertex shapes (rows, cols) of g_v).
    """
    p = a.field.p
    q = a.quiver
    shapes = [(b.dims[v], a.dims[v]) for v in range(q.n)]
    sizes = [r * c for r, c in shapes]
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)
    total = offs[-1]
    rows = []
    for i, (t, h) in enumerate(q.arrows):
        rcount = b.dims[h - 1] * a.dims[t - 1]
        if rcount == 0:
            continue
        block = np.zeros((rcount, total), dtype=np.int64)
        # vec(g_h @ A) = (I (x) A^T) vec(g_h), vec(B @ g_t) = (B (x) I) vec(g_t)
        if sizes[h - 1]:
            block[:, offs[h - 1]:offs[h]] = _kron_mod(
                p, np.eye(b.dims[h - 1], dtype=np.int64), a.maps[i].a.T
            )
        if sizes[t - 1]:
            block[:, offs[t - 1]:offs[t]] = (
                block[:, offs[t - 1]:offs[t]]
                - _kron_mod(p, b.maps[i].a, np.eye(a.dims[t - 1], dtype=np.int64))
            ) % p
        rows.append(block)
    if rows:
        mat = np.concatenate(rows, axis=0) % p
    else:
        mat = np.zeros((0, total), dtype=np.int64)
    return mat, offs, shapes


def _unvec(field: Field, vec: np.ndarray, offs, shapes) -> tuple[Matrix, ...]:
    out = []
    for v, (r, c) in enumerate(shapes):
        seg = vec[offs[v]:offs[v + 1]]
        out.append(Matrix(field, seg.reshape(r, c) if r * c else np.zeros((r, c), dtype=np.int64)))
    return tuple(out)


def hom_basis(a: Rep, b: Rep) -> list[tuple[Matrix, ...]]:
    """Basis of the space of morphisms a -> b, as per-vertex matrix tuples."""
    mat, offs, shapes = _hom_constraint_matrix(a, b)
    if offs[-1] == 0:
        return []
    ker = kernel_basis(Matrix(a.field, mat))
    return [_unvec(a.field, v, offs, shapes) for v in ker]


def hom_dim(a: Rep, b: Rep) -> int:
    mat, offs, _ = _hom_constraint_matrix(a, b)
    if offs[-1] == 0:
        return 0
    return offs[-1] - rank(Matrix(a.field, mat))


@dataclass
class Ext1Space:
    """Ext^1(a, c) data: dimension and one cocycle per extension class."""

    dim: int
    reps: list[tuple[Matrix, ...]] | None


def _ext1_setup(a: Rep, c: Rep):
    """Cocycle coordinates and the coboundary matrix for Ext^1(a, c)."""
    p = a.field.p
    q = a.quiver
    fshapes = [(c.dims[h - 1], a.dims[t - 1]) for t, h in q.arrows]
    fsizes = [r * s for r, s in fshapes]
    foffs = [0]
    for s in fsizes:
        foffs.append(foffs[-1] + s)
    z = foffs[-1]

    gshapes = [(c.dims[v], a.dims[v]) for v in range(q.n)]
    gsizes = [r * s for r, s in gshapes]
    goffs = [0]
    for s in gsizes:
        goffs.append(goffs[-1] + s)
    g = goffs[-1]

    d = np.zeros((z, g), dtype=np.int64)
    for i, (t, h) in enumerate(q.arrows):
        if fsizes[i] == 0:
            continue
        # f_alpha slot receives c_alpha g_tail - g_head a_alpha
        if gsizes[t - 1]:
            d[foffs[i]:foffs[i + 1], goffs[t - 1]:goffs[t]] = _kron_mod(
                p, c.maps[i].a, np.eye(a.dims[t - 1], dtype=np.int64)
            )
        if gsizes[h - 1]:
            d[foffs[i]:foffs[i + 1], goffs[h - 1]:goffs[h]] = (
                d[foffs[i]:foffs[i + 1], goffs[h - 1]:goffs[h]]
                - _kron_mod(p, np.eye(c.dims[h - 1], dtype=np.int64), a.maps[i].a.T)
            ) % p
    return z, foffs, fshapes, d


def ext1_space(a: Rep, c: Rep, caps: Caps = DEFAULT_CAPS, enumerate_reps: bool = True) -> Ext1Space:
    """Ext^1(a, c): dimension and, if requested, one cocycle per class.

    Class representatives span a complement of the coboundaries inside the
    cocycle space; enumeration is lexicographic over complement coordinates,
    so the zero (split) class always comes first.
    """
    field = a.field
    p = field.p
    z, foffs, fshapes, d = _ext1_setup(a, c)
    if z == 0:
        dim = 0
        compl: list[int] = []
    else:
        dmat = Matrix(field, d)
        piv = rref(dmat)[1]
        r = len(piv)
        dim = z - r
        if dim:
            im_cols = d[:, list(piv)] if r else np.zeros((z, 0), dtype=np.int64)
            probe = np.concatenate([im_cols, np.eye(z, dtype=np.int64)], axis=1)
            ppiv = rref(Matrix(field, probe))[1]
            compl = [c0 - r for c0 in ppiv if c0 >= r]
            assert len(compl) == dim
        else:
            compl = []
    if not enumerate_reps:
        return Ext1Space(dim, None)
    count = p**dim
    if count > caps.max_ext_enum:
        raise ExtEnumCapExceeded(
            f"|Ext^1| = {p}^{dim} exceeds enumeration cap {caps.max_ext_enum}"
        )
    reps = []
    for coeffs in itertools.product(range(p), repeat=dim):
        vec = np.zeros(z, dtype=np.int64)
        for c0, pos in zip(coeffs, compl):
            vec[pos] = c0
        fs = []
        for i, (r0, s0) in enumerate(fshapes):
            seg = vec[foffs[i]:foffs[i + 1]]
            fs.append(Matrix(field, seg.reshape(r0, s0) if r0 * s0 else np.zeros((r0, s0), dtype=np.int64)))
        reps.append(tuple(fs))
    return Ext1Space(dim, reps)


def middle_term(a: Rep, c: Rep, f: tuple[Matrix, ...]) -> Rep:
    """Middle term of the conflation c >-> B ->> a twisted by cocycle f."""
    field = a.field
    dims = tuple(x + y for x, y in zip(c.dims, a.dims))
    maps = []
    for i, (t, h) in enumerate(a.quiver.arrows):
        maps.append(
            block2x2(
                field,
                c.maps[i],
                f[i],
                Matrix.zeros(field, a.dims[h - 1], c.dims[t - 1]),
                a.maps[i],
            )
        )
    return Rep(a.quiver, field, dims, maps)


def proj_indec(quiver: Quiver, field: Field, i: int) -> Rep:
    """Indecomposable projective at vertex i; basis = paths starting at i.

    The trivial path is the first basis vector of the fibre at i, which the
    complex layer relies on when reading off scalar blocks P_i -> P_i.
    """
    if not (1 <= i <= quiver.n):
        raise ValueError(f"vertex {i} out of range")
    paths_to: dict[int, list[tuple[int, ...]]] = {v: [] for v in range(1, quiver.n + 1)}
    frontier = [((), i)]
    paths_to[i].append(())
    while frontier:
        new_frontier = []
        for path, v in frontier:
            for ai, (t, h) in enumerate(quiver.arrows):
                if t == v:
                    ext = path + (ai,)
                    paths_to[h].append(ext)
                    new_frontier.append((ext, h))
        frontier = new_frontier
    dims = tuple(len(paths_to[v]) for v in range(1, quiver.n + 1))
    maps = []
    for ai, (t, h) in enumerate(quiver.arrows):
        m = np.zeros((dims[h - 1], dims[t - 1]), dtype=np.int64)
        index_h = {p: k for k, p in enumerate(paths_to[h])}
        for k, p in enumerate(paths_to[t]):
            m[index_h[p + (ai,)], k] = 1
        maps.append(Matrix(field, m))
    return Rep(quiver, field, dims, maps)


def euler_exponent(quiver: Quiver, d1, d2) -> int:
    """log_q of the Euler form: sum_v d1_v d2_v - sum_(t->h) d1_t d2_h."""
    e = sum(x * y for x, y in zip(d1, d2))
    for t, h in quiver.arrows:
        e -= d1[t - 1] * d2[h - 1]
    return e


def euler_form(quiver: Quiver, field: Field, d1, d2) -> Fraction:
    return Fraction(field.p) ** euler_exponent(quiver, d1, d2)


def _power_eventual(maps: tuple[Matrix, ...], total: int) -> tuple[Matrix, ...]:
    """phi^(2^k) with 2^k >= total; image/kernel then split the module."""
    e = maps
    k = 0
    while (1 << k) < max(total, 1):
        e = tuple(x @ x for x in e)
        k += 1
    return e


def _sub_rep(m: Rep, cols: list[Matrix]) -> Rep:
    """Restrict m to the subrepresentation spanned by the given columns."""
    dims = tuple(c.cols for c in cols)
    maps = []
    for i, (t, h) in enumerate(m.quiver.arrows):
        img = m.maps[i] @ cols[t - 1]
        sol = solve_matrix(cols[h - 1], img)
        assert sol is not None, "subspace not arrow-stable"
        maps.append(sol)
    return Rep(m.quiver, m.field, dims, maps)


def _fitting_split(m: Rep, phi: tuple[Matrix, ...]) -> tuple[Rep, Rep] | None:
    """Split m along the eventual image/kernel of phi, if proper."""
    field = m.field
    total = m.total_dim()
    e = _power_eventual(phi, total)
    r = sum(rank(x) for x in e)
    if r == 0 or r == total:
        return None
    im_cols = []
    ker_cols = []
    for v in range(m.quiver.n):
        piv = rref(e[v])[1]
        im_cols.append(Matrix(field, e[v].a[:, list(piv)] if piv else np.zeros((m.dims[v], 0), dtype=np.int64)))
        kb = kernel_basis(e[v])
        ker_cols.append(
            Matrix(field, np.stack(kb, axis=1) if kb else np.zeros((m.dims[v], 0), dtype=np.int64))
        )
    return _sub_rep(m, im_cols), _sub_rep(m, ker_cols)


def _is_scalar_endo(m: Rep, phi: tuple[Matrix, ...]) -> bool:
    c = None
    for v in range(m.quiver.n):
        if m.dims[v] == 0:
            continue
        mat = phi[v].a
        if not np.array_equal(mat, np.eye(m.dims[v], dtype=np.int64) * mat[0, 0] % m.field.p):
            return False
        if c is None:
            c = int(mat[0, 0])
        elif int(mat[0, 0]) != c:
            return False
    return True


def decompose(m: Rep, caps: Caps = DEFAULT_CAPS) -> list[Rep]:
    """Krull-Schmidt factors of m, by eventual-image splitting.

    Exhausts End(m) when its cardinality fits the cap (so indecomposability
    is certified: every endomorphism found nilpotent or invertible); beyond
    the cap only sampled combinations are tried and failure to split raises.
    """
    if m.total_dim() == 0:
        return []
    basis = hom_basis(m, m)
    d = len(basis)
    if d == 1:
        return [m]
    p = m.field.p

    def try_phi(phi):
        if _is_scalar_endo(m, phi):
            return None
        return _fitting_split(m, phi)

    if p**d <= caps.max_endo_enum:
        for coeffs in itertools.product(range(p), repeat=d):
            if not any(coeffs):
                continue
            phi = _combine(m, basis, coeffs)
            split = try_phi(phi)
            if split is not None:
                a, b = split
                return decompose(a, caps) + decompose(b, caps)
        return [m]
    # sampled search: single basis vectors, then pairwise sums
    candidates = list(basis)
    for i in range(d):
        for j in range(i + 1, d):
            candidates.append(tuple(x + y for x, y in zip(basis[i], basis[j])))
    for phi in candidates:
        split = try_phi(phi)
        if split is not None:
            a, b = split
            return decompose(a, caps) + decompose(b, caps)
    raise EndoSearchCapExceeded(
        f"|End| = {p}^{d} exceeds cap {caps.max_endo_enum} and sampling found no splitting"
    )


def _combine(m: Rep, basis, coeffs) -> tuple[Matrix, ...]:
    p = m.field.p
    out = []
    for v in range(m.quiver.n):
        acc = np.zeros((m.dims[v], m.dims[v]), dtype=np.int64)
        for c, g in zip(coeffs, basis):
            if c:
                acc += c * g[v].a
        out.append(Matrix(m.field, acc % p))
    return tuple(out)


def find_iso(a: Rep, b: Rep, caps: Caps = DEFAULT_CAPS) -> tuple[Matrix, ...] | None:
    """An isomorphism a -> b found by enumerating Hom(a, b), or None."""
    if a.dims != b.dims:
        return None
    basis = hom_basis(a, b)
    d = len(basis)
    p = a.field.p
    if p**d > caps.max_hom_enum:
        raise IsoEnumCapExceeded(
            f"|Hom| = {p}^{d} exceeds iso search cap {caps.max_hom_enum}"
        )
    for coeffs in itertools.product(range(p), repeat=d):
        if not any(coeffs):
            continue
        phi = _combine_rect(a, b, basis, coeffs)
        if all(rank(phi[v]) == a.dims[v] for v in range(a.quiver.n)):
            return phi
    return None


def _invertible_hom_exists(a: Rep, b: Rep, caps: Caps) -> bool:
    return find_iso(a, b, caps) is not None


def _combine_rect(a: Rep, b: Rep, basis, coeffs) -> tuple[Matrix, ...]:
    p = a.field.p
    out = []
    for v in range(a.quiver.n):
        acc = np.zeros((b.dims[v], a.dims[v]), dtype=np.int64)
        for c, g in zip(coeffs, basis):
            if c:
                acc += c * g[v].a
        out.append(Matrix(a.field, acc % p))
    return tuple(out)


def iso_test(a: Rep, b: Rep, caps: Caps = DEFAULT_CAPS) -> bool:
    """Isomorphism test: dims, hom-dimension fingerprints, then matching of
    Krull-Schmidt factors (with direct hom enumeration on indecomposables)."""
    if a.dims != b.dims:
        return False
    if a.encoding() == b.encoding():
        return True
    if hom_dim(a, b) != hom_dim(b, a):
        return False
    if hom_dim(a, a) != hom_dim(b, b) or hom_dim(a, a) != hom_dim(a, b):
        return False
    for v in range(1, a.quiver.n + 1):
        s = Rep.simple(a.quiver, a.field, v)
        if hom_dim(a, s) != hom_dim(b, s) or hom_dim(s, a) != hom_dim(s, b):
            return False
    try:
        fa = decompose(a, caps)
        fb = decompose(b, caps)
    except EndoSearchCapExceeded:
        return _invertible_hom_exists(a, b, caps)
    if len(fa) != len(fb):
        return False
    used = [False] * len(fb)
    for x in fa:
        hit = False
        for j, y in enumerate(fb):
            if used[j] or x.dims != y.dims:
                continue
            if x.encoding() == y.encoding() or _invertible_hom_exists(x, y, caps):
                used[j] = True
                hit = True
                break
        if not hit:
            return False
    return True


class Registry:
    """Iso-class registry: stable integer ids in first-encounter order.

    ``iso`` decides isomorphism, ``key`` is a cheap invariant used to narrow
    candidate classes (dims for reps, degreewise dims for complexes).
    Registration is serialized; encodings of later witnesses are remembered
    so repeat classifications hit the fast path.
    """

    def __init__(self, iso, key):
        self._iso = iso
        self._key = key
        self.objs: list = []
        self._by_enc: dict = {}
        self._by_key: dict = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.objs)

    def object(self, i: int):
        return self.objs[i]

    def lookup(self, obj) -> int | None:
        """Classify without registering; None if no known class matches."""
        enc = obj.encoding()
        if enc in self._by_enc:
            return self._by_enc[enc]
        for i in self._by_key.get(self._key(obj), []):
            if self._iso(self.objs[i], obj):
                return i
        return None

    def classify(self, obj) -> int:
        enc = obj.encoding()
        hit = self._by_enc.get(enc)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._by_enc.get(enc)
            if hit is not None:
                return hit
            key = self._key(obj)
            for i in self._by_key.get(key, []):
                if self._iso(self.objs[i], obj):
                    self._by_enc[enc] = i
                    return i
            i = len(self.objs)
            self.objs.append(obj)
            self._by_enc[enc] = i
            self._by_key.setdefault(key, []).append(i)
            return i


def dim_vectors_upto(cap: tuple[int, ...]) -> list[tuple[int, ...]]:
    """All dimension vectors <= cap componentwise, graded-lex order."""
    ranges = [range(c + 1) for c in cap]
    vecs = [tuple(v) for v in itertools.product(*ranges)]
    vecs.sort(key=lambda d: (sum(d), d))
    return vecs


def enumerate_reps(
    quiver: Quiver,
    field: Field,
    dim_cap: tuple[int, ...],
    caps: Caps = DEFAULT_CAPS,
    registry: Registry | None = None,
) -> Registry:
    """Register every iso class of reps with dims <= dim_cap (componentwise).

    Deterministic: dimension vectors in graded-lex order, matrix tuples in
    lexicographic entry order, classes registered on first encounter.
    """
    if registry is None:
        registry = Registry(lambda x, y: iso_test(x, y, caps), lambda r: r.dims)
    p = field.p
    for dims in dim_vectors_upto(dim_cap):
        sizes = [dims[h - 1] * dims[t - 1] for t, h in quiver.arrows]
        total_entries = sum(sizes)
        count = p**total_entries
        if count > caps.max_enum:
            raise EnumCapExceeded(
                f"{count} matrix tuples at dims {dims} exceed cap {caps.max_enum}"
            )
        for flat in itertools.product(range(p), repeat=total_entries):
            maps = []
            pos = 0
            for i, (t, h) in enumerate(quiver.arrows):
                r, c = dims[h - 1], dims[t - 1]
                seg = flat[pos:pos + sizes[i]]
                pos += sizes[i]
                maps.append(
                    Matrix(field, np.array(seg, dtype=np.int64).reshape(r, c) if sizes[i] else np.zeros((r, c), dtype=np.int64))
                )
            registry.classify(Rep(quiver, field, dims, maps))
    return registry


def rep_registry(caps: Caps = DEFAULT_CAPS) -> Registry:
    return Registry(lambda x, y: iso_test(x, y, caps), lambda r: r.dims)
