"""Complexes of projective representations: bounded windows and Z/m-periodic.

Objects are cochain complexes X with X_n a finite direct sum of the
indecomposable projectives P_1..P_k (stored as a multiplicity vector, copies
listed generator by generator) and differentials d_n: X_n -> X_{n+1} that
are representation morphisms with d d = 0.  Bounded categories fix a user
window [lo, hi] plus internal headroom so shifts stay representable;
periodic categories index degrees by Z/m (m >= 2).

Degree-k map conventions (the signs matter and are locked together):

- chain maps (k = 0):      d_y f - f d_x = 0
- extension cocycles (k=1, f_n: x_n -> y_{n+1}):  d_y f + f d_x = 0
- null-homotopies (k = 0): f_n = d_{y,n-1} h_n + h_{n+1} d_{x,n}
- cocycle coboundaries:    f_n = h_{n+1} d_{x,n} - d_{y,n} h_n
- shift(x, k)_n = x_{n+k} with differential (-1)^k d_{x,n+k}

A cocycle f for the pair (a, c) has middle term B_n = c_n (+) a_n with
differential blocks [[d_c, f], [0, d_a]]; replacing f by a coboundary shift
conjugates B by [[1, h], [0, 1]], so iso classes of middles only depend on
the extension class.

Contractible complexes are generated by the cones K(i, n): P_i in degrees
n and n+1 with identity differential.  Stripping these off by Gaussian
elimination produces the minimal model plus the generator exponents; an
independent contractibility check solves d h + h d = id directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import Caps, DEFAULT_CAPS
from .errors import (
    EndoSearchCapExceeded,
    EnumCapExceeded,
    EulerUndefined,
    ExtEnumCapExceeded,
    IsoEnumCapExceeded,
    SpecError,
    WindowOverflow,
)
from .linalg import Field, Matrix, kernel_basis, rank, rref, solve, solve_matrix
from .quiver import Quiver, Registry, Rep, direct_sum, find_iso, hom_basis, proj_indec


class ComplexCategory:
    """Ambient category: quiver, field, and the degree bookkeeping."""

    def __init__(
        self,
        quiver: Quiver,
        field: Field,
        kind: str,
        lo: int | None = None,
        hi: int | None = None,
        period: int | None = None,
        headroom: int | None = None,
    ):
        if kind not in ("bounded", "periodic"):
            raise SpecError(f"unknown complex category kind {kind!r}")
        self.quiver = quiver
        self.field = field
        self.kind = kind
        if kind == "bounded":
            if lo is None or hi is None or lo > hi:
                raise SpecError("bounded category needs lo <= hi")
            if period is not None:
                raise SpecError("bounded category takes no period")
            self.lo = int(lo)
            self.hi = int(hi)
            width = self.hi - self.lo
            self.headroom = int(headroom) if headroom is not None else width + 2
            if self.headroom < width + 1:
                raise SpecError("headroom must cover at least the window width + 1")
            self.period = None
        else:
            if period is None or period < 2:
                raise SpecError("periodic category needs period >= 2")
            if lo is not None or hi is not None or headroom is not None:
                raise SpecError("periodic category takes no window bounds")
            self.period = int(period)
            self.lo = self.hi = None
            self.headroom = None
        self._projs = tuple(proj_indec(quiver, field, i) for i in range(1, quiver.n + 1))
        self._rep_cache: dict[tuple[int, ...], Rep] = {}
        self._zero_mults = (0,) * quiver.n

    # ---- degrees ----

    def degrees(self) -> list[int]:
        """User-facing degrees (the window, or all residues)."""
        if self.kind == "bounded":
            return list(range(self.lo, self.hi + 1))
        return list(range(self.period))

    def internal_degrees(self) -> list[int]:
        if self.kind == "bounded":
            return list(range(self.lo - self.headroom, self.hi + self.headroom + 1))
        return list(range(self.period))

    def wrap(self, n: int) -> int | None:
        """Map an integer degree to a storage degree; None if off the edge."""
        if self.kind == "periodic":
            return n % self.period
        if self.lo - self.headroom <= n <= self.hi + self.headroom:
            return n
        return None

    def next_deg(self, n: int) -> int | None:
        return self.wrap(n + 1)

    def prev_deg(self, n: int) -> int | None:
        return self.wrap(n - 1)

    # ---- projective bookkeeping ----

    @property
    def num_gens(self) -> int:
        return self.quiver.n

    def proj(self, i: int) -> Rep:
        return self._projs[i - 1]

    def rep_of(self, mults: tuple[int, ...]) -> Rep:
        """Canonical rep of a multiplicity vector: P_1 copies, then P_2, ..."""
        mults = tuple(int(m) for m in mults)
        hit = self._rep_cache.get(mults)
        if hit is not None:
            return hit
        rep = Rep.zero(self.quiver, self.field)
        for i in range(1, self.quiver.n + 1):
            for _ in range(mults[i - 1]):
                rep = direct_sum(rep, self.proj(i))
        self._rep_cache[mults] = rep
        return rep

    def copies_of(self, mults: tuple[int, ...]) -> list[tuple[int, int]]:
        """Copy slots (generator, copy index) in canonical order."""
        return [(i, t) for i in range(1, self.quiver.n + 1) for t in range(mults[i - 1])]

    def copy_offsets(self, mults: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Per copy: tuple of fibre offsets at each vertex."""
        offs = []
        acc = [0] * self.quiver.n
        for i, _ in self.copies_of(mults):
            offs.append(tuple(acc))
            for v in range(self.quiver.n):
                acc[v] += self.proj(i).dims[v]
        return offs

    def mult_dim(self, mults: tuple[int, ...]) -> int:
        return sum(m * self.proj(i + 1).total_dim() for i, m in enumerate(mults))

    # ---- equality / keys ----

    def signature(self) -> tuple:
        if self.kind == "bounded":
            return ("bounded", self.quiver.n, self.quiver.arrows, self.field.p, self.lo, self.hi)
        return ("periodic", self.quiver.n, self.quiver.arrows, self.field.p, self.period)

    def __eq__(self, other):
        return isinstance(other, ComplexCategory) and self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    # ---- constructors ----

    def zero_complex(self) -> "Complex":
        return Complex(self, {}, {})

    def stalk(self, i: int, n: int) -> "Complex":
        """P_i concentrated in degree n."""
        mults = tuple(1 if j == i else 0 for j in range(1, self.quiver.n + 1))
        n0 = self.wrap(n)
        if n0 is None:
            raise WindowOverflow(f"degree {n} outside the representable range")
        return Complex(self, {n0: mults}, {})

    def contractible_gen(self, i: int, n: int) -> "Complex":
        """Cone on the identity of P_i placed in degrees n, n+1."""
        mults = tuple(1 if j == i else 0 for j in range(1, self.quiver.n + 1))
        n0 = self.wrap(n)
        n1 = self.next_deg(n) if n0 is not None else None
        if n0 is None or n1 is None:
            raise WindowOverflow(f"degrees {n}, {n + 1} outside the representable range")
        p = self.proj(i)
        ident = tuple(Matrix.identity(self.field, d) for d in p.dims)
        return Complex(self, {n0: mults, n1: mults}, {n0: ident})


def contractible_generators(cat: ComplexCategory) -> dict[str, "Complex"]:
    """All cone generators in the user window, keyed "P{i}@{n}".

    Bounded windows pair degrees (n, n+1) inside [lo, hi]; periodic
    categories take every residue.  Order: degree, then generator index.
    """
    out: dict[str, Complex] = {}
    if cat.kind == "bounded":
        degs = range(cat.lo, cat.hi)
    else:
        degs = range(cat.period)
    for n in degs:
        for i in range(1, cat.quiver.n + 1):
            out[f"P{i}@{n}"] = cat.contractible_gen(i, n)
    return out


def generator_key(i: int, n: int) -> str:
    return f"P{i}@{n}"


class Complex:
    """Cochain complex of projectives inside a fixed category.

    comps: degree -> multiplicity vector (only nonzero entries stored).
    diffs: degree n -> per-vertex matrices of d_n, stored exactly when both
    X_n and X_{n+1} are nonzero (zero matrices included, so the encoding is
    a canonical function of the object).
    """

    __slots__ = ("cat", "comps", "diffs", "_enc", "_reps")

    def __init__(self, cat: ComplexCategory, comps: dict, diffs: dict, validate: bool = True):
        comps = {
            int(n): tuple(int(m) for m in mults)
            for n, mults in comps.items()
            if any(mults)
        }
        self.cat = cat
        self.comps = comps
        clean_diffs = {}
        for n in sorted(comps):
            n1 = cat.next_deg(n)
            if n1 is None or n1 not in comps:
                continue
            d = diffs.get(n)
            if d is None:
                src = cat.rep_of(comps[n])
                tgt = cat.rep_of(comps[n1])
                d = tuple(
                    Matrix.zeros(cat.field, tgt.dims[v], src.dims[v])
                    for v in range(cat.quiver.n)
                )
            else:
                d = tuple(d)
            clean_diffs[n] = d
        self.diffs = clean_diffs
        self._enc = None
        self._reps: dict[int, Rep] = {}
        if validate:
            self._validate(diffs)

    def _validate(self, given_diffs):
        cat = self.cat
        for n in self.comps:
            if cat.kind == "bounded" and not (
                cat.lo - cat.headroom <= n <= cat.hi + cat.headroom
            ):
                raise WindowOverflow(f"component at degree {n} outside representable range")
            if cat.kind == "periodic" and not (0 <= n < cat.period):
                raise SpecError(f"periodic degree {n} outside 0..{cat.period - 1}")
            if len(self.comps[n]) != cat.quiver.n or any(m < 0 for m in self.comps[n]):
                raise SpecError(f"bad multiplicity vector at degree {n}")
        for n in given_diffs:
            n0 = int(n)
            if n0 not in self.diffs and any(not m.is_zero() for m in given_diffs[n]):
                raise SpecError(f"differential at degree {n} has a zero end")
        for n, d in self.diffs.items():
            src = self.rep(n)
            tgt = self.rep(self.cat.next_deg(n))
            if len(d) != cat.quiver.n:
                raise SpecError(f"differential at degree {n}: need one matrix per vertex")
            for v in range(cat.quiver.n):
                if d[v].a.shape != (tgt.dims[v], src.dims[v]):
                    raise SpecError(f"differential at degree {n}: vertex {v + 1} shape mismatch")
            # must be a morphism of representations
            for i, (t, h) in enumerate(cat.quiver.arrows):
                lhs = d[h - 1] @ src.maps[i]
                rhs = tgt.maps[i] @ d[t - 1]
                if lhs.entries() != rhs.entries():
                    raise SpecError(f"differential at degree {n} is not a rep morphism")
        # d d = 0 wherever both factors exist
        for n in self.diffs:
            n1 = self.cat.next_deg(n)
            if n1 in self.diffs:
                for v in range(cat.quiver.n):
                    if not (self.diffs[n1][v] @ self.diffs[n][v]).is_zero():
                        raise SpecError(f"d_{n1} d_{n} != 0 at vertex {v + 1}")

    # ---- access ----

    def mults(self, n: int | None) -> tuple[int, ...]:
        if n is None:
            return self.cat._zero_mults
        return self.comps.get(n, self.cat._zero_mults)

    def rep(self, n: int | None) -> Rep:
        if n is None:
            return self.cat.rep_of(self.cat._zero_mults)
        hit = self._reps.get(n)
        if hit is None:
            hit = self.cat.rep_of(self.mults(n))
            self._reps[n] = hit
        return hit

    def diff(self, n: int | None) -> tuple[Matrix, ...]:
        """d_n with correct shapes (zero matrices when not stored)."""
        if n is not None and n in self.diffs:
            return self.diffs[n]
        src = self.rep(n)
        tgt = self.rep(self.cat.next_deg(n) if n is not None else None)
        return tuple(
            Matrix.zeros(self.cat.field, tgt.dims[v], src.dims[v])
            for v in range(self.cat.quiver.n)
        )

    @property
    def support(self) -> list[int]:
        return sorted(self.comps)

    def is_zero(self) -> bool:
        return not self.comps

    def total_dim(self) -> int:
        return sum(self.rep(n).total_dim() for n in self.comps)

    def encoding(self) -> tuple:
        if self._enc is None:
            self._enc = (
                tuple((n, self.comps[n]) for n in sorted(self.comps)),
                tuple(
                    (n, tuple(m.entries() for m in self.diffs[n]))
                    for n in sorted(self.diffs)
                ),
            )
        return self._enc

    def __eq__(self, other):
        return (
            isinstance(other, Complex)
            and self.cat == other.cat
            and self.encoding() == other.encoding()
        )

    def __hash__(self):
        return hash(self.encoding())

    def __repr__(self):
        return f"Complex({ {n: self.comps[n] for n in sorted(self.comps)} })"


# ---- sums, shifts ----


def _merge_perm(cat: ComplexCategory, first: tuple[int, ...], second: tuple[int, ...]):
    """Per-vertex permutation: (rep(first) (+) rep(second)) -> rep(first+second).

    The canonical rep groups copies by generator, so the block-sum basis
    (all of first, then all of second) gets interleaved.
    """
    total = tuple(a + b for a, b in zip(first, second))
    src_copies = [("f", i, t) for i, t in cat.copies_of(first)] + [
        ("s", i, t) for i, t in cat.copies_of(second)
    ]
    tgt_copies = cat.copies_of(total)
    # target slot for each source copy
    tgt_index = {}
    for k, (i, t) in enumerate(tgt_copies):
        tgt_index[(i, t)] = k
    src_to_tgt = []
    for tag, i, t in src_copies:
        t2 = t if tag == "f" else first[i - 1] + t
        src_to_tgt.append(tgt_index[(i, t2)])

    rep_f = cat.rep_of(first)
    rep_s = cat.rep_of(second)
    offs_src = cat.copy_offsets(first)
    offs_src = offs_src + [
        tuple(rep_f.dims[v] + o for v, o in enumerate(off)) for off in cat.copy_offsets(second)
    ]
    offs_tgt = cat.copy_offsets(total)
    dims_tgt = cat.rep_of(total).dims
    dims_src = tuple(rep_f.dims[v] + rep_s.dims[v] for v in range(cat.quiver.n))
    mats = []
    for v in range(cat.quiver.n):
        m = np.zeros((dims_tgt[v], dims_src[v]), dtype=np.int64)
        for k, (tag, i, t) in enumerate(src_copies):
            d = cat.proj(i).dims[v]
            if d == 0:
                continue
            r0 = offs_tgt[src_to_tgt[k]][v]
            c0 = offs_src[k][v]
            m[r0:r0 + d, c0:c0 + d] = np.eye(d, dtype=np.int64)
        mats.append(Matrix(cat.field, m))
    return tuple(mats)


def _block2_deg(cat, c_mults, a_mults, tl, tr, br):
    """[[tl, tr], [0, br]] against (rep(c) (+) rep(a)) bases, per vertex."""
    out = []
    field = cat.field
    rc = cat.rep_of(c_mults)
    ra = cat.rep_of(a_mults)
    for v in range(cat.quiver.n):
        r1, r2 = tl[v].rows, br[v].rows
        c1, c2 = tl[v].cols, br[v].cols
        m = np.zeros((r1 + r2, c1 + c2), dtype=np.int64)
        m[:r1, :c1] = tl[v].a
        m[:r1, c1:] = tr[v].a
        m[r1:, c1:] = br[v].a
        out.append(Matrix(field, m))
    return tuple(out)


def direct_sum_cx(x: Complex, y: Complex) -> Complex:
    """Degreewise direct sum, x block first, re-sorted to canonical copies."""
    cat = x.cat
    comps = {}
    for n in set(x.comps) | set(y.comps):
        comps[n] = tuple(a + b for a, b in zip(x.mults(n), y.mults(n)))
    diffs = {}
    for n in comps:
        n1 = cat.next_deg(n)
        if n1 is None or n1 not in comps:
            continue
        dx, dy = x.diff(n), y.diff(n)
        zero_tr = tuple(
            Matrix.zeros(cat.field, dx[v].rows, dy[v].cols) for v in range(cat.quiver.n)
        )
        block = _block2_deg(cat, x.mults(n), y.mults(n), dx, zero_tr, dy)
        pin = _merge_perm(cat, x.mults(n), y.mults(n))
        pout = _merge_perm(cat, x.mults(n1), y.mults(n1))
        d = tuple(
            pout[v] @ block[v] @ pin[v].transpose() for v in range(cat.quiver.n)
        )
        diffs[n] = d
    return Complex(cat, comps, diffs)


def shift(x: Complex, k: int) -> Complex:
    """shift(x, k)_n = x_{n+k}, differential scaled by (-1)^k."""
    cat = x.cat
    comps = {}
    diffs = {}
    sign = 1 if k % 2 == 0 else -1
    for n in x.comps:
        n2 = cat.wrap(n - k) if cat.kind == "periodic" else n - k
        if cat.kind == "bounded":
            w = cat.wrap(n2)
            if w is None:
                raise WindowOverflow(
                    f"shift by {k} moves degree {n} to {n2}, outside the representable range"
                )
            n2 = w
        comps[n2] = x.comps[n]
    for n in x.diffs:
        n2 = cat.wrap(n - k) if cat.kind == "periodic" else n - k
        d = x.diffs[n]
        if sign == -1:
            d = tuple(-m for m in d)
        diffs[n2] = d
    return Complex(cat, comps, diffs, validate=False)


# ---- degree-k map spaces ----


@dataclass
class _MapSpace:
    """Layout of degree-k maps f_n: x_n -> y_{n+k} in two coordinate systems:
    hom-basis coefficients (the unknowns) and raw matrix entries (where
    subspace comparisons happen)."""

    degrees: list[int]
    bases: dict  # n -> list of vertex-matrix tuples (hom basis at degree n)
    var_index: dict  # (n, j) -> column
    nvars: int
    raw_offsets: dict  # n -> per-vertex offset into the raw vector
    raw_dim: int
    shapes: dict  # n -> per-vertex (rows, cols)


def _map_space(x: Complex, y: Complex, k: int) -> _MapSpace:
    cat = x.cat
    if cat.kind == "periodic":
        degs = list(range(cat.period))
    else:
        degs = sorted(
            set(x.comps)
            | {n - k for n in y.comps}
        )
    bases = {}
    var_index = {}
    raw_offsets = {}
    shapes = {}
    nvars = 0
    raw = 0
    for n in degs:
        ykdeg = cat.wrap(n + k)
        src = x.rep(n)
        tgt = y.rep(ykdeg if ykdeg in y.comps else None)
        if src.total_dim() == 0 or tgt.total_dim() == 0:
            continue
        b = hom_basis(src, tgt)
        offs = []
        off0 = raw
        for v in range(cat.quiver.n):
            offs.append(raw)
            raw += tgt.dims[v] * src.dims[v]
        if raw == off0 and not b:
            continue
        bases[n] = b
        raw_offsets[n] = tuple(offs)
        shapes[n] = tuple((tgt.dims[v], src.dims[v]) for v in range(cat.quiver.n))
        for j in range(len(b)):
            var_index[(n, j)] = nvars
            nvars += 1
    return _MapSpace(sorted(bases), bases, var_index, nvars, raw_offsets, raw, shapes)


def _raw_vector(space: _MapSpace, n: int, mats) -> np.ndarray:
    """Embed one degree-n component into the raw coordinate vector."""
    vec = np.zeros(space.raw_dim, dtype=np.int64)
    if n not in space.raw_offsets:
        # the component must be zero there; otherwise the layout is wrong
        assert all(m.is_zero() for m in mats)
        return vec
    offs = space.raw_offsets[n]
    for v, m in enumerate(mats):
        r, c = space.shapes[n][v]
        if r * c:
            vec[offs[v]:offs[v] + r * c] = m.a.reshape(-1)
    return vec


def _space_raw_matrix(space: _MapSpace, field: Field) -> np.ndarray:
    """Columns: raw coordinates of each hom-basis variable."""
    out = np.zeros((space.raw_dim, space.nvars), dtype=np.int64)
    for (n, j), col in space.var_index.items():
        out[:, col] = _raw_vector(space, n, space.bases[n][j])
    return out


def _compose(field, a, b):
    """Vertexwise composition a after b."""
    return tuple(x @ y for x, y in zip(a, b))


def _chain_constraint_kernel(x: Complex, y: Complex, k: int, space: _MapSpace):
    """Coefficient vectors of degree-k maps with d_y f + s f d_x = 0,
    s = +1 for odd k and -1 for even k."""
    cat = x.cat
    field = cat.field
    s = 1 if k % 2 == 1 else -1
    # constraint targets: maps x_n -> y_{n+k+1}
    tgt_space = _map_space(x, y, k + 1)
    rows = tgt_space.raw_dim
    mat = np.zeros((rows, space.nvars), dtype=np.int64)
    p = field.p
    for (n, j), col in space.var_index.items():
        f = space.bases[n][j]
        # term d_{y, n+k} f_n lands at constraint degree n
        ydeg = cat.wrap(n + k)
        if ydeg is not None:
            dy = y.diff(ydeg)
            term = _compose(field, dy, f)
            mat[:, col] = (mat[:, col] + _raw_vector(tgt_space, n, term)) % p
        # term s * f_{n} d_{x, n-1} lands at constraint degree n-1
        nprev = cat.prev_deg(n)
        if nprev is not None:
            dxp = x.diff(nprev)
            term = _compose(field, f, dxp)
            vec = _raw_vector(tgt_space, nprev, term)
            mat[:, col] = (mat[:, col] + s * vec) % p
    if space.nvars == 0:
        return []
    if rows == 0:
        return [v for v in np.eye(space.nvars, dtype=np.int64)]
    return kernel_basis(Matrix(field, mat % p))


def _coeffs_to_components(space: _MapSpace, field: Field, coeffs: np.ndarray) -> dict:
    out = {}
    p = field.p
    for n in space.degrees:
        mats = []
        for v, (r, c) in enumerate(space.shapes[n]):
            acc = np.zeros((r, c), dtype=np.int64)
            for j, b in enumerate(space.bases[n]):
                cf = int(coeffs[space.var_index[(n, j)]])
                if cf:
                    acc += cf * b[v].a
            mats.append(Matrix(field, acc % p))
        if any(not m.is_zero() for m in mats):
            out[n] = tuple(mats)
    return out


def hom_chain_basis(x: Complex, y: Complex) -> list[dict]:
    """Basis of chain maps x -> y, each a dict degree -> vertex matrices."""
    space = _map_space(x, y, 0)
    ker = _chain_constraint_kernel(x, y, 0, space)
    return [_coeffs_to_components(space, x.cat.field, v) for v in ker]


def hom_dim_cx(x: Complex, y: Complex) -> int:
    space = _map_space(x, y, 0)
    return len(_chain_constraint_kernel(x, y, 0, space))


def hom_card(x: Complex, y: Complex) -> int:
    return x.cat.field.p ** hom_dim_cx(x, y)


def _homotopy_image_columns(x: Complex, y: Complex, k: int, space: _MapSpace) -> np.ndarray:
    """Raw-coordinate columns spanning the degenerate degree-k maps:
    k = 0: f = d_y h + h d_x (h of degree -1),
    k = 1: f = h d_x - d_y h (h of degree 0)."""
    cat = x.cat
    field = cat.field
    hspace = _map_space(x, y, k - 1)
    cols = []
    for (n, j) in sorted(hspace.var_index, key=lambda t: hspace.var_index[t]):
        h = hspace.bases[n][j]
        vec = np.zeros(space.raw_dim, dtype=np.int64)
        # d_{y, n+k-1} h_n contributes at degree n
        ydeg = cat.wrap(n + k - 1)
        if ydeg is not None:
            dy = y.diff(ydeg)
            term = _compose(field, dy, h)
            sgn = 1 if k == 0 else -1
            vec = (vec + sgn * _raw_vector(space, n, term)) % field.p
        # h_n d_{x, n-1} contributes at degree n-1
        nprev = cat.prev_deg(n)
        if nprev is not None:
            dxp = x.diff(nprev)
            term = _compose(field, h, dxp)
            vec = (vec + _raw_vector(space, nprev, term)) % field.p
        cols.append(vec)
    if cols:
        return np.stack(cols, axis=1)
    return np.zeros((space.raw_dim, 0), dtype=np.int64)


def stable_hom_dim(x: Complex, y: Complex) -> int:
    """log_p of the chain maps modulo null-homotopic ones."""
    space = _map_space(x, y, 0)
    ker = _chain_constraint_kernel(x, y, 0, space)
    if not ker:
        return 0
    field = x.cat.field
    raw_mat = _space_raw_matrix(space, field)
    zcols = np.stack([np.dot(raw_mat, v) % field.p for v in ker], axis=1)
    bcols = _homotopy_image_columns(x, y, 0, space)
    zdim = len(ker)
    bdim = rank(Matrix(field, bcols)) if bcols.shape[1] else 0
    # null-homotopic maps are chain maps, so the quotient dimension is direct
    both = np.concatenate([bcols, zcols], axis=1) % field.p
    total = rank(Matrix(field, both))
    assert total == zdim, "homotopies escaped the chain-map space"
    return zdim - bdim


def stable_hom_card(x: Complex, y: Complex) -> int:
    return x.cat.field.p ** stable_hom_dim(x, y)


@dataclass
class CxExt1:
    """Ext^1 of a pair of complexes: dimension plus class representatives."""

    dim: int
    reps: list[dict] | None  # each: degree -> vertex matrices f_n: a_n -> c_{n+1}


def ext1_classes(a: Complex, c: Complex, caps: Caps = DEFAULT_CAPS, enumerate_reps: bool = True) -> CxExt1:
    """Extension classes of conflations c >-> B ->> a.

    Cocycles are degree-1 maps a -> c with d_c f + f d_a = 0; classes are
    cosets of the coboundaries h d_a - d_c h.  Representatives enumerate a
    complement lexicographically, zero (split) class first.
    """
    cat = a.cat
    field = cat.field
    p = field.p
    space = _map_space(a, c, 1)
    ker = _chain_constraint_kernel(a, c, 1, space)
    zdim = len(ker)
    if zdim == 0:
        return CxExt1(0, [{}] if enumerate_reps else None)
    raw_mat = _space_raw_matrix(space, field)
    zcols = np.stack([np.dot(raw_mat, v) % p for v in ker], axis=1)
    bcols = _homotopy_image_columns(a, c, 1, space)
    bdim = rank(Matrix(field, bcols)) if bcols.shape[1] else 0
    dim = zdim - bdim
    if not enumerate_reps:
        return CxExt1(dim, None)
    if p**dim > caps.max_ext_enum:
        raise ExtEnumCapExceeded(
            f"|Ext^1| = {p}^{dim} exceeds enumeration cap {caps.max_ext_enum}"
        )
    # complement of the coboundaries inside the cocycles, in raw coordinates
    probe = np.concatenate([bcols, zcols], axis=1) % p
    piv = rref(Matrix(field, probe))[1]
    compl = [c0 - bcols.shape[1] for c0 in piv if c0 >= bcols.shape[1]]
    assert len(compl) == dim
    reps = []
    for coeffs in itertools.product(range(p), repeat=dim):
        vec = np.zeros(space.raw_dim, dtype=np.int64)
        for cf, j in zip(coeffs, compl):
            if cf:
                vec = (vec + cf * zcols[:, j]) % p
        comp = {}
        for n in space.degrees:
            offs = space.raw_offsets[n]
            mats = []
            for v, (r, cdim) in enumerate(space.shapes[n]):
                seg = vec[offs[v]:offs[v] + r * cdim]
                mats.append(Matrix(field, seg.reshape(r, cdim) if r * cdim else np.zeros((r, cdim), dtype=np.int64)))
            if any(not m.is_zero() for m in mats):
                comp[n] = tuple(mats)
        reps.append(comp)
    return CxExt1(dim, reps)


def ext1_card(a: Complex, c: Complex) -> int:
    return a.cat.field.p ** ext1_classes(a, c, enumerate_reps=False).dim


def middle_term_cx(a: Complex, c: Complex, f: dict) -> Complex:
    """Middle term of the conflation c >-> B ->> a along cocycle f."""
    cat = a.cat
    field = cat.field
    comps = {}
    for n in set(a.comps) | set(c.comps):
        comps[n] = tuple(u + w for u, w in zip(c.mults(n), a.mults(n)))
    diffs = {}
    for n in comps:
        n1 = cat.next_deg(n)
        if n1 is None or n1 not in comps:
            continue
        dc, da = c.diff(n), a.diff(n)
        fa = f.get(n)
        if fa is None:
            fa = tuple(
                Matrix.zeros(field, c.rep(n1).dims[v], a.rep(n).dims[v])
                for v in range(cat.quiver.n)
            )
        block = _block2_deg(cat, c.mults(n), a.mults(n), dc, fa, da)
        pin = _merge_perm(cat, c.mults(n), a.mults(n))
        pout = _merge_perm(cat, c.mults(n1), a.mults(n1))
        diffs[n] = tuple(pout[v] @ block[v] @ pin[v].transpose() for v in range(cat.quiver.n))
    return Complex(cat, comps, diffs)


def extp_card(x: Complex, y: Complex, pdeg: int) -> int:
    """|Ext^p| via the shift: stable maps from x[-p] to y (p >= 1)."""
    if pdeg < 1:
        raise ValueError("extp_card needs p >= 1")
    cat = x.cat
    if cat.kind == "bounded":
        # vanishes once the shifted support clears the target support
        if not x.comps or not y.comps:
            return 1
        if min(x.support) + pdeg > max(y.support):
            return 1
    return stable_hom_card(shift(x, -pdeg), y)


def euler_exponent_cx(x: Complex, y: Complex) -> int:
    """log_q of the Euler form: alternating sum of stable hom dims over
    every shift where maps can exist, negative ones included.

    Truncating at shift 0 would make the value depend on the differential
    rather than on degreewise dims alone, which breaks biadditivity on
    extension middles.  Only defined on bounded categories; the periodic
    sum does not terminate.
    """
    cat = x.cat
    if cat.kind != "bounded":
        raise EulerUndefined("Euler form undefined for periodic complexes")
    if not x.comps or not y.comps:
        return 0
    pmin = min(min(y.support) - max(x.support), 0)
    pmax = max(max(y.support) - min(x.support), 0)
    e = 0
    for pdeg in range(pmin, pmax + 1):
        d = stable_hom_dim(shift(x, -pdeg), y)
        e += d if pdeg % 2 == 0 else -d
    return e


# ---- contractibility ----


def is_contractible(x: Complex) -> bool:
    """Solve d h + h d = id directly (independent of the stripping route)."""
    if x.is_zero():
        return True
    cat = x.cat
    field = cat.field
    space = _map_space(x, x, 0)
    hspace = _map_space(x, x, -1)
    cols = _homotopy_image_columns(x, x, 0, space)
    target = np.zeros(space.raw_dim, dtype=np.int64)
    for n in x.comps:
        ident = tuple(Matrix.identity(field, d) for d in x.rep(n).dims)
        target = (target + _raw_vector(space, n, ident)) % field.p
    if cols.shape[1] == 0:
        return not np.any(target)
    return solve(Matrix(field, cols), target) is not None


def strip_contractibles(x: Complex) -> tuple[Complex, dict[str, int]]:
    """Peel off cone summands by Gaussian elimination.

    Scans d_n for a block P_i -> P_i with nonzero scalar (degree, generator,
    target copy, source copy order), changes basis to detach that cone,
    deletes the two copies, and repeats.  Returns the minimal remainder and
    exponents keyed like the cone generators ("P{i}@{n}").
    """
    cat = x.cat
    field = cat.field
    p = field.p
    comps = {n: list(m) for n, m in x.comps.items()}
    diffs = {n: [m.a.copy() for m in d] for n, d in x.diffs.items()}
    exps: dict[str, int] = {}

    def mults_at(n):
        return tuple(comps.get(n, [0] * cat.quiver.n))

    def ensure_diff(n):
        """Materialize d_n as zero arrays if both ends exist but it's absent."""
        n1 = cat.next_deg(n)
        if n is None or n1 is None:
            return None
        if n not in comps or n1 not in comps:
            return None
        if n not in diffs:
            src = cat.rep_of(mults_at(n))
            tgt = cat.rep_of(mults_at(n1))
            diffs[n] = [
                np.zeros((tgt.dims[v], src.dims[v]), dtype=np.int64)
                for v in range(cat.quiver.n)
            ]
        return diffs[n]

    def find_unit():
        for n in sorted(comps):
            n1 = cat.next_deg(n)
            if n1 is None or n1 not in comps:
                continue
            d = ensure_diff(n)
            if d is None:
                continue
            src_m = mults_at(n)
            tgt_m = mults_at(n1)
            offs_src = cat.copy_offsets(src_m)
            offs_tgt = cat.copy_offsets(tgt_m)
            src_copies = cat.copies_of(src_m)
            tgt_copies = cat.copies_of(tgt_m)
            for i in range(1, cat.quiver.n + 1):
                vi = i - 1
                for s_pos, (gi, _) in enumerate(tgt_copies):
                    if gi != i:
                        continue
                    for r_pos, (gj, _) in enumerate(src_copies):
                        if gj != i:
                            continue
                        # scalar of the P_i -> P_i block: trivial-path coord
                        row = offs_tgt[s_pos][vi]
                        col = offs_src[r_pos][vi]
                        c0 = int(d[vi][row, col]) % p
                        if c0:
                            return n, i, s_pos, r_pos, c0
        return None

    def copy_slice(offs, copies, pos, v, gen_dims):
        i = copies[pos][0]
        start = offs[pos][v]
        return start, start + gen_dims[i - 1][v]

    gen_dims = [cat.proj(i).dims for i in range(1, cat.quiver.n + 1)]

    while True:
        hit = find_unit()
        if hit is None:
            break
        n, i, s_pos, r_pos, c0 = hit
        n1 = cat.next_deg(n)
        cinv = field.inv(c0)
        src_m = mults_at(n)
        tgt_m = mults_at(n1)
        offs_src = cat.copy_offsets(src_m)
        offs_tgt = cat.copy_offsets(tgt_m)
        src_copies = cat.copies_of(src_m)
        tgt_copies = cat.copies_of(tgt_m)
        d = diffs[n]

        # base-change matrices per vertex: T on X_n, S on X_{n+1}
        T = []
        Tinv = []
        S = []
        Sinv = []
        for v in range(cat.quiver.n):
            dim_src = sum(gen_dims[g - 1][v] for g, _ in src_copies)
            dim_tgt = sum(gen_dims[g - 1][v] for g, _ in tgt_copies)
            r0, r1 = copy_slice(offs_src, src_copies, r_pos, v, gen_dims)
            s0, s1 = copy_slice(offs_tgt, tgt_copies, s_pos, v, gen_dims)
            t = np.eye(dim_src, dtype=np.int64)
            # row block of copy r gains c^-1 * (row s of d restricted to other cols)
            beta = d[v][s0:s1, :].copy()
            beta[:, r0:r1] = 0
            t[r0:r1, :] = (t[r0:r1, :] + cinv * beta) % p
            tin = np.eye(dim_src, dtype=np.int64)
            tin[r0:r1, :] = (tin[r0:r1, :] - cinv * beta) % p
            # S = I - c^-1 gamma placed in the s-column block (other rows)
            gamma = d[v][:, r0:r1].copy()
            gamma[s0:s1, :] = 0
            sm_block = (-cinv * gamma) % p
            sm = np.eye(dim_tgt, dtype=np.int64)
            sm[:, s0:s1] = (sm[:, s0:s1] + sm_block) % p
            sinv = np.eye(dim_tgt, dtype=np.int64)
            sinv[:, s0:s1] = (sinv[:, s0:s1] - sm_block) % p
            T.append(t % p)
            Tinv.append(tin % p)
            S.append(sm % p)
            Sinv.append(sinv % p)

        # apply: d_n <- S d_n T^-1; d_{n-1} <- T d_{n-1}; d_{n+1} <- d_{n+1} S^-1
        left_updates: dict[int, list[np.ndarray]] = {}
        right_updates: dict[int, list[np.ndarray]] = {}
        nprev = cat.prev_deg(n)
        if nprev is not None and nprev in diffs:
            left_updates[nprev] = T
        if n1 in diffs and n1 != n:
            right_updates[n1] = Sinv
        for v in range(cat.quiver.n):
            d[v] = (S[v] @ d[v] @ Tinv[v]) % p
        for m0, L in left_updates.items():
            if m0 == n:
                continue
            dm = diffs[m0]
            for v in range(cat.quiver.n):
                dm[v] = (L[v] @ dm[v]) % p
        for m0, R in right_updates.items():
            if m0 == n:
                continue
            dm = diffs[m0]
            for v in range(cat.quiver.n):
                dm[v] = (dm[v] @ R[v]) % p

        # delete copy r_pos from degree n and copy s_pos from degree n+1
        def delete_copy(deg, pos):
            m = mults_at(deg)
            copies = cat.copies_of(m)
            offs = cat.copy_offsets(m)
            gi = copies[pos][0]
            for v in range(cat.quiver.n):
                a0, a1 = copy_slice(offs, copies, pos, v, gen_dims)
                if deg in diffs:
                    diffs[deg][v] = np.delete(diffs[deg][v], np.s_[a0:a1], axis=1)
                pd = cat.prev_deg(deg)
                if pd is not None and pd in diffs:
                    diffs[pd][v] = np.delete(diffs[pd][v], np.s_[a0:a1], axis=0)
            comps[deg][gi - 1] -= 1
            if not any(comps[deg]):
                del comps[deg]
                diffs.pop(deg, None)
                pd = cat.prev_deg(deg)
                if pd is not None:
                    diffs.pop(pd, None)

        # degree n+1 first so offsets at degree n stay valid
        delete_copy(n1, s_pos)
        delete_copy(n, r_pos)
        key = generator_key(i, n)
        exps[key] = exps.get(key, 0) + 1

    out_comps = {n: tuple(m) for n, m in comps.items()}
    out_diffs = {
        n: tuple(Matrix(field, a) for a in d)
        for n, d in diffs.items()
        if n in out_comps and cat.next_deg(n) in out_comps
    }
    return Complex(cat, out_comps, out_diffs), exps


def is_minimal(x: Complex) -> bool:
    """No cone summand: every P_i -> P_i diagonal block scalar vanishes."""
    stripped, exps = strip_contractibles(x)
    return not exps


# ---- decomposition and isomorphism ----


def _chain_endo_combine(x: Complex, basis: list[dict], coeffs) -> dict:
    field = x.cat.field
    p = field.p
    out = {}
    for n in x.comps:
        dims = x.rep(n).dims
        acc = [np.zeros((d, d), dtype=np.int64) for d in dims]
        for cf, b in zip(coeffs, basis):
            if cf and n in b:
                for v in range(len(dims)):
                    acc[v] += cf * b[n][v].a
        out[n] = tuple(Matrix(field, a % p) for a in acc)
    return out


def _fitting_split_cx(x: Complex, phi: dict) -> tuple[Complex, Complex] | None:
    """Split along the eventual image/kernel of a chain endomorphism."""
    cat = x.cat
    field = cat.field
    total = x.total_dim()
    e = {n: phi[n] for n in phi}
    k = 0
    while (1 << k) < max(total, 1):
        e = {n: tuple(m @ m2 for m, m2 in zip(e[n], e[n])) for n in e}
        k += 1
    r = sum(rank(m) for mats in e.values() for m in mats)
    if r == 0 or r == total:
        return None
    im_cols = {}
    ker_cols = {}
    for n in x.comps:
        dims = x.rep(n).dims
        ic = []
        kc = []
        for v in range(cat.quiver.n):
            mv = e[n][v]
            piv = rref(mv)[1]
            ic.append(
                Matrix(field, mv.a[:, list(piv)] if piv else np.zeros((dims[v], 0), dtype=np.int64))
            )
            kb = kernel_basis(mv)
            kc.append(
                Matrix(field, np.stack(kb, axis=1) if kb else np.zeros((dims[v], 0), dtype=np.int64))
            )
        im_cols[n] = tuple(ic)
        ker_cols[n] = tuple(kc)
    return (
        _canonicalize_subcomplex(x, im_cols),
        _canonicalize_subcomplex(x, ker_cols),
    )


def _solve_proj_mults(cat: ComplexCategory, dims: tuple[int, ...]) -> tuple[int, ...]:
    """Multiplicities m with (+) P_i^{m_i} matching a projective's dims."""
    mults = [0] * cat.quiver.n
    remaining = list(dims)
    for v in cat.quiver.topological_order:
        m = remaining[v - 1]
        if m < 0:
            raise SpecError("component is not projective")
        mults[v - 1] = m
        if m:
            pd = cat.proj(v).dims
            for u in range(cat.quiver.n):
                remaining[u] -= m * pd[u]
    if any(r != 0 for r in remaining):
        raise SpecError("component is not projective")
    return tuple(mults)


def _canonicalize_subcomplex(x: Complex, cols: dict) -> Complex:
    """Rebuild a degreewise direct summand as a canonical-basis complex.

    cols[n] spans the summand's fibres inside x_n; the span is d-stable and
    degreewise projective, so each degree is re-identified with the
    canonical sum of projectives via an explicit isomorphism.
    """
    cat = x.cat
    field = cat.field
    sub_reps = {}
    inclusions = {}
    for n in x.comps:
        c = cols[n]
        dims = tuple(m.cols for m in c)
        if sum(dims) == 0:
            continue
        maps = []
        amb = x.rep(n)
        for i, (t, h) in enumerate(cat.quiver.arrows):
            img = amb.maps[i] @ c[t - 1]
            sol = solve_matrix(c[h - 1], img)
            assert sol is not None, "summand fibres not arrow-stable"
            maps.append(sol)
        sub_reps[n] = Rep(cat.quiver, field, dims, maps)
        inclusions[n] = c
    comps = {}
    isos = {}
    for n, r in sub_reps.items():
        mults = _solve_proj_mults(cat, r.dims)
        comps[n] = mults
        canon = cat.rep_of(mults)
        phi = find_iso(canon, r)
        if phi is None:
            raise SpecError("projective component failed to re-canonicalize")
        isos[n] = phi  # canon -> sub coordinates
    diffs = {}
    for n in comps:
        n1 = cat.next_deg(n)
        if n1 is None or n1 not in comps:
            continue
        dx = x.diff(n)
        d_sub = []
        for v in range(cat.quiver.n):
            # restrict d: solve cols_{n+1} Y = d cols_n, then conjugate by isos
            rhs = dx[v] @ inclusions[n][v]
            y = solve_matrix(inclusions[n1][v], rhs)
            assert y is not None, "differential does not preserve the summand"
            d_sub.append(y)
        inv1 = []
        for v in range(cat.quiver.n):
            ident = Matrix.identity(field, isos[n1][v].rows)
            inv = solve_matrix(isos[n1][v], ident)
            assert inv is not None
            inv1.append(inv)
        diffs[n] = tuple(
            inv1[v] @ d_sub[v] @ isos[n][v] for v in range(cat.quiver.n)
        )
    return Complex(cat, comps, diffs)


def decompose_cx(x: Complex, caps: Caps = DEFAULT_CAPS) -> tuple[dict[str, int], list[Complex]]:
    """Split x into cone exponents plus indecomposable minimal summands."""
    minimal, exps = strip_contractibles(x)
    return exps, _decompose_minimal(minimal, caps)


def _decompose_minimal(x: Complex, caps: Caps) -> list[Complex]:
    if x.is_zero():
        return []
    basis = hom_chain_basis(x, x)
    d = len(basis)
    if d == 1:
        return [x]
    p = x.cat.field.p
    if p**d > caps.max_endo_enum:
        raise EndoSearchCapExceeded(
            f"|End| = {p}^{d} exceeds decomposition cap {caps.max_endo_enum}"
        )
    for coeffs in itertools.product(range(p), repeat=d):
        if not any(coeffs):
            continue
        phi = _chain_endo_combine(x, basis, coeffs)
        split = _fitting_split_cx(x, phi)
        if split is not None:
            a, b = split
            return _decompose_minimal(a, caps) + _decompose_minimal(b, caps)
    return [x]


def find_chain_iso(x: Complex, y: Complex, caps: Caps = DEFAULT_CAPS) -> dict | None:
    """Chain map x -> y invertible in every degree, or None."""
    if sorted(x.comps) != sorted(y.comps):
        return None
    for n in x.comps:
        if x.mults(n) != y.mults(n):
            return None
    if x.encoding() == y.encoding():
        return {
            n: tuple(Matrix.identity(x.cat.field, d) for d in x.rep(n).dims)
            for n in x.comps
        }
    basis = hom_chain_basis(x, y)
    d = len(basis)
    p = x.cat.field.p
    if p**d > caps.max_hom_enum:
        raise IsoEnumCapExceeded(
            f"|Hom| = {p}^{d} exceeds iso search cap {caps.max_hom_enum}"
        )
    for coeffs in itertools.product(range(p), repeat=d):
        if not any(coeffs):
            continue
        out = {}
        ok = True
        for n in x.comps:
            dims = x.rep(n).dims
            acc = [np.zeros((dd, dd), dtype=np.int64) for dd in dims]
            for cf, b in zip(coeffs, basis):
                if cf and n in b:
                    for v in range(len(dims)):
                        acc[v] += cf * b[n][v].a
            mats = tuple(Matrix(x.cat.field, a % p) for a in acc)
            if any(rank(m) != dims[v] for v, m in enumerate(mats)):
                ok = False
                break
            out[n] = mats
        if ok:
            return out
    return None


def iso_test_cx(x: Complex, y: Complex, caps: Caps = DEFAULT_CAPS) -> bool:
    """Strict isomorphism of complexes (contractible parts must match too)."""
    if x.cat != y.cat:
        return False
    if {n: x.mults(n) for n in x.comps} != {n: y.mults(n) for n in y.comps}:
        return False
    if x.encoding() == y.encoding():
        return True
    if hom_dim_cx(x, x) != hom_dim_cx(y, y) or hom_dim_cx(x, y) != hom_dim_cx(x, x):
        return False
    mx, ex = strip_contractibles(x)
    my, ey = strip_contractibles(y)
    if ex != ey:
        return False
    return stable_iso_test_minimal(mx, my, caps)


def stable_iso_test_minimal(mx: Complex, my: Complex, caps: Caps = DEFAULT_CAPS) -> bool:
    """Isomorphism of minimal complexes (equal to homotopy equivalence)."""
    if {n: mx.mults(n) for n in mx.comps} != {n: my.mults(n) for n in my.comps}:
        return False
    if mx.encoding() == my.encoding():
        return True
    if stable_hom_dim(mx, mx) != stable_hom_dim(my, my):
        return False
    return find_chain_iso(mx, my, caps) is not None


def stable_iso_test(x: Complex, y: Complex, caps: Caps = DEFAULT_CAPS) -> bool:
    """Homotopy equivalence: minimal models isomorphic."""
    mx, _ = strip_contractibles(x)
    my, _ = strip_contractibles(y)
    return stable_iso_test_minimal(mx, my, caps)


# ---- enumeration ----


def _mult_options(cat: ComplexCategory, max_degree_dim: int | None, max_total_dim: int | None):
    """Multiplicity vectors allowed at a single degree, graded-lex order."""
    bound = max_degree_dim if max_degree_dim is not None else max_total_dim
    per_gen = []
    for i in range(1, cat.quiver.n + 1):
        di = cat.proj(i).total_dim()
        per_gen.append(range(bound // di + 1))
    opts = []
    for mults in itertools.product(*per_gen):
        dim = cat.mult_dim(mults)
        if max_degree_dim is not None and dim > max_degree_dim:
            continue
        if max_total_dim is not None and dim > max_total_dim:
            continue
        opts.append(tuple(mults))
    opts.sort(key=lambda m: (cat.mult_dim(m), m))
    return opts


def enumerate_complexes(
    cat: ComplexCategory,
    max_degree_dim: int | None = None,
    max_total_dim: int | None = None,
    caps: Caps = DEFAULT_CAPS,
    registry=None,
):
    """Register every iso class of complexes within the dimension caps.

    Profiles run over the user window (bounded) or all residues (periodic),
    graded-lex by total dimension; differentials enumerate lexicographically
    over per-pair hom bases and are kept when d d = 0.
    """
    if max_degree_dim is None and max_total_dim is None:
        raise SpecError("need a per-degree or total dimension cap")
    if registry is None:
        registry = cx_registry(cat, caps)
    degs = cat.degrees()
    opts = _mult_options(cat, max_degree_dim, max_total_dim)
    field = cat.field
    p = field.p
    profiles = []
    for combo in itertools.product(opts, repeat=len(degs)):
        total = sum(cat.mult_dim(m) for m in combo)
        if max_total_dim is not None and total > max_total_dim:
            continue
        profiles.append((total, combo))
    profiles.sort(key=lambda t: (t[0], tuple(itertools.chain.from_iterable(t[1]))))
    for _, combo in profiles:
        comps = {n: m for n, m in zip(degs, combo) if any(m)}
        pairs = []
        hom_bases = {}
        count = 1
        for n in comps:
            n1 = cat.next_deg(n)
            if n1 is None or n1 not in comps:
                continue
            hb = hom_basis(cat.rep_of(comps[n]), cat.rep_of(comps[n1]))
            pairs.append(n)
            hom_bases[n] = hb
            count *= p ** len(hb)
        if count > caps.max_enum:
            raise EnumCapExceeded(
                f"{count} differential tuples at profile {comps} exceed cap {caps.max_enum}"
            )
        total_vars = sum(len(hom_bases[n]) for n in pairs)
        for flat in itertools.product(range(p), repeat=total_vars):
            diffs = {}
            pos = 0
            for n in pairs:
                hb = hom_bases[n]
                coeffs = flat[pos:pos + len(hb)]
                pos += len(hb)
                tgt = cat.rep_of(comps[cat.next_deg(n)])
                src = cat.rep_of(comps[n])
                mats = []
                for v in range(cat.quiver.n):
                    acc = np.zeros((tgt.dims[v], src.dims[v]), dtype=np.int64)
                    for cf, b in zip(coeffs, hb):
                        if cf:
                            acc += cf * b[v].a
                    mats.append(Matrix(field, acc % p))
                diffs[n] = tuple(mats)
            # keep only genuine complexes
            ok = True
            for n in pairs:
                n1 = cat.next_deg(n)
                if n1 in diffs:
                    for v in range(cat.quiver.n):
                        if not (diffs[n1][v] @ diffs[n][v]).is_zero():
                            ok = False
                            break
                if not ok:
                    break
            if not ok:
                continue
            registry.classify(Complex(cat, comps, diffs, validate=False))
    return registry


def cx_registry(cat: ComplexCategory, caps: Caps = DEFAULT_CAPS) -> Registry:
    return Registry(
        lambda a, b: iso_test_cx(a, b, caps),
        lambda c: tuple((n, c.comps[n]) for n in sorted(c.comps)),
    )


def stable_registry(cat: ComplexCategory, caps: Caps = DEFAULT_CAPS) -> Registry:
    """Registry of minimal complexes up to isomorphism (stable classes)."""
    return Registry(
        lambda a, b: stable_iso_test_minimal(a, b, caps),
        lambda c: tuple((n, c.comps[n]) for n in sorted(c.comps)),
    )
