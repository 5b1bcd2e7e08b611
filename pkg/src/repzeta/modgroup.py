"""Fully enumerated finite matrix groups SL_d over finite local rings,
small oracle groups, conjugacy data and congruence filtrations.

Groups expose one interface: an indexed element list with O(1) lookup,
multiplication and inversion.  SL_d is enumerated by breadth-first
closure from elementary transvections (deterministic ordering, layers
tie-broken by the canonical matrix encoding); an exhaustive determinant
scan is kept as an oracle for small rings.

Cache file layout (little-endian, written by save_group):
    magic  b"RZG1"
    u8     kind (0 zmod, 1 tpoly, 2 gf)
    u32    p, u32 level-or-degree, u32 d, u64 order
    u64 *  order * d*d entries, each ring element in encoding order
    u8     1 if conjugacy block follows else 0
    [u32 k; then per class: u64 rep index, u64 size; then order * u32 class_of]
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from itertools import permutations
from math import gcd, inf

from .localring import LocalRing


class SizeLimitError(RuntimeError):
    """Enumeration would exceed the configured element budget."""

    def __init__(self, projected_order, budget):
        self.projected_order = projected_order
        self.budget = budget
        super().__init__(
            f"projected order {projected_order} exceeds budget {budget}")


DEFAULT_BUDGET = 2_000_000


class FiniteGroup:
    """Indexed element list plus multiplication; subclasses define the law."""

    def __init__(self, elements, name=""):
        self.elements = list(elements)
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.order = len(self.elements)
        self.name = name
        self.identity_idx = self.index[self._identity()]

    def _identity(self):
        raise NotImplementedError

    def _mul(self, a, b):
        raise NotImplementedError

    def _inv(self, a):
        raise NotImplementedError

    def mul_idx(self, i, j):
        return self.index[self._mul(self.elements[i], self.elements[j])]

    def inv_idx(self, i):
        return self.index[self._inv(self.elements[i])]

    def conj_generator_idxs(self):
        """Small generating set used to run conjugation orbits."""
        return [i for i in range(self.order) if i != self.identity_idx]

    def element_order(self, i):
        g = self.elements[i]
        e = self._identity()
        x, n = g, 1
        while x != e:
            x = self._mul(x, g)
            n += 1
        return n


class PermGroup(FiniteGroup):
    """Permutations of range(n) as tuples, composed left-to-right on points."""

    def __init__(self, perms, name="", generators=None):
        self._gens = generators
        super().__init__(perms, name=name)

    def _identity(self):
        n = len(self.elements[0])
        return tuple(range(n))

    def _mul(self, a, b):
        return tuple(a[b[i]] for i in range(len(a)))

    def _inv(self, a):
        out = [0] * len(a)
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    def conj_generator_idxs(self):
        if self._gens:
            return [self.index[g] for g in self._gens]
        return super().conj_generator_idxs()


class TableGroup(FiniteGroup):
    """Small group given by an explicit multiplication function on labels."""

    def __init__(self, elements, mul, identity, name=""):
        self._mulfun = mul
        self._id = identity
        super().__init__(elements, name=name)
        self._invmap = {}
        for g in self.elements:
            for h in self.elements:
                if mul(g, h) == identity:
                    self._invmap[g] = h
                    break

    def _identity(self):
        return self._id

    def _mul(self, a, b):
        return self._mulfun(a, b)

    def _inv(self, a):
        return self._invmap[a]


class MatGroup(FiniteGroup):
    """Matrix group over a LocalRing; elements are flat d*d entry tuples."""

    def __init__(self, ring: LocalRing, d: int, elements, generators=(),
                 name=""):
        self.ring = ring
        self.d = d
        self._generators = list(generators)
        super().__init__(elements, name=name or f"mat{d}({ring})")

    def _identity(self):
        ring, d = self.ring, self.d
        one, zero = ring.one, ring.zero
        return tuple(one if i == j else zero
                     for i in range(d) for j in range(d))

    def _mul(self, a, b):
        ring, d = self.ring, self.d
        mul, add = ring.mul, ring.add
        out = []
        for i in range(d):
            row = a[i * d:(i + 1) * d]
            for j in range(d):
                acc = mul(row[0], b[j])
                for k in range(1, d):
                    acc = add(acc, mul(row[k], b[k * d + j]))
                out.append(acc)
        return tuple(out)

    def _inv(self, a):
        ring, d = self.ring, self.d
        if d == 2:
            # adjugate; determinant is 1 for all our groups
            det = ring.sub(ring.mul(a[0], a[3]), ring.mul(a[1], a[2]))
            dinv = ring.inverse(det)
            return (ring.mul(a[3], dinv), ring.mul(ring.neg(a[1]), dinv),
                    ring.mul(ring.neg(a[2]), dinv), ring.mul(a[0], dinv))
        return _mat_inv_gauss(ring, d, a)

    def conj_generator_idxs(self):
        if self._generators:
            return list(self._generators)
        return super().conj_generator_idxs()

    def encode_matrix(self, m):
        enc = self.ring.encode
        return tuple(enc(x) for x in m)


def _mat_inv_gauss(ring, d, a):
    """Gauss-Jordan over a local ring; pivots must be units (a invertible)."""
    rows = [list(a[i * d:(i + 1) * d]) + [ring.one if j == i else ring.zero
                                          for j in range(d)]
            for i in range(d)]
    for c in range(d):
        piv = next(r for r in range(c, d) if ring.is_unit(rows[r][c]))
        rows[c], rows[piv] = rows[piv], rows[c]
        inv = ring.inverse(rows[c][c])
        rows[c] = [ring.mul(x, inv) for x in rows[c]]
        for r in range(d):
            if r != c and rows[r][c] != ring.zero:
                f = rows[r][c]
                rows[r] = [ring.sub(x, ring.mul(f, y))
                           for x, y in zip(rows[r], rows[c])]
    return tuple(rows[i][d + j] for i in range(d) for j in range(d))


def det(ring: LocalRing, d: int, m) -> "ring element":
    """Determinant by cofactor expansion (small d only)."""
    if d == 1:
        return m[0]
    if d == 2:
        return ring.sub(ring.mul(m[0], m[3]), ring.mul(m[1], m[2]))
    total = ring.zero
    for perm in permutations(range(d)):
        sign = 1
        seen = list(perm)
        for i in range(d):  # count inversions
            for j in range(i + 1, d):
                if seen[i] > seen[j]:
                    sign = -sign
        term = ring.one
        for i in range(d):
            term = ring.mul(term, m[i * d + perm[i]])
        total = ring.add(total, term if sign > 0 else ring.neg(term))
    return total


def sl_order(ring: LocalRing, d: int) -> int:
    """|SL_d(R)| for a finite local ring R with residue field size q0."""
    q0 = ring.p ** ring.degree
    gl = 1
    for i in range(d):
        gl *= q0 ** d - q0 ** i
    base = gl // (q0 - 1)
    levels = ring.r if ring.kind != "gf" else 1
    return base * q0 ** ((d * d - 1) * (levels - 1))


def _additive_basis(ring: LocalRing):
    if ring.kind == "zmod":
        return [ring.one]
    width = ring.degree if ring.kind == "gf" else ring.r
    out = []
    for j in range(width):
        out.append(tuple(1 if i == j else 0 for i in range(width)))
    return out


def elementary_generators(ring: LocalRing, d: int):
    """Transvections I +/- u*E_ab for u ranging over an additive basis."""
    one, zero = ring.one, ring.zero
    identity = [one if i == j else zero for i in range(d) for j in range(d)]
    gens = []
    for a in range(d):
        for b in range(d):
            if a == b:
                continue
            for u in _additive_basis(ring):
                for s in (u, ring.neg(u)):
                    m = list(identity)
                    m[a * d + b] = s
                    gens.append(tuple(m))
    # dedupe, preserve order
    seen, out = set(), []
    for g in gens:
        if g not in seen:
            seen.add(g)
            out.append(g)
    return out


def build_sl(d: int, ring: LocalRing, budget: int = DEFAULT_BUDGET) -> MatGroup:
    """Enumerate SL_d(ring) by breadth-first closure from transvections."""
    projected = sl_order(ring, d)
    if projected > budget:
        raise SizeLimitError(projected, budget)
    if ring.cardinality == 1:
        zero = ring.zero
        e = tuple(zero for _ in range(d * d))
        return MatGroup(ring, d, [e], generators=[0], name=f"sl{d}({ring})")
    gens = elementary_generators(ring, d)
    enc = ring.encode
    mulfn = _make_matmul(ring, d)
    identity = tuple(ring.one if i == j else ring.zero
                     for i in range(d) for j in range(d))
    elements = [identity]
    visited = {identity}
    frontier = [identity]
    while frontier:
        new = set()
        for m in frontier:
            for g in gens:
                prod = mulfn(m, g)
                if prod not in visited:
                    new.add(prod)
        frontier = sorted(new, key=lambda m: tuple(enc(x) for x in m))
        visited.update(frontier)
        elements.extend(frontier)
    if len(elements) != projected:
        raise AssertionError(
            f"closure found {len(elements)} elements, expected {projected}")
    group = MatGroup(ring, d, elements, name=f"sl{d}({ring})")
    group._generators = [group.index[g] for g in gens]
    return group


def _make_matmul(ring, d):
    mul, add = ring.mul, ring.add

    def mm(a, b):
        out = []
        for i in range(d):
            row = a[i * d:(i + 1) * d]
            for j in range(d):
                acc = mul(row[0], b[j])
                for k in range(1, d):
                    acc = add(acc, mul(row[k], b[k * d + j]))
                out.append(acc)
        return tuple(out)

    return mm


def build_sl_by_scan(d: int, ring: LocalRing) -> MatGroup:
    """Oracle: all d x d matrices with determinant 1, by exhaustive scan."""
    n = ring.cardinality ** (d * d)
    if n > 5_000_000:
        raise SizeLimitError(n, 5_000_000)
    elems = []
    one = ring.one
    all_entries = list(ring.elements())
    card = ring.cardinality

    def rec(prefix):
        if len(prefix) == d * d:
            if det(ring, d, prefix) == one:
                elems.append(tuple(prefix))
            return
        for x in all_entries:
            rec(prefix + [x])

    rec([])
    enc = ring.encode
    elems.sort(key=lambda m: tuple(enc(x) for x in m))
    return MatGroup(ring, d, elems, name=f"sl{d}scan({ring})")


# ---------------------------------------------------------------------------
# named oracle groups


def _quaternion8():
    axes = "1ijk"
    mul_axis = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"),
        ("1", "k"): (1, "k"), ("i", "1"): (1, "i"), ("j", "1"): (1, "j"),
        ("k", "1"): (1, "k"), ("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"),
        ("k", "k"): (-1, "1"), ("i", "j"): (1, "k"), ("j", "i"): (-1, "k"),
        ("j", "k"): (1, "i"), ("k", "j"): (-1, "i"), ("k", "i"): (1, "j"),
        ("i", "k"): (-1, "j"),
    }
    elements = [(s, a) for a in axes for s in (1, -1)]

    def mul(x, y):
        s, a = mul_axis[(x[1], y[1])]
        return (x[0] * y[0] * s, a)

    return TableGroup(elements, mul, (1, "1"), name="quaternion8")


def _dihedral(n):
    """Symmetries of the regular n-gon as permutations of its vertices."""
    rot = tuple((i + 1) % n for i in range(n))
    refl = tuple((n - i) % n for i in range(n))
    return _closure_perm_group([rot, refl], name=f"dihedral_{n}")


def _closure_perm_group(gens, name):
    n = len(gens[0])
    identity = tuple(range(n))
    elems = [identity]
    seen = {identity}
    frontier = [identity]
    while frontier:
        new = set()
        for g in frontier:
            for h in gens:
                prod = tuple(g[h[i]] for i in range(n))
                if prod not in seen:
                    new.add(prod)
        frontier = sorted(new)
        seen.update(frontier)
        elems.extend(frontier)
    return PermGroup(elems, name=name, generators=gens)


def build_named(name: str) -> FiniteGroup:
    """Small test groups: symmetric_n (n<=8), dihedral_n, quaternion8, trivial."""
    alias = {"s3": "symmetric_3", "s4": "symmetric_4", "s5": "symmetric_5",
             "d4": "dihedral_4", "q8": "quaternion8"}
    name = alias.get(name, name)
    if name == "trivial":
        return TableGroup(["e"], lambda a, b: "e", "e", name="trivial")
    if name == "quaternion8":
        return _quaternion8()
    if name.startswith("symmetric_"):
        n = int(name.split("_")[1])
        if n > 8:
            raise ValueError("symmetric groups supported up to n = 8")
        perms = sorted(permutations(range(n)))
        gens = None
        if n >= 2:
            gens = [tuple([1, 0] + list(range(2, n))),
                    tuple(list(range(1, n)) + [0])]
        return PermGroup(perms, name=name, generators=gens)
    if name.startswith("dihedral_"):
        n = int(name.split("_")[1])
        if n < 3:
            raise ValueError("dihedral_n needs n >= 3")
        return _dihedral(n)
    raise ValueError(f"unknown named group {name!r}")


# ---------------------------------------------------------------------------
# conjugacy data


@dataclass
class ConjugacyData:
    reps: list            # class index -> element index of representative
    sizes: list           # class index -> class size
    class_of: list        # element index -> class index
    centralizer_orders: list
    inverse_class: list   # class index -> class index of inverses
    exponent: int

    @property
    def num_classes(self):
        return len(self.reps)


def conjugacy(G: FiniteGroup) -> ConjugacyData:
    """Orbit enumeration under conjugation by a generating set."""
    n = G.order
    gens = G.conj_generator_idxs()
    gen_elems = [G.elements[i] for i in gens]
    gen_invs = [G._inv(g) for g in gen_elems]
    class_of = [-1] * n
    orbits = []
    for start in range(n):
        if class_of[start] != -1:
            continue
        cid = len(orbits)
        orbit = [start]
        class_of[start] = cid
        frontier = [G.elements[start]]
        while frontier:
            nxt = []
            for x in frontier:
                for g, gi in zip(gen_elems, gen_invs):
                    y = G._mul(g, G._mul(x, gi))
                    idx = G.index[y]
                    if class_of[idx] == -1:
                        class_of[idx] = cid
                        orbit.append(idx)
                        nxt.append(y)
            frontier = nxt
        orbits.append(orbit)
    # sort classes by (size, representative index) and relabel
    reps = [min(o) for o in orbits]
    order_key = sorted(range(len(orbits)),
                       key=lambda c: (len(orbits[c]), reps[c]))
    relabel = {old: new for new, old in enumerate(order_key)}
    class_of = [relabel[c] for c in class_of]
    sizes = [len(orbits[c]) for c in order_key]
    reps = [reps[c] for c in order_key]
    cents = []
    for s in sizes:
        if G.order % s:
            raise AssertionError("class size does not divide group order")
        cents.append(G.order // s)
    inverse_class = [class_of[G.inv_idx(r)] for r in reps]
    expo = 1
    for r in reps:
        o = G.element_order(r)
        expo = expo * o // gcd(expo, o)
    return ConjugacyData(reps, sizes, class_of, cents, inverse_class, expo)


# ---------------------------------------------------------------------------
# congruence filtration and quotients


@dataclass
class CongruenceFiltration:
    levels: int
    kernels: list  # level i -> frozenset of element indices with g = 1 mod m^i


def _one_level(G: MatGroup, g) -> int:
    """Largest i <= r with g congruent to the identity at level i."""
    ring = G.ring
    r = ring.r
    lvl = r
    idm = G.elements[G.identity_idx]
    for a, b in zip(g, idm):
        v = ring.valuation(ring.sub(a, b))
        if v is inf:
            continue
        if v < lvl:
            lvl = v
            if lvl == 0:
                break
    return lvl


def congruence_filtration(G: MatGroup) -> CongruenceFiltration:
    r = G.ring.r
    buckets = [[] for _ in range(r + 1)]
    for i, g in enumerate(G.elements):
        buckets[_one_level(G, g)].append(i)
    kernels = []
    acc = set()
    for lvl in range(r, -1, -1):
        acc.update(buckets[lvl])
        kernels.append(frozenset(acc))
    kernels.reverse()  # kernels[i] = K_i
    return CongruenceFiltration(r, kernels)


def quotient_group(G: MatGroup, level: int) -> MatGroup:
    """G / K_level realized as the projected matrix group at that level."""
    ring_i = G.ring.at_level(level)
    res = G.ring.residue_map
    seen = {}
    elems = []
    for g in G.elements:
        img = tuple(res(x, level) for x in g)
        if img not in seen:
            seen[img] = len(elems)
            elems.append(img)
    gen_imgs = []
    for gi in G.conj_generator_idxs():
        img = tuple(res(x, level) for x in G.elements[gi])
        gen_imgs.append(seen[img])
    H = MatGroup(ring_i, G.d, elems, name=f"{G.name}/K{level}")
    H._generators = sorted(set(gen_imgs))
    return H


# ---------------------------------------------------------------------------
# cache io

_KIND_CODE = {"zmod": 0, "tpoly": 1, "gf": 2}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


def save_group(G: MatGroup, path, conj: ConjugacyData | None = None):
    ring = G.ring
    with open(path, "wb") as fh:
        fh.write(b"RZG1")
        lvl = ring.degree if ring.kind == "gf" else ring.r
        fh.write(struct.pack("<BIIIQ", _KIND_CODE[ring.kind], ring.p, lvl,
                             G.d, G.order))
        enc = ring.encode
        for m in G.elements:
            fh.write(struct.pack(f"<{G.d * G.d}Q", *(enc(x) for x in m)))
        if conj is None:
            fh.write(struct.pack("<B", 0))
        else:
            fh.write(struct.pack("<B", 1))
            k = conj.num_classes
            fh.write(struct.pack("<I", k))
            for r, s in zip(conj.reps, conj.sizes):
                fh.write(struct.pack("<QQ", r, s))
            fh.write(struct.pack(f"<{G.order}I", *conj.class_of))


def load_group(path):
    with open(path, "rb") as fh:
        if fh.read(4) != b"RZG1":
            raise ValueError("not a group cache file")
        kind_c, p, lvl, d, order = struct.unpack("<BIIIQ", fh.read(21))
        kind = _KIND_NAME[kind_c]
        if kind == "gf":
            ring = LocalRing("gf", p, 1, degree=lvl)
        else:
            ring = LocalRing(kind, p, lvl)
        elems = []
        sz = d * d
        for _ in range(order):
            codes = struct.unpack(f"<{sz}Q", fh.read(8 * sz))
            elems.append(tuple(ring.decode(c) for c in codes))
        G = MatGroup(ring, d, elems)
        conj = None
        (has_conj,) = struct.unpack("<B", fh.read(1))
        if has_conj:
            (k,) = struct.unpack("<I", fh.read(4))
            reps, sizes = [], []
            for _ in range(k):
                r, s = struct.unpack("<QQ", fh.read(16))
                reps.append(r)
                sizes.append(s)
            class_of = list(struct.unpack(f"<{order}I", fh.read(4 * order)))
            cents = [order // s for s in sizes]
            inv_cls = [class_of[G.inv_idx(r)] for r in reps]
            expo = 1
            for r in reps:
                o = G.element_order(r)
                expo = expo * o // gcd(expo, o)
            conj = ConjugacyData(reps, sizes, class_of, cents, inv_cls, expo)
    return G, conj
