"""Commutator word-map engine: fiber counts via class-algebra
convolution, zeta values from fibers, identity checks against the
mod-l character data, congruence density profiles, stabilization and
cross-characteristic runs.

Everything here is exact: counts are integers, densities and zeta
values are Fractions.  A brute-force tuple enumerator is kept as the
oracle for small groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .charzeta import ClassConstants, ModCharTable, class_constants, \
    dixon_mod_table, zeta_even
from .localring import LocalRing
from .modgroup import ConjugacyData, FiniteGroup, MatGroup, SizeLimitError, \
    build_sl, congruence_filtration, conjugacy, quotient_group


@dataclass
class ClassFunction:
    """Exact values indexed by conjugacy class."""

    values: list
    conj: ConjugacyData

    def mass(self):
        return sum(s * v for s, v in zip(self.conj.sizes, self.values))


def commutator_distribution(G: FiniteGroup, cj: ConjugacyData | None = None,
                            cc: ClassConstants | None = None,
                            inverses: list | None = None) -> ClassFunction:
    """c(g) = #{(x, y) : x y x^-1 y^-1 = g}, one value per class.

    For fixed x the commutator sweeps the class of x^-1 shifted by x,
    each value hit |centralizer(x)| times, so
    c(g) = sum_x |Cent(x)| [x^-1 g in class(x^-1)].  With the class
    constants available this collapses to a class-indexed sum.
    """
    if cj is None:
        cj = conjugacy(G)
    k = cj.num_classes
    if cc is not None:
        # #{x in C_i : x^-1 z_k in C_{i*}} = a[i][i*][k]
        vals = [0] * k
        for i in range(k):
            cent = G.order // cj.sizes[i]
            row = cc.a[i][cj.inverse_class[i]]
            for m in range(k):
                if row[m]:
                    vals[m] += cent * row[m]
        return ClassFunction(vals, cj)
    class_of = cj.class_of
    reps = [G.elements[r] for r in cj.reps]
    vals = [0] * k
    if inverses is None:
        inverses = [G._inv(g) for g in G.elements]
    index, mul = G.index, G._mul
    for x_idx, x_inv in enumerate(inverses):
        cent = G.order // cj.sizes[class_of[x_idx]]
        target = class_of[index[x_inv]]
        for m in range(k):
            if class_of[index[mul(x_inv, reps[m])]] == target:
                vals[m] += cent
    return ClassFunction(vals, cj)


def convolve(f: ClassFunction, h: ClassFunction,
             cc: ClassConstants) -> ClassFunction:
    """(f * h)(z_m) = sum_{i,j} f_i h_j a[i][j][m]."""
    k = f.conj.num_classes
    out = [0] * k
    a = cc.a
    for i, fi in enumerate(f.values):
        if not fi:
            continue
        ai = a[i]
        for j, hj in enumerate(h.values):
            if not hj:
                continue
            fh = fi * hj
            row = ai[j]
            for m in range(k):
                if row[m]:
                    out[m] += fh * row[m]
    return ClassFunction(out, f.conj)


@dataclass
class WordMapData:
    """Cached per-group data for repeated fiber computations."""

    G: FiniteGroup
    cj: ConjugacyData
    cc: ClassConstants
    base: ClassFunction            # the n = 1 commutator distribution
    powers: dict = field(default_factory=dict)

    @classmethod
    def build(cls, G, cj=None, cc=None):
        if cj is None:
            cj = conjugacy(G)
        inverses = [G._inv(g) for g in G.elements]
        if cc is None:
            cc = class_constants(G, cj, inverses=inverses)
        base = commutator_distribution(G, cj, cc=cc)
        return cls(G, cj, cc, base, {1: base})

    def fibers(self, n: int) -> ClassFunction:
        if n not in self.powers:
            self.powers[n] = convolve(self.fibers(n - 1), self.base, self.cc)
        return self.powers[n]


def fiber_count(G: FiniteGroup, n: int, g_idx: int,
                data: WordMapData | None = None) -> int:
    """#{(x_1,y_1..x_n,y_n) : product of commutators = g}, exact."""
    if n < 1:
        raise ValueError("need n >= 1")
    if data is None:
        data = WordMapData.build(G)
    return data.fibers(n).values[data.cj.class_of[g_idx]]


def zeta_from_fibers(G: FiniteGroup, n: int,
                     data: WordMapData | None = None) -> Fraction:
    """fiber count at the identity over |G|^(2n-1); equals zeta at 2n-2."""
    if n < 2:
        raise ValueError("need n >= 2")
    if data is None:
        data = WordMapData.build(G)
    cnt = fiber_count(G, n, G.identity_idx, data)
    return Fraction(cnt, G.order ** (2 * n - 1))


# ---------------------------------------------------------------------------
# brute-force oracles


def bf_commutator_distribution(G: FiniteGroup) -> dict:
    """Direct pair enumeration; element index -> count."""
    counts = {i: 0 for i in range(G.order)}
    inv = [G._inv(g) for g in G.elements]
    for x_i, x in enumerate(G.elements):
        for y_i, y in enumerate(G.elements):
            c = G._mul(G._mul(x, y), G._mul(inv[x_i], inv[y_i]))
            counts[G.index[c]] += 1
    return counts


def bf_fiber_count(G: FiniteGroup, n: int, g_idx: int,
                   limit: int = 20_000_000) -> int:
    """Literal enumeration of G^(2n); guarded by a tuple-count limit."""
    if G.order ** (2 * n) > limit:
        raise SizeLimitError(G.order ** (2 * n), limit)
    comm = [[0] * G.order for _ in range(G.order)]
    inv = [G._inv(g) for g in G.elements]
    for x_i, x in enumerate(G.elements):
        for y_i, y in enumerate(G.elements):
            c = G._mul(G._mul(x, y), G._mul(inv[x_i], inv[y_i]))
            comm[x_i][y_i] = G.index[c]
    total = 0
    idxs = range(G.order)
    if n == 1:
        for x in idxs:
            row = comm[x]
            for y in idxs:
                if row[y] == g_idx:
                    total += 1
        return total
    if n == 2:
        mul = G.mul_idx
        for x1 in idxs:
            row1 = comm[x1]
            for y1 in idxs:
                c1 = row1[y1]
                for x2 in idxs:
                    row2 = comm[x2]
                    for y2 in idxs:
                        if mul(c1, row2[y2]) == g_idx:
                            total += 1
        return total
    raise ValueError("brute force supported for n <= 2")


# ---------------------------------------------------------------------------
# identity check against the mod-l tables


@dataclass
class FrobeniusReport:
    group: str
    n: int
    primes: list
    checked: int
    violations: list

    @property
    def ok(self):
        return not self.violations


def frobenius_identity_check(G: FiniteGroup, n: int, num_primes: int = 3,
                             data: WordMapData | None = None,
                             seed: int = 0) -> FrobeniusReport:
    """Fiber counts vs |G|^(2n-1) * sum_s chi_s(g) / d_s^(2n-1), mod each l."""
    if data is None:
        data = WordMapData.build(G)
    fib = data.fibers(n)
    k = data.cj.num_classes
    primes, violations = [], []
    for skip in range(num_primes):
        table = dixon_mod_table(G, data.cj, data.cc, seed=seed,
                                skip_primes=skip)
        ell = table.ell
        primes.append(ell)
        pref = pow(G.order, 2 * n - 1, ell)
        for i in range(k):
            rhs = 0
            for s in range(k):
                dinv = pow(table.degrees[s], -(2 * n - 1), ell)
                rhs = (rhs + table.chi[s][i] * dinv) % ell
            rhs = rhs * pref % ell
            lhs = fib.values[i] % ell
            if lhs != rhs:
                violations.append({"ell": ell, "class": i,
                                   "lhs": lhs, "rhs": rhs})
    return FrobeniusReport(G.name, n, primes, num_primes * k, violations)


# ---------------------------------------------------------------------------
# congruence density profiles, stabilization, cross-characteristic


@dataclass
class DensityProfile:
    level: int
    density: Fraction
    zeta_quotient: Fraction
    match: bool


def congruence_density_profile(d: int, p: int, r: int, n: int,
                               ring_kind: str = "zmod",
                               budget: int = 2_000_000,
                               seed: int = 0) -> list:
    """D_i = #preimage(K_i) * [G:K_i] / |G|^(2n) for i = 0..r, each checked
    against the quotient's zeta value computed from character degrees."""
    ring = LocalRing(ring_kind, p, r)
    G = build_sl(d, ring, budget=budget)
    data = WordMapData.build(G)
    fib = data.fibers(n)
    filt = congruence_filtration(G)
    out = []
    for i in range(r + 1):
        K = filt.kernels[i]
        mass = 0
        for cls_idx, rep in enumerate(data.cj.reps):
            if rep in K:
                mass += data.cj.sizes[cls_idx] * fib.values[cls_idx]
        index = G.order // len(K)
        dens = Fraction(mass * index, G.order ** (2 * n))
        Q = quotient_group(G, i)
        zq = zeta_even(Q, 2 * n - 2, seed=seed)
        out.append(DensityProfile(i, dens, zq, dens == zq))
    return out


@dataclass
class StabilizationRow:
    level: int
    order: int
    zeta: Fraction
    increment: Fraction | None


@dataclass
class StabilizationTable:
    family: str
    d: int
    p: int
    n: int
    rows: list
    truncated: bool


def stabilization_series(d: int, p: int, r_max: int, n: int,
                         ring_kind: str = "zmod",
                         budget: int = 2_000_000) -> StabilizationTable:
    """zeta at 2n-2 for the level-i groups, i = 1..r_max, with increments."""
    rows = []
    truncated = False
    prev = None
    for i in range(1, r_max + 1):
        ring = LocalRing(ring_kind, p, i)
        try:
            G = build_sl(d, ring, budget=budget)
        except SizeLimitError:
            truncated = True
            break
        z = zeta_from_fibers(G, n)
        inc = None if prev is None else z - prev
        rows.append(StabilizationRow(i, G.order, z, inc))
        prev = z
    return StabilizationTable("sl", d, p, n, rows, truncated)


@dataclass
class CrossCharReport:
    p: int
    r: int
    n: int
    zeta_zmod: Fraction
    zeta_tpoly: Fraction

    @property
    def equal(self):
        return self.zeta_zmod == self.zeta_tpoly


def cross_char_compare(p: int, r: int, n: int,
                       budget: int = 2_000_000) -> CrossCharReport:
    """Independent builds over Z/p^r and F_p[t]/t^r; equality is reported,
    never assumed (the guarantee only covers large residue characteristic)."""
    za = zeta_from_fibers(build_sl(2, LocalRing("zmod", p, r), budget=budget),
                          n)
    zb = zeta_from_fibers(build_sl(2, LocalRing("tpoly", p, r), budget=budget),
                          n)
    return CrossCharReport(p, r, n, za, zb)
