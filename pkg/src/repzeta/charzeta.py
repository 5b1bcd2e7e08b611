"""Class-algebra constants, eigenvector character data modulo a large
prime, and exact zeta special values from irreducible degrees.

The character-side engine works entirely modulo a prime l chosen with
l = 1 (mod exponent) and l > 2|G|: the class matrices then split over
the l-element field, lifted squared degrees are unique below l, and all
identities we verify are l-integral.  No cyclotomic lifting is done.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .localring import is_prime
from .modgroup import ConjugacyData, FiniteGroup, conjugacy


class DegenerateSplittingError(RuntimeError):
    """Random eigen-splitting failed to reach one-dimensional spaces."""


class InternalInconsistencyError(RuntimeError):
    """A lifted squared degree was not a perfect square (table is wrong)."""


@dataclass
class ClassConstants:
    """a[i][j][k] = #{(u,v) in C_i x C_j : uv = z_k} for class reps z_k."""

    a: list
    conj: ConjugacyData

    @property
    def num_classes(self):
        return self.conj.num_classes


def class_constants(G: FiniteGroup, cj: ConjugacyData | None = None,
                    inverses: list | None = None) -> ClassConstants:
    """One pass over u in G: increment a[cls(u)][cls(u^-1 z_k)][k]."""
    if cj is None:
        cj = conjugacy(G)
    k = cj.num_classes
    a = [[[0] * k for _ in range(k)] for _ in range(k)]
    reps = [G.elements[r] for r in cj.reps]
    class_of = cj.class_of
    index = G.index
    mul = G._mul
    if inverses is None:
        inverses = [G._inv(g) for g in G.elements]
    for u_idx, u_inv in enumerate(inverses):
        ai = a[class_of[u_idx]]
        for kk in range(k):
            j = class_of[index[mul(u_inv, reps[kk])]]
            ai[j][kk] += 1
    return ClassConstants(a, cj)


def class_constants_bruteforce(G: FiniteGroup, cj: ConjugacyData) -> list:
    """Oracle: direct O(|G|^2) pair enumeration."""
    k = cj.num_classes
    a = [[[0] * k for _ in range(k)] for _ in range(k)]
    rep_index = {G.elements[r]: kk for kk, r in enumerate(cj.reps)}
    cls = cj.class_of
    for ui, u in enumerate(G.elements):
        for vi, v in enumerate(G.elements):
            kk = rep_index.get(G._mul(u, v))
            if kk is not None:
                a[cls[ui]][cls[vi]][kk] += 1
    return a


# ---------------------------------------------------------------------------
# linear algebra over the l-element field


def _rref(rows, ell):
    """Reduced row echelon form in place; returns pivot column list."""
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, ell)
        rows[r] = [x * inv % ell for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % ell for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    del rows[r:]
    return pivots


def _kernel(mat, ell):
    """Basis rows of {v : v * mat = 0} for a square matrix, mod ell."""
    n = len(mat)
    # transpose so kernel rows become solutions of M^T x = 0
    rows = [[mat[j][i] for j in range(n)] for i in range(n)]
    work = [row[:] for row in rows]
    pivots = _rref(work, ell)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * n
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-work[r][fc]) % ell
        basis.append(v)
    return basis


def _mat_vec(mat, vec, ell):
    return [sum(m * v for m, v in zip(row, vec)) % ell for row in mat]


def _minpoly(mat, ell, rng):
    """Minimal polynomial via Krylov iteration from random vectors.

    For the diagonalizable matrices we meet, the result is squarefree and
    splits over F_ell; a bad random start is caught by the callers'
    dimension bookkeeping and retried.
    """
    n = len(mat)
    poly = [1]  # lcm accumulator, ascending coefficients
    for _ in range(3):
        vec = [rng.randrange(ell) for _ in range(n)]
        krylov = [vec]
        rows = [vec[:]]
        pivots = _rref(rows, ell)
        ann = None
        v = vec
        for step in range(1, n + 1):
            v = _mat_vec(mat, v, ell)
            # express v against current rref to detect dependence
            resid = v[:]
            coeffs = [0] * step
            for r, pc in enumerate(pivots):
                c = resid[pc]
                if c:
                    coeffs[r] = c
                    resid = [(x - c * y) % ell
                             for x, y in zip(resid, rows[r])]
            if not any(resid):
                # dependence found: reconstruct annihilator coefficients
                # of the krylov chain by solving against the raw vectors
                ann = _solve_dependence(krylov, v, ell)
                break
            krylov.append(v)
            rows.append(resid)
            # rref bookkeeping: resid already reduced; find its pivot
            pc = next(i for i, x in enumerate(resid) if x)
            inv = pow(resid[pc], -1, ell)
            rows[-1] = [x * inv % ell for x in resid]
            for r in range(len(rows) - 1):
                f = rows[r][pc]
                if f:
                    rows[r] = [(x - f * y) % ell
                               for x, y in zip(rows[r], rows[-1])]
            pivots.append(pc)
        if ann is None:
            ann = [0] * n + [1]
        poly = _poly_lcm(poly, ann, ell)
        if len(poly) == n + 1:
            break
    return poly


def _solve_dependence(krylov, v, ell):
    """Coefficients c with v = sum c_i krylov_i; returns monic annihilator."""
    m = len(krylov)
    n = len(v)
    aug = [[krylov[i][j] for i in range(m)] + [v[j]] for j in range(n)]
    pivots = _rref(aug, ell)
    coeffs = [0] * m
    for r, pc in enumerate(pivots):
        if pc < m:
            coeffs[pc] = aug[r][m]
    # x^m - sum coeffs_i x^i annihilates the start vector
    ann = [(-c) % ell for c in coeffs] + [1]
    return ann


def _poly_lcm(f, g, ell):
    h = _poly_gcd(f, g, ell)
    q, _ = _poly_divmod(_poly_mul(f, g, ell), h, ell)
    return q


def _poly_mul(f, g, ell):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % ell
    return out


def _poly_trim(f):
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _poly_divmod(f, g, ell):
    f = f[:]
    g = _poly_trim(g[:])
    dg = len(g) - 1
    inv = pow(g[-1], -1, ell)
    q = [0] * max(1, len(f) - dg)
    while len(f) - 1 >= dg and any(f):
        df = len(f) - 1
        if f[-1] == 0:
            f.pop()
            continue
        c = f[-1] * inv % ell
        q[df - dg] = c
        for i in range(dg + 1):
            f[df - dg + i] = (f[df - dg + i] - c * g[i]) % ell
        f.pop()
    return q, _poly_trim(f if f else [0])


def _poly_gcd(f, g, ell):
    f, g = _poly_trim(f[:]), _poly_trim(g[:])
    while any(g) and len(g) > 1 or (len(g) == 1 and g[0]):
        _, rem = _poly_divmod(f, g, ell)
        f, g = g, rem
        if len(g) == 1 and g[0] == 0:
            break
    inv = pow(f[-1], -1, ell)
    return [x * inv % ell for x in f]


def _poly_pow_mod(base, e, mod, ell):
    result = [1]
    base = _poly_divmod(base, mod, ell)[1]
    while e:
        if e & 1:
            result = _poly_divmod(_poly_mul(result, base, ell), mod, ell)[1]
        base = _poly_divmod(_poly_mul(base, base, ell), mod, ell)[1]
        e >>= 1
    return result


def _poly_roots(f, ell, rng):
    """All roots in F_ell of a squarefree polynomial that splits there."""
    f = _poly_trim(f[:])
    inv = pow(f[-1], -1, ell)
    f = [x * inv % ell for x in f]
    if len(f) == 1:
        return []
    if len(f) == 2:
        return [(-f[0]) % ell]
    if f[0] == 0:
        rest = _poly_roots(_poly_trim(f[1:]), ell, rng)
        return [0] + rest
    # split by gcd with (x + a)^((l-1)/2) - 1 for random shifts a
    for _ in range(64):
        a = rng.randrange(ell)
        xa = [a, 1]
        power = _poly_pow_mod(xa, (ell - 1) // 2, f, ell)
        power = power[:]
        power[0] = (power[0] - 1) % ell
        g = _poly_gcd(f, _poly_trim(power), ell)
        if 1 < len(g) < len(f):
            q, rem = _poly_divmod(f, g, ell)
            assert not any(rem)
            return _poly_roots(g, ell, rng) + _poly_roots(q, ell, rng)
    raise DegenerateSplittingError("root splitting stalled")


# ---------------------------------------------------------------------------
# the mod-l character table


@dataclass
class ModCharTable:
    ell: int
    seed: int
    degrees: list          # positive ints, one per eigen-system
    omegas: list           # omega_s[i]: central character values mod ell
    chi: list              # chi_s[i]: character values mod ell
    conj: ConjugacyData

    @property
    def num_classes(self):
        return len(self.degrees)


def dixon_prime(order: int, exponent: int, skip: int = 0) -> int:
    """Smallest prime l = 1 mod exponent with l > 2|G| (skip many allowed)."""
    m = (2 * order) // exponent + 1
    found = 0
    while True:
        ell = exponent * m + 1
        if ell > 2 * order and is_prime(ell):
            if found == skip:
                return ell
            found += 1
        m += 1


def dixon_mod_table(G: FiniteGroup, cj: ConjugacyData | None = None,
                    cc: ClassConstants | None = None, seed: int = 0,
                    skip_primes: int = 0, retries: int = 12) -> ModCharTable:
    """Simultaneous eigenvectors of the class matrices over F_ell.

    Random linear combinations of the commuting class matrices are
    eigen-decomposed until every invariant subspace is one-dimensional;
    degrees are recovered from the orthogonality denominator and lifted
    to the unique integer square below ell.
    """
    if cj is None:
        cj = conjugacy(G)
    if cc is None:
        cc = class_constants(G, cj)
    k = cj.num_classes
    ell = dixon_prime(G.order, cj.exponent, skip=skip_primes)
    rng = random.Random((seed, ell, G.order))
    a = cc.a

    if k == 1:
        return ModCharTable(ell, seed, [1], [[1]], [[1]], cj)

    # right eigenvectors w of N_i (N_i[j][m] = a[i][j][m]) satisfy
    # N_i w = omega_i w; we track candidate row vectors v with v N^T = mu v.
    full = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    spaces = [full]
    for attempt in range(retries):
        if all(len(B) == 1 for B in spaces):
            break
        coeffs = [rng.randrange(ell) for _ in range(k)]
        # M[j][m] = sum_i c_i a[i][j][m]; action on rows v is v -> v M^T
        M = [[0] * k for _ in range(k)]
        for i, ci in enumerate(coeffs):
            if ci:
                ai = a[i]
                for j in range(k):
                    Mj = M[j]
                    row = ai[j]
                    for m in range(k):
                        Mj[m] = (Mj[m] + ci * row[m]) % ell
        Mt = [[M[m][j] for m in range(k)] for j in range(k)]
        new_spaces = []
        for B in spaces:
            if len(B) == 1:
                new_spaces.append(B)
                continue
            new_spaces.extend(_split_space(B, Mt, ell, rng))
        spaces = new_spaces
    if not all(len(B) == 1 for B in spaces):
        raise DegenerateSplittingError(
            f"{sum(1 for B in spaces if len(B) > 1)} spaces undecomposed "
            f"after {retries} rounds")
    if len(spaces) != k:
        raise DegenerateSplittingError("eigen space count mismatch")

    id_class = cj.class_of[G.identity_idx]
    omegas, degrees, chis = [], [], []
    inv_cls = cj.inverse_class
    sizes = cj.sizes
    for (vec,) in spaces:
        if vec[id_class] == 0:
            raise DegenerateSplittingError("eigenvector vanishes at identity")
        scale = pow(vec[id_class], -1, ell)
        w = [x * scale % ell for x in vec]
        denom = 0
        for i in range(k):
            denom = (denom + w[i] * w[inv_cls[i]]
                     * pow(sizes[i], -1, ell)) % ell
        if denom == 0:
            raise InternalInconsistencyError("orthogonality denominator zero")
        d2 = G.order * pow(denom, -1, ell) % ell
        if not 1 <= d2 <= G.order:
            raise InternalInconsistencyError(
                f"lifted squared degree {d2} outside [1, |G|]")
        d = math.isqrt(d2)
        if d * d != d2:
            raise InternalInconsistencyError(
                f"lifted squared degree {d2} is not a square")
        if G.order % d:
            raise InternalInconsistencyError(
                f"degree {d} does not divide group order")
        chi = [d * w[i] * pow(sizes[i], -1, ell) % ell for i in range(k)]
        omegas.append(w)
        degrees.append(d)
        chis.append(chi)
    if sum(d * d for d in degrees) != G.order:
        raise InternalInconsistencyError("sum of squared degrees is off")
    # deterministic presentation: sort eigen-systems by (degree, omega row)
    order_key = sorted(range(k), key=lambda s: (degrees[s], omegas[s]))
    return ModCharTable(ell, seed,
                        [degrees[s] for s in order_key],
                        [omegas[s] for s in order_key],
                        [chis[s] for s in order_key], cj)


def _split_space(B, Mt, ell, rng):
    """Split an invariant row space by the action v -> v Mt, via eigenvalues."""
    m = len(B)
    work = [row[:] for row in B]
    pivots = _rref(work, ell)
    # X = action in basis coordinates: row_i * Mt expressed against rref rows
    images = [_row_times(work[i], Mt, ell) for i in range(m)]
    X = [[images[i][pc] for pc in pivots] for i in range(m)]
    # residual must vanish (invariance)
    for i in range(m):
        resid = images[i][:]
        for r, pc in enumerate(pivots):
            c = resid[pc]
            if c:
                resid = [(x - c * y) % ell for x, y in zip(resid, work[r])]
        if any(resid):
            raise DegenerateSplittingError("space not invariant")
    mp = _minpoly(X, ell, rng)
    roots = _poly_roots(mp, ell, rng)
    out = []
    total = 0
    for lam in roots:
        shifted = [[(X[i][j] - (lam if i == j else 0)) % ell
                    for j in range(m)] for i in range(m)]
        sub = []
        for kv in _kernel(shifted, ell):
            newrow = [0] * len(B[0])
            for c, brow in zip(kv, work):
                if c:
                    newrow = [(x + c * y) % ell
                              for x, y in zip(newrow, brow)]
            sub.append(newrow)
        if sub:
            _rref(sub, ell)
            out.append(sub)
            total += len(sub)
    if total != m:
        # degenerate random combination; keep the space for a retry
        return [B]
    return out


def _row_times(row, Mt, ell):
    n = len(row)
    out = [0] * n
    for i, c in enumerate(row):
        if c:
            Mi = Mt[i]
            for j in range(n):
                out[j] = (out[j] + c * Mi[j]) % ell
    return out


def orthogonality_check(table: ModCharTable) -> bool:
    """First orthogonality mod ell for all pairs of eigen-systems."""
    ell, cj = table.ell, table.conj
    k = table.num_classes
    order = sum(cj.sizes)
    for s in range(k):
        for t in range(k):
            acc = 0
            for i in range(k):
                acc = (acc + cj.sizes[i] * table.chi[s][i]
                       * table.chi[t][cj.inverse_class[i]]) % ell
            want = order % ell if s == t else 0
            if acc != want:
                return False
    return True


def zeta_even(G: FiniteGroup, s: int,
              table: ModCharTable | None = None, **kw) -> Fraction:
    """Exact sum of degree^-s over the irreducible degrees (s even, > 0)."""
    if s <= 0 or s % 2:
        raise ValueError("zeta special values are taken at positive even s")
    if table is None:
        table = dixon_mod_table(G, **kw)
    return sum((Fraction(1, d ** s) for d in table.degrees), Fraction(0))
