"""Exact arithmetic over small finite local rings.

Three kinds of coefficient rings are supported, all with a prime p:

* ``zmod``  -- Z/p^r, elements stored as canonical ints in [0, p^r);
* ``tpoly`` -- F_p[t]/t^r, elements stored as length-r digit tuples
  (little-endian: index i holds the coefficient of t^i);
* ``gf``    -- the field with p^k elements, stored as length-k digit
  tuples modulo a fixed irreducible polynomial.  A field is the level-1
  case of the shared interface (maximal ideal zero), so all group code
  runs on it unchanged.

Elements are always reduced to canonical form, so equality is a plain
compare and matrices of elements can key dictionaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

INF = math.inf


class NonUnitError(ValueError):
    """Inversion was requested for a non-unit; carries its valuation."""

    def __init__(self, valuation):
        self.valuation = valuation
        super().__init__(f"element is not a unit (valuation {valuation})")


class LevelRangeError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _poly_mul_mod(f, g, mod, p):
    """Product of coefficient tuples modulo the monic polynomial ``mod``."""
    k = len(mod) - 1
    res = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                res[i + j] = (res[i + j] + a * b) % p
    for i in range(len(res) - 1, k - 1, -1):
        c = res[i]
        if c:
            res[i] = 0
            for j in range(k):
                res[i - k + j] = (res[i - k + j] - c * mod[j]) % p
    return tuple(res[:k])


def _find_irreducible(p: int, k: int) -> tuple:
    """Lexicographically first monic irreducible of degree k over F_p.

    Returned as the full coefficient tuple (c_0, ..., c_{k-1}, 1).
    """
    if k == 1:
        return (0, 1)
    for n in range(p ** k):
        digits = []
        m = n
        for _ in range(k):
            digits.append(m % p)
            m //= p
        f = tuple(digits) + (1,)
        if _poly_is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found")


def _poly_is_irreducible(f, p):
    k = len(f) - 1
    if f[0] == 0:
        return False
    x = (0, 1) + (0,) * (k - 2) if k >= 2 else (1,)
    # f is irreducible iff gcd(f, x^(p^d) - x) = 1 for d = 1..k//2
    xp = x
    for _ in range(k // 2):
        xp = _poly_pow_mod(xp, p, f, p)
        diff = tuple((a - b) % p for a, b in zip(xp, x))
        if _poly_gcd_deg(diff, f, p) > 0:
            return False
    return True


def _poly_pow_mod(base, e, mod, p):
    result = (1,) + (0,) * (len(mod) - 2)
    while e:
        if e & 1:
            result = _poly_mul_mod(result, base, mod, p)
        base = _poly_mul_mod(base, base, mod, p)
        e >>= 1
    return result


def _poly_gcd_deg(a, b, p):
    a, b = list(a), list(b)

    def deg(f):
        for i in range(len(f) - 1, -1, -1):
            if f[i]:
                return i
        return -1

    while deg(a) >= 0:
        da, db = deg(a), deg(b)
        if da > db:
            a, b = b, a
            continue
        if da < 0:
            break
        inv = pow(a[da], -1, p)
        shift = db - da
        c = b[db] * inv % p
        for i in range(da + 1):
            b[i + shift] = (b[i + shift] - c * a[i]) % p
    return max(deg(a), deg(b)) if deg(a) >= 0 else deg(b)


@dataclass(frozen=True)
class LocalRing:
    """A finite local ring Z/p^r, F_p[t]/t^r or GF(p^k) with shared ops.

    ``r`` is the level (length of the ideal chain); for ``gf`` it is
    always 1 and ``degree`` holds the field degree k.
    """

    kind: str
    p: int
    r: int
    degree: int = 1
    modulus: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind not in ("zmod", "tpoly", "gf"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.r < 0:
            raise ValueError("level must be >= 0")
        if self.kind == "gf":
            if self.r != 1:
                raise ValueError("a field has level 1")
            if not self.modulus:
                object.__setattr__(self, "modulus",
                                   _find_irreducible(self.p, self.degree))
        else:
            object.__setattr__(self, "degree", 1)

    # -- construction -------------------------------------------------

    @property
    def cardinality(self) -> int:
        if self.kind == "gf":
            return self.p ** self.degree
        return self.p ** self.r

    @property
    def zero(self):
        if self.kind == "zmod":
            return 0
        return (0,) * self._width

    @property
    def one(self):
        if self.kind == "zmod":
            return 1 % self.p ** self.r if self.r else 0
        if self._width == 0:
            return ()
        return (1,) + (0,) * (self._width - 1)

    @property
    def _width(self):
        return self.degree if self.kind == "gf" else self.r

    def elements(self):
        """Iterate all elements in encoding order."""
        return (self.decode(n) for n in range(self.cardinality))

    def encode(self, x) -> int:
        """Bijection onto [0, cardinality); base-p digits for tuples."""
        if self.kind == "zmod":
            return x
        n = 0
        for c in reversed(x):
            n = n * self.p + c
        return n

    def decode(self, n: int):
        if self.kind == "zmod":
            return n % self.cardinality
        digits = []
        for _ in range(self._width):
            digits.append(n % self.p)
            n //= self.p
        return tuple(digits)

    def from_int(self, n: int):
        """Canonical image of the integer n (1 -> one, respects + and *)."""
        if self.kind == "zmod":
            return n % self.cardinality
        c = n % self.p
        return (c,) + (0,) * (self._width - 1) if self._width else ()

    # -- arithmetic ----------------------------------------------------

    def add(self, a, b):
        if self.kind == "zmod":
            return (a + b) % self.cardinality
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        if self.kind == "zmod":
            return (a - b) % self.cardinality
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        if self.kind == "zmod":
            return -a % self.cardinality
        p = self.p
        return tuple(-x % p for x in a)

    def mul(self, a, b):
        if self.kind == "zmod":
            return a * b % self.cardinality
        if self.kind == "gf":
            return _poly_mul_mod(a, b, self.modulus, self.p)
        # truncated polynomial
        r, p = self.r, self.p
        out = [0] * r
        for i, x in enumerate(a):
            if x:
                for j in range(r - i):
                    y = b[j]
                    if y:
                        out[i + j] = (out[i + j] + x * y) % p
        return tuple(out)

    def valuation(self, a):
        """Largest i with a in m^i; math.inf exactly for zero."""
        if self.kind == "zmod":
            if a == 0:
                return INF
            v, p = 0, self.p
            while a % p == 0:
                a //= p
                v += 1
            return v
        if self.kind == "gf":
            return 0 if any(a) else INF
        for i, c in enumerate(a):
            if c:
                return i
        return INF

    def is_unit(self, a) -> bool:
        if self.cardinality == 1:
            return True  # zero ring: its one element is 1
        return self.valuation(a) == 0

    def unit_and_val(self, a):
        """Write a = u * pi^v with u a unit; returns (u, v).  a must be nonzero."""
        v = self.valuation(a)
        if v is INF:
            raise ZeroDivisionError("zero has no unit part")
        if self.kind == "zmod":
            return a // self.p ** v, v
        if self.kind == "gf":
            return a, 0
        return a[v:] + (0,) * v, v

    def shift(self, a, v):
        """Multiply by pi^v (the uniformizer power)."""
        if v == 0:
            return a
        if self.kind == "zmod":
            return a * self.p ** v % self.cardinality
        if self.kind == "gf":
            raise ValueError("field has no nonzero uniformizer power")
        return (0,) * v + a[: self.r - v]

    def inverse(self, a):
        if self.cardinality == 1:
            return a
        v = self.valuation(a)
        if v != 0:
            raise NonUnitError(v)
        if self.kind == "zmod":
            return pow(a, -1, self.cardinality)
        if self.kind == "gf":
            # a^(q-2) = a^-1 in a field with q elements
            return self._pow(a, self.cardinality - 2)
        # Hensel lift of the residue inverse through the t-adic levels
        p, r = self.p, self.r
        b = (pow(a[0], -1, p),) + (0,) * (r - 1)
        prec = 1
        while prec < r:
            ab = self.mul(a, b)
            corr = self.sub(self.from_int(2), ab)
            b = self.mul(b, corr)
            prec *= 2
        return b

    def _pow(self, a, e):
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    # -- levels ----------------------------------------------------------

    def at_level(self, i: int) -> "LocalRing":
        """The quotient ring at level i (level 0 is the zero ring)."""
        if i > self.r:
            raise LevelRangeError(f"level {i} exceeds ring level {self.r}")
        if self.kind == "gf" and i == 1:
            return self
        if self.kind == "gf":  # i == 0
            return LocalRing("zmod", self.p, 0)
        return LocalRing(self.kind, self.p, i)

    def residue_map(self, a, i: int):
        """Ring homomorphism onto the level-i quotient."""
        if i > self.r:
            raise LevelRangeError(f"level {i} exceeds ring level {self.r}")
        if i == self.r:
            return a
        if self.kind == "gf":
            return 0  # only the zero ring below a field
        if self.kind == "zmod":
            return a % self.p ** i
        return a[:i]

    def __str__(self):
        if self.kind == "zmod":
            return f"zmod:{self.p}^{self.r}"
        if self.kind == "tpoly":
            return f"tpoly:{self.p}^{self.r}"
        return f"gf:{self.p}^{self.degree}"


def parse_ring(spec: str) -> LocalRing:
    """Parse CLI spellings like ``zmod:3^2``, ``tpoly:5^2`` or ``gf:3^2``."""
    try:
        kind, rest = spec.split(":")
        if "^" in rest:
            p_s, r_s = rest.split("^")
        else:
            p_s, r_s = rest, "1"
        p, r = int(p_s), int(r_s)
    except ValueError as exc:
        raise ValueError(f"cannot parse ring spec {spec!r}") from exc
    if r < 1:
        raise ValueError("ring level must be >= 1")
    if kind == "gf":
        return LocalRing("gf", p, 1, degree=r)
    return LocalRing(kind, p, r)
