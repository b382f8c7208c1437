"""Exact arithmetic in the nine class-number-one imaginary quadratic fields.

Elements are stored on the integral basis (1, omega) with
omega = (d + sqrt(d))/2, so Tr(omega) = d and N(omega) = (d^2 - d)/4.
Ideals are principal (class number 1) and stored by a canonical generator:
among unit multiples we pick the one whose complex embedding has the largest
real part, ties broken by largest imaginary part.  Both comparisons are exact
integer comparisons (real part = (2a + b d)/2, imaginary part = b sqrt|d|/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from mpmath import mp, mpc, mpf, sqrt as msqrt

CLASS_NUMBER_ONE_DISCS = (-3, -4, -7, -8, -11, -19, -43, -67, -163)


class NotPrime(ValueError):
    pass


class ZeroIdeal(ValueError):
    pass


class NotSupportedField(ValueError):
    pass


class QuadField:
    """The field Q(sqrt(d)) for a class-number-one discriminant d."""

    def __init__(self, d: int):
        if d not in CLASS_NUMBER_ONE_DISCS:
            raise NotSupportedField(f"discriminant {d} is not in the class-number-one list")
        self.d = d
        self.trace_omega = d                 # Tr(omega)
        self.norm_omega = (d * d - d) // 4   # N(omega)
        self._units = None

    def __repr__(self):
        return f"QuadField({self.d})"

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d == self.d

    def __hash__(self):
        return hash(("QuadField", self.d))

    def element(self, a, b=0) -> "QuadInt":
        return QuadInt(self, a, b)

    @property
    def one(self) -> "QuadInt":
        return QuadInt(self, 1, 0)

    @property
    def zero(self) -> "QuadInt":
        return QuadInt(self, 0, 0)

    @property
    def sqrt_d(self) -> "QuadInt":
        # sqrt(d) = 2*omega - d
        return QuadInt(self, -self.d, 2)

    @property
    def units(self) -> tuple:
        if self._units is None:
            us = []
            for a in range(-3, 4):
                for b in range(-3, 4):
                    if QuadInt(self, a, b).norm() == 1:
                        us.append(QuadInt(self, a, b))
            us.sort(key=lambda u: u._cmp_key(), reverse=True)
            self._units = tuple(us)
        return self._units

    def embed_omega(self):
        """omega under the fixed embedding K -> C at current mp precision."""
        return (mpc(self.d) + mpc(0, 1) * msqrt(mpf(-self.d))) / 2

    def elements_of_norm(self, n: int) -> list:
        """All x in O_K with N(x) = n (includes unit multiples)."""
        if n < 0:
            return []
        if n == 0:
            return [self.zero]
        out = []
        d = self.d
        bmax = math.isqrt(4 * n // (-d)) + 1
        for b in range(-bmax, bmax + 1):
            disc = b * b * d + 4 * n
            if disc < 0:
                continue
            r = math.isqrt(disc)
            if r * r != disc:
                continue
            for sgn in ((1,) if r == 0 else (1, -1)):
                num = -b * d + sgn * r
                if num % 2 == 0:
                    x = QuadInt(self, num // 2, b)
                    if x.norm() == n:
                        out.append(x)
        out.sort(key=lambda x: x._cmp_key(), reverse=True)
        return out

    def ideals_of_norm(self, n: int) -> list:
        """Distinct ideals of norm n, by canonical generator, deterministic order."""
        seen = []
        for x in self.elements_of_norm(n):
            g = canonical_generator(x)
            if g not in seen:
                seen.append(g)
        return [QuadIdeal(g) for g in seen]


@lru_cache(maxsize=None)
def field(d: int) -> QuadField:
    return QuadField(d)


class QuadInt:
    """a + b*omega in O_K, exact integer coordinates."""

    __slots__ = ("field", "a", "b")

    def __init__(self, fld: QuadField, a, b=0):
        self.field = fld
        self.a = int(a)
        self.b = int(b)

    # -- ring structure ---------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return QuadInt(self.field, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        other = self._coerce(other)
        return QuadInt(self.field, self.a - other.a, self.b - other.b)

    def __neg__(self):
        return QuadInt(self.field, -self.a, -self.b)

    def __mul__(self, other):
        other = self._coerce(other)
        f = self.field
        a, b, c, e = self.a, self.b, other.a, other.b
        return QuadInt(f, a * c - b * e * f.norm_omega,
                       a * e + b * c + b * e * f.trace_omega)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers leave O_K")
        r = self.field.one
        x = self
        while k:
            if k & 1:
                r = r * x
            x = x * x
            k >>= 1
        return r

    def _coerce(self, other) -> "QuadInt":
        if isinstance(other, QuadInt):
            if other.field.d != self.field.d:
                raise ValueError("mixed fields")
            return other
        if isinstance(other, int):
            return QuadInt(self.field, other, 0)
        raise TypeError(f"cannot coerce {other!r}")

    def conj(self) -> "QuadInt":
        return QuadInt(self.field, self.a + self.b * self.field.trace_omega, -self.b)

    def norm(self) -> int:
        f = self.field
        return self.a * self.a + self.a * self.b * f.trace_omega + self.b * self.b * f.norm_omega

    def trace(self) -> int:
        return 2 * self.a + self.b * self.field.trace_omega

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def divides(self, other: "QuadInt") -> bool:
        return self.divide_exact(other) is not None

    def divide_exact(self, num: "QuadInt"):
        """num / self in O_K, or None when the quotient is not integral."""
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in O_K")
        t = num * self.conj()
        if t.a % n or t.b % n:
            return None
        return QuadInt(self.field, t.a // n, t.b // n)

    # -- embedding and ordering -------------------------------------------

    def _cmp_key(self):
        # (2*Re, Im-sign-aware) exact: Re = (2a + b d)/2, Im = b*sqrt|d|/2
        return (2 * self.a + self.b * self.field.d, self.b)

    def embed(self):
        """Image under the fixed embedding K -> C at current mp precision."""
        return mpc(self.a) + mpc(self.b) * self.field.embed_omega()

    def as_quadratic_pair(self):
        """(u, v) rationals with value = u + v*sqrt(d)."""
        return (Fraction(2 * self.a + self.b * self.field.d, 2), Fraction(self.b, 2))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.a == other and self.b == 0
        return (isinstance(other, QuadInt) and other.field.d == self.field.d
                and other.a == self.a and other.b == self.b)

    def __hash__(self):
        return hash((self.field.d, self.a, self.b))

    def __repr__(self):
        f = self.field
        if self.b == 0:
            return f"{self.a}"
        return f"({self.a}{self.b:+d}*w{f.d})"


def canonical_generator(x: QuadInt) -> QuadInt:
    """Largest real part among unit multiples, ties broken by largest imag part."""
    if x.is_zero():
        return x
    best = None
    for u in x.field.units:
        y = u * x
        if best is None or y._cmp_key() > best._cmp_key():
            best = y
    return best


class QuadIdeal:
    """Nonzero integral ideal of O_K, stored by its canonical generator."""

    __slots__ = ("gen",)

    def __init__(self, gen: QuadInt):
        if gen.is_zero():
            raise ZeroIdeal("zero ideal")
        self.gen = canonical_generator(gen)

    @property
    def field(self) -> QuadField:
        return self.gen.field

    def norm(self) -> int:
        return self.gen.norm()

    def conj(self) -> "QuadIdeal":
        return QuadIdeal(self.gen.conj())

    def __mul__(self, other: "QuadIdeal") -> "QuadIdeal":
        return QuadIdeal(self.gen * other.gen)

    def __pow__(self, k: int) -> "QuadIdeal":
        return QuadIdeal(self.gen ** k)

    def __eq__(self, other):
        return isinstance(other, QuadIdeal) and other.gen == self.gen

    def __hash__(self):
        return hash(("QuadIdeal", self.gen))

    def __repr__(self):
        return f"({self.gen!r})"

    def contains(self, x: QuadInt) -> bool:
        return self.gen.divides(x)

    def divides(self, other: "QuadIdeal") -> bool:
        return self.gen.divides(other.gen)

    def is_coprime_to(self, other: "QuadIdeal") -> bool:
        return is_coprime(self.gen, other.gen)

    def is_one(self) -> bool:
        return self.norm() == 1


def is_coprime(x: QuadInt, g: QuadInt) -> bool:
    """(x) + (g) = O_K, via the Z-lattice spanned by x, x*omega, g, g*omega."""
    if x.is_zero():
        return g.norm() == 1
    if g.is_zero():
        return x.norm() == 1
    om = QuadInt(x.field, 0, 1)
    vecs = [x, x * om, g, g * om]
    d = 0
    for i in range(4):
        for j in range(i + 1, 4):
            m = vecs[i].a * vecs[j].b - vecs[i].b * vecs[j].a
            d = math.gcd(d, abs(m))
            if d == 1:
                return True
    return d == 1


# -- splitting of rational primes ------------------------------------------

SPLIT, INERT, RAMIFIED = "split", "inert", "ramified"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    dd = n - 1
    s = 0
    while dd % 2 == 0:
        dd //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, dd, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def split_type(fld: QuadField, p: int):
    """Splitting of the rational prime p in O_K.

    Returns (kind, primes) with kind in {"split","inert","ramified"} and
    primes the list of prime ideals above p (two conjugates if split).
    """
    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    d = fld.d
    if d % p == 0:
        g = fld.elements_of_norm(p)
        if not g:
            raise AssertionError(f"no generator of norm {p} above ramified {p}")
        return RAMIFIED, [QuadIdeal(g[0])]
    if p == 2:
        # d odd here; 2 splits iff d = 1 mod 8
        is_split = (d % 8) == 1
    else:
        is_split = pow(d % p, (p - 1) // 2, p) == 1
    if not is_split:
        return INERT, [QuadIdeal(fld.element(p))]
    gens = fld.elements_of_norm(p)
    if not gens:
        raise AssertionError(f"split prime {p} has no element of norm p (h=1 violated?)")
    P = QuadIdeal(gens[0])
    return SPLIT, [P, P.conj()]


# -- residue rings -----------------------------------------------------------

class ResidueRing:
    """O_K / (g) with HNF-reduced representatives on the basis (1, omega)."""

    def __init__(self, g: QuadInt):
        if g.is_zero():
            raise ZeroIdeal("modulus must be nonzero")
        self.modulus = g
        om = QuadInt(g.field, 0, 1)
        v1 = (g.a, g.b)
        gm = g * om
        v2 = (gm.a, gm.b)
        self.h00, self.h01, self.h11 = _hnf2(v1, v2)
        assert self.h00 * self.h11 == g.norm()

    def reduce(self, x: QuadInt):
        a, b = x.a, x.b
        k = b // self.h11
        b -= k * self.h11
        a -= k * self.h01
        a %= self.h00
        return (a, b)

    def lift(self, r) -> QuadInt:
        return QuadInt(self.modulus.field, r[0], r[1])

    def __iter__(self) -> Iterator:
        for a in range(self.h00):
            for b in range(self.h11):
                yield (a, b)

    def units(self) -> list:
        return [r for r in self if is_coprime(self.lift(r), self.modulus)]

    def size(self) -> int:
        return self.h00 * self.h11


def _hnf2(v1, v2):
    """Row HNF [[h00, h01], [0, h11]]-style data for the rank-2 lattice."""
    r0, r1 = list(v1), list(v2)
    while r1[1] != 0:
        if r0[1] == 0:
            r0, r1 = r1, r0
            continue
        q = r0[1] // r1[1]
        r0 = [r0[i] - q * r1[i] for i in range(2)]
        r0, r1 = r1, r0
    if r0[1] < 0:
        r0 = [-c for c in r0]
    if r1[0] < 0:
        r1 = [-c for c in r1]
    h11 = r0[1]
    h00 = abs(r1[0])
    if h00 == 0:
        raise ZeroIdeal("degenerate lattice")
    h01 = r0[0] % h00
    return h00, h01, h11


def gens_mod_units(I: QuadIdeal) -> list:
    """All generators of I (unit multiples of the canonical one)."""
    g = I.gen
    if g.is_zero():
        raise ZeroIdeal("zero ideal")
    out = [u * g for u in g.field.units]
    out.sort(key=lambda x: x._cmp_key(), reverse=True)
    return out


def ray_class_reps(fld: QuadField, f: QuadIdeal) -> list:
    """Integral-ideal representatives B of (O_K/f)^x modulo global units.

    The Artin map identifies these classes with G(K(f)/K); every class
    contains the principal ideal generated by any lift of its residue.
    Deterministic: orbits keyed by their lexicographically smallest residue.
    """
    ring = ResidueRing(f.gen)
    units = ring.units()
    unit_res = []
    for u in fld.units:
        r = ring.reduce(u)
        if r not in unit_res:
            unit_res.append(r)
    seen = set()
    reps = []
    for r in sorted(units):
        if r in seen:
            continue
        orbit = set()
        x = ring.lift(r)
        for u in fld.units:
            orbit.add(ring.reduce(u * x))
        seen |= orbit
        reps.append(r)
    out = []
    for r in reps:
        x = ring.lift(r)
        if x.is_zero():
            x = x + f.gen
        out.append(QuadIdeal(x))
    return out


def factor_ideal(I: QuadIdeal) -> list:
    """[(prime_ideal, exponent)] in a deterministic order."""
    from sympy import factorint

    g = I.gen
    out = []
    n = g.norm()
    if n == 1:
        return out
    for p in sorted(factorint(n)):
        kind, primes = split_type(g.field, p)
        for P in primes:
            e = 0
            x = g
            while True:
                q = P.gen.divide_exact(x)
                if q is None:
                    break
                x = q
                e += 1
            if e:
                out.append((P, e))
    # inert primes enter the norm squared; recompute exponents consistently
    check = I.field.one
    for P, e in out:
        check = check * P.gen ** e
    assert QuadIdeal(check) == I, "ideal factorization failed"
    return out
