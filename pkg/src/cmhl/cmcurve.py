"""CM elliptic curve models, point counting, the Grossencharacter, and periods.

A curve is a short Weierstrass model y^2 = x^3 + Ax + B with rational A, B,
CM by the maximal order of one of the nine class-number-one fields.  The
uniformization convention is xi(z) = (wp(z), wp'(z)/2), so the lattice L
satisfies g2(L) = -4A, g3(L) = -4B and the invariant differential dx/(2y)
pulls back to dz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mpmath import mp, mpc, mpf, fabs, im, re, nint, pi, sqrt as msqrt, exp

from .quadfield import (
    INERT, RAMIFIED, SPLIT, QuadField, QuadIdeal, QuadInt, ResidueRing,
    canonical_generator, factor_ideal, field, is_coprime, split_type,
)


class NotCM(ValueError):
    pass


class SingularModel(ValueError):
    pass


class ConductorMismatch(ValueError):
    pass


class BadReduction(ValueError):
    pass


class ModelNotIntegral(ValueError):
    """The short model cannot be made p-integral with good reduction at p."""


class RamifiedOrBadPrime(ValueError):
    pass


class AmbiguousGenerator(ValueError):
    pass


class NotCoprimeToConductor(ValueError):
    pass


class PrecisionLoss(ArithmeticError):
    pass


class LatticeMismatch(ArithmeticError):
    pass


# The thirteen class-number-one CM j-invariants, keyed by order discriminant.
# Only maximal orders (fundamental discriminants) are accepted as curve CM.
CM_J_TABLE = {
    -3: 0,
    -4: 1728,
    -7: -3375,
    -8: 8000,
    -11: -32768,
    -12: 54000,
    -16: 287496,
    -19: -884736,
    -27: -12288000,
    -28: 16581375,
    -43: -884736000,
    -67: -147197952000,
    -163: -262537412640768000,
}


@dataclass(frozen=True)
class CMCurve:
    label: str
    field: QuadField
    A: Fraction
    B: Fraction
    cond_gen: QuadInt
    defined_over_Q: bool

    @property
    def conductor_ideal(self) -> QuadIdeal:
        return QuadIdeal(self.cond_gen)

    @property
    def discriminant(self) -> Fraction:
        return Fraction(-16) * (4 * self.A ** 3 + 27 * self.B ** 2)

    @property
    def j_invariant(self) -> Fraction:
        c4 = -48 * self.A
        c6 = -864 * self.B
        return c4 ** 3 * 1728 / (c4 ** 3 - c6 ** 2)

    @property
    def conductor_over_Q(self) -> int:
        return self.cond_gen.norm() * abs(self.field.d)

    def __repr__(self):
        return f"CMCurve({self.label}: y^2=x^3+({self.A})x+({self.B}), d={self.field.d})"


def load_curve(record: dict) -> CMCurve:
    """Validate a curve record {label, d_K, A, B, cond_gen, defined_over_Q}."""
    try:
        label = record["label"]
        d = int(record["d_K"])
        A = Fraction(str(record["A"]))
        B = Fraction(str(record["B"]))
        cg = record["cond_gen"]
        over_q = bool(record["defined_over_Q"])
    except (KeyError, ValueError) as e:
        raise ValueError(f"malformed curve record: {e}") from e
    K = field(d)
    curve = CMCurve(label, K, A, B, canonical_generator(K.element(cg[0], cg[1])),
                    over_q)
    if curve.discriminant == 0:
        raise SingularModel(f"{label}: discriminant is zero")
    j = curve.j_invariant
    matches = [dd for dd, jj in CM_J_TABLE.items() if jj == j]
    if not matches:
        raise NotCM(f"{label}: j = {j} is not a class-number-one CM j-invariant")
    if matches[0] != d:
        raise NotCM(f"{label}: j = {j} has CM by order of discriminant {matches[0]}, not {d}")
    if curve.cond_gen.is_zero():
        raise ConductorMismatch(f"{label}: zero conductor")
    if over_q and QuadIdeal(curve.cond_gen.conj()) != curve.conductor_ideal:
        raise ConductorMismatch(f"{label}: conductor not conjugation-stable for a curve over Q")
    _check_conductor_support(curve)
    return curve


def _check_conductor_support(curve: CMCurve):
    """N(f)*|d_K| must have the bad-prime support of the model away from 2, 3.

    Tate's algorithm is out of scope; at p >= 5 good/bad reduction of a short
    model is decided exactly by minimalizing u^12 scalings out of Delta.
    """
    from sympy import factorint

    NE = curve.conductor_over_Q
    A, B = curve.A, curve.B
    for p in factorint(A.denominator * B.denominator):
        while _val_frac(A, p) < 0 or _val_frac(B, p) < 0:
            A *= p ** 4
            B *= p ** 6
    delta = Fraction(-16) * (4 * A ** 3 + 27 * B ** 2)
    bad_model = set()
    for p in factorint(abs(delta.numerator)):
        if p < 5:
            continue
        vA = _val_frac(A, p) if A else 10 ** 9
        vB = _val_frac(B, p) if B else 10 ** 9
        vD = _val_frac(delta, p)
        k = max(0, min(vA // 4, vB // 6, vD // 12))
        if vD - 12 * k > 0:
            bad_model.add(p)
    for p in factorint(NE):
        if p >= 5 and p not in bad_model:
            raise ConductorMismatch(
                f"{curve.label}: conductor claims bad reduction at {p}, model is good there")
    for p in bad_model:
        if NE % p != 0:
            raise ConductorMismatch(
                f"{curve.label}: model has bad reduction at {p} not reflected in N(f)*|d_K|")


def _val_frac(x: Fraction, p: int) -> int:
    if x == 0:
        return 10 ** 9
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    if v:
        return v
    m = x.denominator
    while m % p == 0:
        m //= p
        v -= 1
    return v


# -- point counting ----------------------------------------------------------

def p_integral_model(curve: CMCurve, p: int):
    """(A, B) in Z_(p) x Z_(p) for an isomorphic model with v_p(Delta) = 0.

    Denominators at primes q != p are cleared by u^4/u^6 scalings; excess
    p-powers are minimalized away.  Short models of curves with good
    reduction at 2 or 3 can be unavoidably non-integral there, in which case
    ModelNotIntegral is raised (callers fall back to the unit-character
    route for psi, or restrict to p > 3 for formal-group work).
    """
    from sympy import factorint

    A, B = curve.A, curve.B
    for q in factorint(A.denominator * B.denominator):
        if q == p:
            continue
        while _val_frac(A, q) < 0 or _val_frac(B, q) < 0:
            A *= q ** 4
            B *= q ** 6
    if A.denominator % p == 0 or B.denominator % p == 0:
        raise ModelNotIntegral(f"{curve.label}: short model has {p} in denominators")
    vD = _val_frac(Fraction(-16) * (4 * A ** 3 + 27 * B ** 2), p)
    while vD >= 12 and _val_frac(A, p) >= 4 and _val_frac(B, p) >= 6:
        A /= p ** 4
        B /= p ** 6
        vD -= 12
    if vD != 0:
        if curve.conductor_over_Q % p == 0:
            raise BadReduction(f"{curve.label} has bad reduction at {p}")
        raise ModelNotIntegral(
            f"{curve.label}: good reduction at {p} is invisible in any short model")
    return A, B


def count_points(curve: CMCurve, p: int) -> int:
    """Trace of Frobenius a_p = p + 1 - #E(F_p) by exhaustive counting."""
    from .quadfield import NotPrime, _is_prime

    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if curve.conductor_over_Q % p == 0:
        raise BadReduction(f"{curve.label} has bad reduction at {p}")
    A, B = p_integral_model(curve, p)
    Ap = A.numerator * pow(A.denominator, -1, p) % p
    Bp = B.numerator * pow(B.denominator, -1, p) % p
    s = 0
    e = (p - 1) // 2
    for x in range(p):
        v = (x * x % p * x + Ap * x + Bp) % p
        if v == 0:
            continue
        s += 1 if pow(v, e, p) == 1 else -1
    ap = -s
    assert ap * ap <= 4 * p, "Hasse bound violated (counting bug)"
    return ap


def classify_reduction(curve: CMCurve, p: int) -> str:
    """'bad' | 'supersingular' | 'ordinary' (inert/split in K at good p)."""
    if curve.conductor_over_Q % p == 0:
        return "bad"
    kind, _ = split_type(curve.field, p)
    if kind == INERT:
        return "supersingular"
    if kind == SPLIT:
        return "ordinary"
    return "bad"  # ramified primes divide d_K | conductor; unreachable at good p


# -- Grossencharacter --------------------------------------------------------

class Grossencharacter:
    """psi attached to the curve: psi(P) generates P, psi(P)+conj = a_p.

    Prime values are derived from point counts; values on (alpha) for alpha
    coprime to f take the closed form eps(alpha mod f) * alpha, where eps is
    the finite-order unit character reconstructed (and consistency-checked)
    from the prime values.
    """

    def __init__(self, curve: CMCurve):
        self.curve = curve
        self._prime_values = {}
        self._eps = None
        self._ring = ResidueRing(curve.cond_gen)

    # .. prime values ........................................................

    def at_prime(self, P: QuadIdeal) -> QuadInt:
        if P in self._prime_values:
            return self._prime_values[P]
        K = self.curve.field
        n = P.norm()
        if not P.is_coprime_to(self.curve.conductor_ideal):
            raise RamifiedOrBadPrime(f"{P} divides the conductor")
        if not _is_rational_prime_power(n):
            raise RamifiedOrBadPrime(f"{P} is not a prime ideal")
        p = _prime_root(n)
        kind, _ = split_type(K, p)
        if kind == SPLIT and n == p:
            val = self._split_value(P, p)
        elif kind == INERT and QuadIdeal(K.element(p)) == P:
            val = self._inert_value(p)
        elif kind == RAMIFIED:
            raise RamifiedOrBadPrime(f"{P} is ramified")
        else:
            raise RamifiedOrBadPrime(f"{P} is not a prime ideal")
        self._prime_values[P] = val
        return val

    def _split_value(self, P: QuadIdeal, p: int) -> QuadInt:
        try:
            ap = count_points(self.curve, p)
        except ModelNotIntegral:
            # model invisible at p: fall back to the unit-character closed form
            return self._eps_route_value(P.gen)
        cands = [u * P.gen for u in self.curve.field.units if (u * P.gen).trace() == ap]
        if len(cands) == 1:
            return cands[0]
        if len(cands) > 1:
            f = self.curve.cond_gen
            cong = [c for c in cands if f.divides(c - self.curve.field.one)]
            if len(cong) == 1:
                return cong[0]
        raise AmbiguousGenerator(f"no unique trace-{ap} generator of {P}")

    def _inert_value(self, p: int) -> QuadInt:
        K = self.curve.field
        if self.curve.defined_over_Q:
            return K.element(-p)
        try:
            ap = count_points(self.curve, p)
        except ModelNotIntegral:
            return self._eps_route_value(K.element(p))
        # psi((p)) = u*p with (u + conj(u))*p = a_{p^2} = a_p^2 - 2p
        ap2 = ap * ap - 2 * p
        cands = [u for u in K.units if u.trace() * p == ap2]
        if len(cands) == 1:
            return cands[0] * K.element(p)
        raise AmbiguousGenerator(f"unit at inert {p} not determined by counting")

    def _eps_route_value(self, g: QuadInt) -> QuadInt:
        eps = self.eps_table()
        r = self._ring.reduce(g)
        if r not in eps:
            raise RamifiedOrBadPrime(f"{g} is not coprime to the conductor")
        return eps[r] * g

    # .. unit character ......................................................

    def eps_table(self) -> dict:
        """Residue mod f -> unit, with psi((alpha)) = eps(alpha mod f) * alpha."""
        if self._eps is not None:
            return self._eps
        K = self.curve.field
        ring = self._ring
        units_needed = {tuple(r) for r in ring.units()}
        table = {}
        avoid = self.curve.conductor_over_Q * (self.curve.A.denominator *
                                               self.curve.B.denominator)
        p = 2
        guard = 0
        while set(table) != units_needed:
            guard += 1
            if guard > 2000:
                raise AssertionError("eps table did not close; conductor suspect")
            if avoid % p != 0:
                kind, primes = split_type(K, p)
                vals = []
                if kind == SPLIT:
                    vals = [(primes[0], self._split_value(primes[0], p))]
                    vals.append((primes[1], vals[0][1].conj()
                                 if self.curve.defined_over_Q else
                                 self._split_value(primes[1], p)))
                elif kind == INERT:
                    vals = [(primes[0], self._inert_value(p))]
                for P, v in vals:
                    self._prime_values.setdefault(P, v)
                    for u in K.units:
                        alpha = u * v
                        rr = ring.reduce(alpha)
                        # eps(alpha) = psi((alpha))/alpha = v/alpha, a unit
                        e = None
                        for uu in K.units:
                            if uu * alpha == v:
                                e = uu
                                break
                        assert e is not None
                        if rr in table:
                            if table[rr] != e:
                                raise ConductorMismatch(
                                    f"{self.curve.label}: inconsistent unit character "
                                    f"at residue {rr}; conductor {self.curve.cond_gen} suspect")
                        else:
                            table[rr] = e
                # multiplicative closure
                changed = True
                while changed:
                    changed = False
                    items = sorted(table.items())
                    for r1, e1 in items:
                        for r2, e2 in items:
                            x = ring.lift(r1) * ring.lift(r2)
                            rr = ring.reduce(x)
                            ee = e1 * e2
                            if rr not in table:
                                table[rr] = ee
                                changed = True
                            elif table[rr] != ee:
                                raise ConductorMismatch(
                                    f"{self.curve.label}: unit character not multiplicative; "
                                    f"conductor {self.curve.cond_gen} suspect")
            p = _next_prime(p)
        self._eps = table
        return table

    def of_element(self, alpha: QuadInt) -> QuadInt:
        """psi((alpha)) for alpha coprime to f."""
        eps = self.eps_table()
        r = self._ring.reduce(alpha)
        if r not in eps:
            raise NotCoprimeToConductor(f"({alpha}) is not coprime to the conductor")
        return eps[r] * alpha

    # .. general ideals ......................................................

    def at_ideal(self, I: QuadIdeal, k: int = 1, conjugated: bool = False) -> QuadInt:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not I.is_coprime_to(self.curve.conductor_ideal):
            raise NotCoprimeToConductor(f"{I} shares a factor with the conductor")
        base = self.of_element(I.gen)
        if conjugated:
            base = base.conj()
        return base ** k

    def __call__(self, I: QuadIdeal, k: int = 1) -> QuadInt:
        return self.at_ideal(I, k)


def _is_rational_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = _prime_root(n)
    q = n
    while q % p == 0:
        q //= p
    return q == 1


def _prime_root(n: int) -> int:
    from sympy import primefactors

    return primefactors(n)[0]


def _next_prime(p: int) -> int:
    from sympy import nextprime

    return nextprime(p)


# -- periods -----------------------------------------------------------------

@dataclass
class PeriodLattice:
    omega: "mpc"            # L = omega * O_K, canonical unit normalization
    omega_plus: "mpf"       # least positive real element of L
    basis: tuple            # reduced basis (v1, v2), tau = v2/v1 reduced
    precision: int          # decimal digits
    z_ratio: QuadInt        # omega_plus / omega recognized in O_K
    tau: "mpc"              # reduced tau (matched against omega_K)

    def scaled(self, c) -> "PeriodLattice":
        """The lattice c*L (transported data; z_ratio only kept if c real > 0)."""
        return PeriodLattice(self.omega * c, self.omega_plus * c
                             if (im(mpc(c)) == 0 and re(mpc(c)) > 0) else self.omega_plus,
                             (self.basis[0] * c, self.basis[1] * c),
                             self.precision, self.z_ratio, self.tau)


def _agm_right_branch(a, b, dps):
    """Complex AGM, square root branch with Re >= 0 (tie: Im > 0)."""
    tol = mpf(10) ** (-dps + 4)
    for _ in range(dps * 4 + 64):
        a1 = (a + b) / 2
        s = (a * b) ** mpf('0.5')
        if re(s) < 0 or (re(s) == 0 and im(s) < 0):
            s = -s
        if fabs(a1 - s) <= tol * fabs(a1):
            return (a1 + s) / 2
        a, b = a1, s
    raise PrecisionLoss("complex AGM failed to converge")


def _eisenstein_E(q, weight, dps):
    coef = 240 if weight == 4 else -504
    s = mpf(0)
    n = 1
    qn = q
    floor_ = mpf(10) ** (-dps - 10)
    while fabs(qn) > floor_:
        sig = 0
        for dd in range(1, n + 1):
            if n % dd == 0:
                sig += dd ** (weight - 1)
        s += sig * qn
        n += 1
        qn = q ** n
        if n > 40 * dps:
            raise PrecisionLoss("Eisenstein series does not converge (tau unreduced?)")
    return 1 + coef * s


def lattice_invariants(v1, v2, dps):
    """(g2, g3) of Z v1 + Z v2 via Eisenstein q-series at tau = v2/v1."""
    tau = v2 / v1
    if im(tau) < 0:
        tau = -tau
    q = exp(2 * pi * mpc(0, 1) * tau)
    E4 = _eisenstein_E(q, 4, dps)
    E6 = _eisenstein_E(q, 6, dps)
    g2 = (2 * pi / v1) ** 4 * E4 / 12
    g3 = (2 * pi / v1) ** 6 * E6 / 216
    return g2, g3


def _lagrange_reduce(v1, v2):
    """Shortest-vector basis reduction for a rank-2 complex lattice."""
    if fabs(v1) < fabs(v2):
        v1, v2 = v2, v1
    for _ in range(10000):
        # v1 is the longer; reduce it by multiples of v2
        mu = nint(re(v1 * mpc(v2).conjugate()) / fabs(v2) ** 2)
        v1 = v1 - mu * v2
        if fabs(v1) >= fabs(v2):
            break
        v1, v2 = v2, v1
    return v2, v1  # (shortest, next)


def _reduce_tau(v1, v2, dps):
    """Reduce tau = v2/v1 into the standard fundamental domain, tracking basis."""
    tau = v2 / v1
    if im(tau) < 0:
        v2 = -v2
        tau = -tau
    for _ in range(10000):
        n = int(nint(re(tau)))
        if n:
            v2 = v2 - n * v1
            tau = v2 / v1
        if fabs(tau) < 1 - mpf(10) ** (-dps // 2):
            v1, v2 = v2, -v1
            tau = v2 / v1
        else:
            break
    # boundary convention: Re(tau) = +1/2, not -1/2
    if fabs(re(tau) + mpf('0.5')) < mpf(10) ** (-dps // 2):
        v2 = v2 + v1
        tau = v2 / v1
    return v1, v2, tau


def periods(curve: CMCurve, precision_digits: int = 60) -> PeriodLattice:
    """Period lattice by complex AGM, validated against g2 = -4A, g3 = -4B.

    Returns Omega with L = Omega*O_K (canonical unit normalization: argument
    in [0, 2*pi/#units)), the least positive real period Omega_+, and the
    ratio z = Omega_+/Omega recognized exactly in O_K and checked to divide
    6*sqrt(d_K) (the good-prime content of the real-vs-CM period comparison).
    """
    if precision_digits < 30:
        raise ValueError("precision must be >= 30 digits")
    dps = precision_digits + 15
    with mp.workdps(dps):
        from mpmath import polyroots

        K = curve.field
        A = mpf(curve.A.numerator) / curve.A.denominator
        B = mpf(curve.B.numerator) / curve.B.denominator
        rts = polyroots([mpf(1), mpf(0), A, B], maxsteps=200, extraprec=160)
        disc = -16 * (4 * A ** 3 + 27 * B ** 2)
        if disc > 0:
            e3, e2, e1 = sorted(r.real for r in rts)
        else:
            reals = [r for r in rts if fabs(im(r)) < mpf(10) ** (-dps // 2)]
            if len(reals) != 1:
                raise PrecisionLoss("root classification failed")
            e1 = reals[0].real
            e2 = [r for r in rts if im(r) > 0][0]
            e3 = [r for r in rts if im(r) < 0][0]
        w1 = pi / _agm_right_branch(msqrt(mpc(e1 - e3)), msqrt(mpc(e1 - e2)), dps)
        w2 = mpc(0, 1) * pi / _agm_right_branch(msqrt(mpc(e1 - e3)), msqrt(mpc(e2 - e3)), dps)
        if fabs(im(w1)) < mpf(10) ** (-dps + 10):
            w1 = mpc(w1.real, 0)
        v1, v2 = _lagrange_reduce(mpc(w1), mpc(w2))
        v1, v2, tau = _reduce_tau(v1, v2, dps)

        # validate the lattice against the model invariants
        g2, g3 = lattice_invariants(v1, v2, dps)
        tol = mpf(10) ** (-precision_digits + 5)
        scale = 1 + fabs(g2) + fabs(g3)
        if fabs(g2 - (-4 * A)) > tol * scale or fabs(g3 - (-4 * B)) > tol * scale:
            raise LatticeMismatch(
                f"{curve.label}: AGM lattice fails g2/g3 check "
                f"(residuals {fabs(g2 + 4 * A)}, {fabs(g3 + 4 * B)})")

        # match tau against omega_K
        d = K.d
        if d % 2 == 0:
            tau_K = mpc(0, 1) * msqrt(mpf(-d)) / 2
        else:
            tau_K = (1 + mpc(0, 1) * msqrt(mpf(-d))) / 2
        if fabs(tau - tau_K) > mpf(10) ** (-precision_digits // 2):
            raise LatticeMismatch(
                f"{curve.label}: reduced tau {tau} does not match omega_K for d = {d}")

        # L = v1 * (Z + Z tau) = v1 * O_K ; canonical Omega among unit multiples
        omega = _canonical_omega(v1, K, dps)

        # least positive real element: search small combinations of the basis
        omega_plus = None
        thr = mpf(10) ** (-dps + 12)
        for m in range(-8, 9):
            for n in range(-8, 9):
                v = m * v1 + n * v2
                if fabs(v) == 0:
                    continue
                if fabs(im(v)) < thr * fabs(v) and re(v) > 0:
                    if omega_plus is None or re(v) < omega_plus:
                        omega_plus = re(v)
        if omega_plus is None:
            raise LatticeMismatch(f"{curve.label}: no real period found (lattice not conj-stable?)")

        z = _recognize_lattice_ratio(omega_plus / omega, K, precision_digits)
        if z is None:
            raise PrecisionLoss(f"{curve.label}: Omega_+/Omega not recognized in O_K")
        six_sqrt_d = K.element(6) * K.sqrt_d
        if not z.divides(six_sqrt_d):
            raise LatticeMismatch(
                f"{curve.label}: Omega_+/Omega = {z} does not divide 6*sqrt(d_K)")
        return PeriodLattice(omega=omega, omega_plus=omega_plus, basis=(v1, v2),
                             precision=precision_digits, z_ratio=z, tau=tau)


def _canonical_omega(v1, K: QuadField, dps: int):
    """Among unit multiples of v1, the one with argument in [0, 2*pi/#units)."""
    from mpmath import arg

    nunits = len(K.units)
    sector = 2 * pi / nunits
    best = None
    for u in K.units:
        w = u.embed() * v1
        a = arg(w)
        if a < -mpf(10) ** (-dps + 10):
            a += 2 * pi
        if -mpf(10) ** (-dps + 10) <= a < sector - mpf(10) ** (-dps + 10):
            best = w
            break
    if best is None:
        # argument sits on a sector boundary; take the multiple closest to it
        cands = sorted(((arg(u.embed() * v1) % (2 * pi), u.embed() * v1) for u in K.units),
                       key=lambda t: t[0])
        best = cands[0][1]
    if fabs(im(best)) < mpf(10) ** (-dps + 10):
        best = mpc(re(best), 0)
    return best


def _recognize_lattice_ratio(w, K: QuadField, digits: int) -> Optional[QuadInt]:
    """Recognize w as an element a + b*omega_K of O_K, verified to tolerance."""
    om = K.embed_omega()
    bb = im(w) / im(om)
    aa = re(w) - bb * re(om)
    a_int, b_int = int(nint(aa)), int(nint(bb))
    cand = K.element(a_int, b_int)
    if fabs(cand.embed() - w) < mpf(10) ** (-digits // 2):
        return cand
    return None
