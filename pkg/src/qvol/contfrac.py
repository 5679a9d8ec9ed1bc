"""Continued-fraction expansion of a surgery slope and the index maps I, J, K.

All arithmetic here is exact (``int`` and ``fractions.Fraction``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, InternalError


@dataclass(frozen=True)
class SurgerySpec:
    """Twist knot K_{p'} filled along slope p/q."""

    p: int
    q: int
    twist: int

    def __post_init__(self):
        if self.q == 0:
            raise DomainError("q must be nonzero")
        if math.gcd(self.p, self.q) != 1:
            raise DomainError(f"p={self.p} and q={self.q} are not coprime")

    def normalized(self) -> "SurgerySpec":
        """Same manifold with q > 0 (the slope p/q is unoriented)."""
        if self.q > 0:
            return self
        return SurgerySpec(-self.p, -self.q, self.twist)


@dataclass(frozen=True)
class FractionExpansion:
    p: int
    q: int
    a: tuple
    U: tuple  # U_0 ... U_k as (A, B, C, D)
    ptilde: int
    qtilde: int
    sigma: int

    @property
    def k(self) -> int:
        return len(self.a)

    def C(self, i: int) -> int:
        return self.U[i][2]


def _ceil_div(a, b):
    return -((-a) // b)


def slope_word(p: int, q: int, rule: str = "ceil") -> list:
    """Coefficients a_1..a_k with p/q = a_k - 1/(a_{k-1} - ...).

    ``rule`` picks a_i as the ceiling (canonical) or the floor of the running
    ratio; both end on a pair (a_1, 1).
    """
    if q == 0 or math.gcd(p, q) != 1:
        raise DomainError(f"({p}, {q}) is not a coprime pair with q != 0")
    pick = {"ceil": _ceil_div, "floor": lambda a, b: a // b}[rule]
    word = []
    P, Q = p, q
    while True:
        if Q == 1:
            word.append(P)
            break
        if Q == -1:
            # (P, -1) -> (-1, 1) costs one extra step
            word.append(-P - 1)
            P, Q = -1, 1
            continue
        c = pick(P, Q)
        word.append(c)
        P, Q = Q, c * Q - P
    return word[::-1]


def _signature(minors) -> int:
    # leading minors of the tridiagonal matrix with unit off-diagonals are A_0..A_k;
    # a zero minor is flanked by minors of opposite sign, so skipping it is exact
    signs = [m > 0 for m in minors if m != 0]
    neg = sum(1 for u, v in zip(signs, signs[1:]) if u != v)
    return (len(minors) - 1) - 2 * neg


def expand_slope(p: int, q: int, rule: str = "ceil") -> FractionExpansion:
    word = slope_word(p, q, rule)
    A, B, C, D = 1, 0, 0, 1
    U = [(A, B, C, D)]
    for ai in word:
        # T^a S = [[a, -1], [1, 0]]
        A, B, C, D = ai * A - C, ai * B - D, A, B
        U.append((A, B, C, D))
    if (A, C) != (p, q):
        raise InternalError(f"expansion of {p}/{q} produced {A}/{C}")
    ptilde = U[-1][3] % abs(q)
    qtilde = (1 - p * ptilde) // q
    sigma = _signature([u[0] for u in U])
    return FractionExpansion(p, q, tuple(word), tuple(U), ptilde, qtilde, sigma)


@dataclass(frozen=True)
class FourierData:
    q: int
    Kseq: tuple  # K_0 = 0, K_1 ... K_{k-1}
    Imap: dict
    Jmap: dict
    Kmap: dict
    splus: tuple
    sminus: tuple
    ptilde: int = field(default=0)

    def kvalue(self, s: int, m: int) -> Fraction:
        return Fraction(self.Imap[s], self.q) + 1 - 2 * m


def fourier_maps(exp: FractionExpansion) -> FourierData:
    k, q, a = exp.k, exp.q, exp.a
    C = [u[2] for u in exp.U]
    Kseq = [Fraction(0)]
    for i in range(1, k):
        acc = sum(Fraction(a[j - 1] * C[j]) for j in range(1, i + 1))
        Kseq.append((-1) ** (i + 1) * acc / C[i])
    Klast = Kseq[k - 1]
    jshift = (-1) ** k * sum((-1) ** (i + 1) * Kseq[i] / C[i + 1] for i in range(1, k))
    kshift = sum(C[i] * Kseq[i] ** 2 / C[i + 1] for i in range(1, k - 1))
    Imap, Jmap, Kmap = {}, {}, {}
    for s in range(abs(q)):
        val = -C[k - 1] * (2 * s + 1 + Klast)
        if val.denominator != 1:
            raise InternalError(f"I({s}) = {val} is not an integer")
        Imap[s] = int(val)
        Jmap[s] = Fraction(2 * s + 1, q) + jshift
        Kmap[s] = C[k - 1] * (2 * s + 1 + Klast) ** 2 / q + kshift

    def solve(offset):
        for s in range(abs(q)):
            num = Imap[s] - offset + q
            if num % (2 * q) == 0:
                return s, num // (2 * q)
        raise InternalError(f"no s with I(s) = {offset} - q mod 2q")

    return FourierData(q, tuple(Kseq), Imap, Jmap, Kmap, solve(1), solve(-1), exp.ptilde)


# exact checks of the congruence lemmas --------------------------------------

def _is_int(x) -> bool:
    return Fraction(x).denominator == 1


def ijk_violations(exp: FractionExpansion, fd: FourierData) -> list:
    """Failures of the I/J/K congruences; an empty list means all hold."""
    q, pt = exp.q, exp.ptilde
    bad = []
    for s, val in fd.Imap.items():
        if (val - (1 - q)) % 2:
            bad.append(f"I({s}) parity")
    (sp, mp), (sm, mm) = fd.splus, fd.sminus
    if fd.Imap[sp] != 1 - q + 2 * mp * q:
        bad.append("I(s+)")
    if fd.Imap[sm] != -1 - q + 2 * mm * q:
        bad.append("I(s-)")
    if not _is_int(fd.Jmap[sp] - Fraction(pt, q)):
        bad.append("J(s+) = pt/q mod Z")
    if not _is_int(fd.Jmap[sm] + Fraction(pt, q)):
        bad.append("J(s-) = -pt/q mod Z")
    if not _is_int((fd.Jmap[sp] + fd.Jmap[sm]) / 2):
        bad.append("J(s+) = -J(s-) mod 2")
    # the display "K(s+) = K(s-) = -pt/q mod Z" is a congruence chain; literal
    # equality fails whenever m+ + m- != 1, the difference is always in 4Z
    if not _is_int((fd.Kmap[sp] - fd.Kmap[sm]) / 4):
        bad.append("K(s+) = K(s-) mod 4Z")
    if not _is_int(fd.Kmap[sp] + Fraction(pt, q)):
        bad.append("K(s+) = -pt/q mod Z")
    if fd.kvalue(sp, mp) != Fraction(1, q) or fd.kvalue(sm, mm) != Fraction(-1, q):
        bad.append("k(s+-, m+-) = +-1/q")
    return bad


def zero_sum_pairs(fd: FourierData, mrange=range(-2, 3)):
    """All (s, m, s', m') with k(s,m) + k(s',m') = 0 and m in ``mrange``."""
    q = fd.q
    by_residue = {}
    for s, val in fd.Imap.items():
        by_residue.setdefault(val % (2 * q), []).append(s)
    for s, val in fd.Imap.items():
        for s2 in by_residue.get((-val) % (2 * q), ()):
            total = 1 + (val + fd.Imap[s2]) // (2 * q)  # m + m'
            for m in mrange:
                yield s, m, s2, total - m


def ijk2_violations(fd: FourierData, mrange=range(-2, 3)) -> list:
    bad = []
    q = fd.q
    Jq = {s: fd.Jmap[s] * q for s in fd.Imap}
    pairs = {}
    for s, m, s2, m2 in zero_sum_pairs(fd, mrange):
        pairs.setdefault((s, s2), []).append((m, m2))
    for (s, s2), ms in pairs.items():
        I1, I2 = fd.Imap[s], fd.Imap[s2]
        if not _is_int(Jq[s]) or not _is_int((Jq[s] + Jq[s2]) / (2 * q)):
            bad.append(f"J at {(s, s2)}")
        quarter = (fd.Kmap[s] - fd.Kmap[s2]) / 4
        if not _is_int(quarter):
            bad.append(f"K mod 4 at {(s, s2)}")
            continue
        quarter = int(quarter)
        for m, m2 in ms:
            # q (k(s,m) + k(s',m')) in integers
            if I1 + I2 + 2 * q - 2 * q * (m + m2) != 0:
                bad.append(f"k-sum at {(s, m, s2, m2)}")
            if (s - s2) % 2 == 0 and (m - m2) % 2 == 0:
                bad.append(f"parity at {(s, m, s2, m2)}")
            if (1 + m2 - m + quarter) % 2:
                bad.append(f"K parity at {(s, m, s2, m2)}")
    return bad
