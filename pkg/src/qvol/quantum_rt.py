"""Reshetikhin-Turaev invariants of K_{p'}(p, q) from the closed-form multi-sum.

Phases that are rational multiples of pi are carried as exact integers and
reduced before exponentiation, so the only rounding in a summand comes from
the quantum factorial magnitudes and the two sines.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .contfrac import FractionExpansion, SurgerySpec, expand_slope, fourier_maps
from .errors import DomainError, PrecisionError
from .specfun import MAX_R, QuantumTables, build_quantum_tables

PI = math.pi


# exact Laurent polynomials in u = t^(1/4) ---------------------------------

@dataclass(frozen=True)
class LaurentPoly:
    """Integer Laurent polynomial sum c_i u^(offset + i)."""

    offset: int
    coeffs: tuple

    @staticmethod
    def monomial(e: int, c: int = 1) -> "LaurentPoly":
        return LaurentPoly(e, (c,))

    @staticmethod
    def brace(k: int) -> "LaurentPoly":
        """{k} = t^(k/2) - t^(-k/2) = u^(2k) - u^(-2k)."""
        if k == 0:
            return LaurentPoly(0, (0,))
        s = 1 if k > 0 else -1
        k = abs(k)
        return LaurentPoly(-2 * k, (-s,) + (0,) * (4 * k - 1) + (s,))

    def trimmed(self) -> "LaurentPoly":
        c = list(self.coeffs)
        off = self.offset
        while c and c[-1] == 0:
            c.pop()
        i = 0
        while i < len(c) and c[i] == 0:
            i += 1
        if i == len(c):
            return LaurentPoly(0, ())
        return LaurentPoly(off + i, tuple(c[i:]))

    def is_zero(self) -> bool:
        return not self.trimmed().coeffs

    def __add__(self, other):
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.coeffs), other.offset + len(other.coeffs))
        out = [0] * (hi - lo)
        for poly in (self, other):
            for i, c in enumerate(poly.coeffs):
                out[poly.offset - lo + i] += c
        return LaurentPoly(lo, tuple(out))

    def __mul__(self, other):
        a, b = self.trimmed(), other.trimmed()
        if not a.coeffs or not b.coeffs:
            return LaurentPoly(0, ())
        out = [0] * (len(a.coeffs) + len(b.coeffs) - 1)
        nz = [(j, y) for j, y in enumerate(b.coeffs) if y]
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in nz:
                    out[i + j] += x * y
        return LaurentPoly(a.offset + b.offset, tuple(out))

    def div_brace(self, k: int) -> "LaurentPoly":
        """Exact division by {k} = u^(-2k) (u^(4k) - 1); raises if inexact."""
        a = self.trimmed()
        if not a.coeffs:
            return a
        m = 4 * k
        c = a.coeffs
        n = len(c)
        if n <= m:
            raise ArithmeticError("inexact division by a quantum integer")
        quo = [0] * (n - m)
        for i in range(n - m):
            quo[i] = (quo[i - m] if i >= m else 0) - c[i]
        for i in range(n - m, n):
            if c[i] != (quo[i - m] if i >= m else 0):
                raise ArithmeticError("inexact division by a quantum integer")
        return LaurentPoly(a.offset + 2 * k, tuple(quo))

    def fold(self, r: int) -> np.ndarray:
        """Integer coefficients after reducing exponents mod 2r (u^(2r) = 1 at u = e^(i pi/r))."""
        bins = [0] * (2 * r)
        for i, c in enumerate(self.coeffs):
            if c:
                bins[(self.offset + i) % (2 * r)] += c
        return bins

    def at_root(self, r: int) -> complex:
        bins = self.fold(r)
        k = np.arange(2 * r)
        return complex(np.sum(np.array(bins, dtype=float) * np.exp(1j * PI * k / r)))


@lru_cache(maxsize=512)
def habiro_polynomial(pprime: int, n: int) -> LaurentPoly:
    """f_{K_p'}(n) as an exact Laurent polynomial in u = t^(1/4)."""
    total = LaurentPoly(0, ())
    for l in range(n + 1):
        term = LaurentPoly.monomial(n * (n + 3) + 4 * pprime * (l * l + l), (-1) ** l)
        term = term * LaurentPoly.brace(2 * l + 1)
        # common denominator {2n+1}!
        for j in range(n - l + 1, n + 1):
            term = term * LaurentPoly.brace(j)
        for j in range(n + l + 2, 2 * n + 2):
            term = term * LaurentPoly.brace(j)
        total = total + term
    for j in range(1, 2 * n + 2):
        total = total.div_brace(j)
    return total.trimmed()


def habiro_coeff(pprime: int, n: int, tables: QuantumTables) -> complex:
    """f_{K_p'}(n) at t = exp(4 pi i / r)."""
    r = tables.r
    if not 0 <= n <= r - 1:
        raise DomainError(f"n = {n} outside 0..{r - 1}")
    if 2 * n + 1 >= r:
        # {n+l+1}! would contain {r} = 0; use the Laurent polynomial instead
        return habiro_polynomial(pprime, n).at_root(r)
    bf = tables.braced_factorial
    u = PI / r  # t^(e/4) = exp(i u e)
    l = np.arange(n + 1)
    phase = np.exp(1j * u * (n * (n + 3) + 4 * pprime * (l * l + l)))
    ratio = bf[n] / (bf[n - l] * bf[n + l + 1])
    return complex(np.sum((-1.0) ** l * phase * tables.brace[2 * l + 1] * ratio))


def colored_jones(pprime: int, N: int, tables: QuantumTables) -> complex:
    """J_N(K_p', t) normalized so the unknot gives 1."""
    r = tables.r
    if not 1 <= N <= (r - 1) // 2:
        raise DomainError(f"color N = {N} outside 1..{(r - 1) // 2}")
    br = tables.brace
    total = 0j
    prod = 1.0 + 0j
    for n in range(N):
        if n:
            prod *= br[N + n] * br[N - n]
        total += habiro_coeff(pprime, n, tables) * prod
    return total


# the RT sum ------------------------------------------------------------------

@dataclass(frozen=True)
class RTValue:
    r: int
    value: complex
    log_abs: float
    terms_summed: int
    seconds: float = 0.0
    rel_error: float = 0.0  # root-sum-square rounding estimate over all terms


def _lattice(r):
    # N = 2n odd in [1, r-2], L = 2l' odd in [1, r-1-N]; sorted by N
    N, L = [], []
    for n2 in range(1, r - 1, 2):
        ls = np.arange(1, r - n2, 2)
        N.append(np.full(ls.size, n2))
        L.append(ls)
    return np.concatenate(N).astype(np.int64), np.concatenate(L).astype(np.int64)


def _frac_mod2(x: Fraction) -> float:
    return float(x % 2)


def prefactor(exp: FractionExpansion, pprime: int, r: int) -> complex:
    """c_r including the 1/(r sqrt q) normalization."""
    a, k, sigma = exp.a, exp.k, exp.sigma
    C = [u[2] for u in exp.U]
    sa = sum(a)
    cc = sum(Fraction(1, C[i - 1] * C[i]) for i in range(2, k + 1))
    ph = Fraction(3 * (k + 1), 4) + sa + Fraction(1, 2)
    ph += (3 * sigma - sa - cc - pprime - Fraction(5, 2)) / r
    ph += Fraction(r, 4) * (sigma + 3 * a[-1] + 2)
    return complex(np.exp(1j * PI * _frac_mod2(ph))) / (r * math.sqrt(exp.q))


class _Summand:
    """Vectorized summand of the RT multi-sum for a fixed (spec, r, expansion)."""

    def __init__(self, spec: SurgerySpec, r: int, exp: FractionExpansion, tables: QuantumTables):
        self.r, self.p, self.q, self.pp = r, spec.p, spec.q, spec.twist
        self.fd = fourier_maps(exp)
        self.N, self.L = _lattice(r)
        self.tables = tables

    def block(self, s: int, M: int):
        """Complex summands for fixed s and m = M/2 over all admissible (n, l')."""
        r, p, q, pp = self.r, self.p, self.q, self.pp
        start = np.searchsorted(self.N, abs(M))
        N, L = self.N[start:], self.L[start:]
        I = self.fd.Imap[s]
        Jq = self.fd.Jmap[s] * q
        Kph = self.fd.Kmap[s] * r / 4
        T = self.tables
        i1 = r - (M + N) // 2 - 1
        i2 = (r - N) // 2 - 1
        i3 = (N - M) // 2
        i4 = (r - 1 - N - L) // 2
        i5 = (r - 1 - N + L) // 2
        la = T.log_abs_pochhammer
        logmag = la[i1] + la[i2] - la[i3] - la[i4] - la[i5]
        # every rational phase in units of pi / (4 q r)
        den = 4 * q * r
        tab = T.phase_units  # units of pi / (2r)
        units = 2 * q * (tab[i1] + tab[i2] - tab[i3] - tab[i4] - tab[i5])
        quad = (-p * M * M + 4 * q * M * N - 2 * q * N * N - q * (4 * pp + 2) * L * L
                + 2 * r * I * M - 2 * q * r * N - 2 * q * r * L + 4 * q * (M + N))
        units = np.mod(units - quad, 2 * den)
        phase = PI * (units / den - _frac_mod2(Kph))
        # sin(x/q - J pi) with x = pi M / r and J q an integer
        if Jq.denominator != 1:
            raise DomainError("J(s) q is not an integer")
        s1 = math.sin(PI * ((M - r * int(Jq)) % (2 * q * r)) / (q * r))
        s2 = np.sin(PI * (2 * L % (2 * r)) / r)
        return s1 * s2 * np.exp(logmag + 1j * phase)

    def tasks(self):
        return [(s, M) for s in range(abs(self.q)) for M in range(2 - self.r, self.r - 1, 2)]


def _noise(b) -> float:
    # a term exp(g + i theta) is off by about |g| + |theta| ulps; errors are independent
    a = np.abs(b)
    g = np.log(a, out=np.zeros_like(a), where=a > 0)
    return float(np.sum((a * (np.abs(g) + 2 * PI)) ** 2))


def _pairwise(vals):
    vals = list(vals)
    if not vals:
        return 0j
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def default_threads() -> int:
    env = os.environ.get("QVOL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def rt_invariant(spec: SurgerySpec, r: int, precision: str = "double", threads: int | None = None,
                 deterministic: bool = True, rule: str = "ceil", order: str = "tree",
                 max_rel_error: float = 1e-3) -> RTValue:
    """RT_r(K_p'(p, q)) at q = exp(2 pi i / r) from the closed-form sum.

    ``order='sorted'`` sums all terms in increasing magnitude (a conditioning
    check); ``rule`` selects the continued-fraction expansion.  The sum cancels
    heavily for large r; PrecisionError is raised once the estimated relative
    rounding error exceeds ``max_rel_error``.
    """
    t0 = time.perf_counter()
    spec = spec.normalized()
    if r % 2 == 0 or r < 3:
        raise DomainError(f"r must be odd and >= 3, got {r}")
    exp = expand_slope(spec.p, spec.q, rule)
    if precision == "extended":
        value, count = _rt_extended(spec, r, exp)
        return RTValue(r, value, math.log(abs(value)) if value else -math.inf, count,
                       time.perf_counter() - t0)
    if r > MAX_R:
        raise PrecisionError(f"r = {r} exceeds the double-precision cap {MAX_R}")
    tables = build_quantum_tables(r)
    summand = _Summand(spec, r, exp, tables)
    tasks = summand.tasks()
    threads = threads or default_threads()
    count = 0
    if order == "sorted":
        allterms = np.concatenate([summand.block(s, M) for s, M in tasks])
        allterms = allterms[np.argsort(np.abs(allterms))]
        total = complex(math.fsum(allterms.real), math.fsum(allterms.imag))
        count = allterms.size
        noise2 = _noise(allterms)
    elif deterministic:
        def partial(task):
            b = summand.block(*task)
            return complex(np.sum(b)), b.size, _noise(b)

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(partial, tasks))
        else:
            parts = [partial(t) for t in tasks]
        total = _pairwise(v for v, _, _ in parts)
        count = sum(c for _, c, _ in parts)
        noise2 = math.fsum(a for _, _, a in parts)
    else:
        chunks = np.array_split(np.arange(len(tasks)), threads)

        def run(idx):
            acc, c, a = 0j, 0, 0.0
            for i in idx:
                b = summand.block(*tasks[i])
                acc += complex(np.sum(b))
                c += b.size
                a += _noise(b)
            return acc, c, a

        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, chunks))
        total = sum(v for v, _, _ in parts)
        count = sum(c for _, c, _ in parts)
        noise2 = sum(a for _, _, a in parts)
    value = prefactor(exp, spec.twist, r) * total
    if not np.isfinite(value):
        raise PrecisionError("RT sum overflowed double precision")
    rel_error = math.sqrt(noise2) * np.finfo(float).eps / abs(total) if total else math.inf
    if rel_error > max_rel_error:
        raise PrecisionError(f"cancellation at r = {r}: estimated relative error {rel_error:.3g}")
    return RTValue(r, complex(value), math.log(abs(value)) if value else -math.inf, count,
                   time.perf_counter() - t0, rel_error)


def _rt_extended(spec: SurgerySpec, r: int, exp: FractionExpansion, dps: int = 40):
    import mpmath

    with mpmath.workdps(dps):
        t = mpmath.expjpi(mpmath.mpf(4) / r)
        poch = [mpmath.mpc(1)]
        for k in range(1, r):
            poch.append(poch[-1] * (1 - t ** k))
        fd = fourier_maps(exp)
        p, q, pp = spec.p, spec.q, spec.twist
        total = mpmath.mpc(0)
        count = 0
        for s in range(q):
            I, J, K = fd.Imap[s], fd.Jmap[s], fd.Kmap[s]
            for M in range(2 - r, r - 1, 2):
                for N in range(abs(M), r - 1, 2):
                    for L in range(1, r - N, 2):
                        Q = (Fraction(-p * M * M, 4 * q) + M * N - Fraction(N * N, 2)
                             - Fraction((4 * pp + 2) * L * L, 4)) / r
                        Q += Fraction(I * M, 2 * q) - Fraction(N + L, 2) + Fraction(M + N, r) + K * r / 4
                        ratio = (poch[r - (M + N) // 2 - 1] * poch[(r - N) // 2 - 1]
                                 / (poch[(N - M) // 2] * poch[(r - 1 - N - L) // 2] * poch[(r - 1 - N + L) // 2]))
                        total += (mpmath.sinpi(Fraction(M, r * q) - J) * mpmath.sinpi(Fraction(2 * L, r))
                                  * mpmath.expjpi(-(Q % 2)) * ratio)
                        count += 1
        value = total * complex(prefactor(exp, pp, r)) * 1
        return complex(value), count


def rt_summand_log_magnitudes(spec: SurgerySpec, r: int):
    """(m, n, l', log|summand|) arrays over the whole lattice, s = 0..q-1 stacked."""
    spec = spec.normalized()
    exp = expand_slope(spec.p, spec.q)
    summand = _Summand(spec, r, exp, build_quantum_tables(r))
    rows = []
    for s, M in summand.tasks():
        b = summand.block(s, M)
        start = np.searchsorted(summand.N, abs(M))
        rows.append(np.column_stack([np.full(b.size, M / 2), summand.N[start:] / 2,
                                     summand.L[start:] / 2, np.log(np.abs(b) + 1e-300)]))
    return np.vstack(rows)


# Turaev-Viro ---------------------------------------------------------------

def b2_mod2(spec: SurgerySpec) -> int:
    """dim H_2(M; Z/2) from the parity rule: H_1 = Z/p, so it is 1 iff p is even."""
    return 1 if spec.p % 2 == 0 else 0


def b2_mod2_linking(exp: FractionExpansion) -> int:
    """Corank over GF(2) of the tridiagonal linking matrix of the surgery chain."""
    k = exp.k
    rows = []
    for i in range(k):
        bits = 0
        if exp.a[i] % 2:
            bits |= 1 << i
        if i > 0:
            bits |= 1 << (i - 1)
        if i < k - 1:
            bits |= 1 << (i + 1)
        rows.append(bits)
    rank = 0
    for col in range(k):
        piv = next((j for j in range(rank, k) if rows[j] >> col & 1), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for j in range(k):
            if j != rank and rows[j] >> col & 1:
                rows[j] ^= rows[rank]
        rank += 1
    return k - rank


def tv_invariant(spec: SurgerySpec, r: int, **kw) -> float:
    """TV_r = 2^(b2 - b0 + 2) |RT_r|^2 with b0 = 1."""
    val = rt_invariant(spec, r, **kw)
    return 2.0 ** (b2_mod2(spec) + 1) * abs(val.value) ** 2
