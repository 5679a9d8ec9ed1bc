"""Dilogarithm family, Faddeev-type quantum dilogarithm and quantum factorial tables.

Every function accepts scalars or numpy arrays.  Scalars come back as Python
``complex``/``float``; arrays keep their shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .errors import DomainError, ToleranceError

PI = math.pi
ZETA2 = PI * PI / 6.0

_SERIES_TERMS = 64
_BERN_TERMS = 40
# c_n = B_n / (n+1)!, so that Li2(z) = sum c_n u^(n+1) with u = -log(1-z)
_BERN = np.array([b / math.factorial(n + 1) for n, b in enumerate(bernoulli(_BERN_TERMS))])


def _unwrap(value, like):
    if np.ndim(like) == 0:
        return value.item()
    return value


def _power_series(w):
    # sum_{k>=1} w^k / k^2 by Horner, |w| <= 0.5 keeps 64 terms below 1e-20
    acc = np.zeros_like(w)
    for k in range(_SERIES_TERMS, 0, -1):
        acc = w * (1.0 / (k * k) + acc)
    return acc


def _bernoulli_series(u):
    acc = np.zeros_like(u)
    for c in _BERN[::-1]:
        acc = u * (c + acc)
    return acc


def _dilog_disk(w):
    """Li2 on the closed unit disk."""
    out = np.empty_like(w)
    small = np.abs(w) <= 0.5
    right = ~small & (w.real > 0.5)
    rest = ~small & ~right
    out[small] = _power_series(w[small])
    out[rest] = _bernoulli_series(-np.log1p(-w[rest]))
    if right.any():
        wr = w[right]
        v = 1.0 - wr
        lv = np.zeros_like(v)
        nz = v != 0
        lv[nz] = np.log(wr[nz]) * np.log(v[nz])
        # Li2(1 - wr) with |1 - wr| < 1 and Re(1 - wr) < 0.5
        inner = np.where(np.abs(v) <= 0.5, _power_series(v), _bernoulli_series(-np.log(wr)))
        out[right] = ZETA2 - lv - inner
    return out


def dilog(z, precision: str = "double"):
    """Principal branch of Li2(z) = sum z^k/k^2, cut along (1, inf).

    On the cut itself the limit from below (Im z -> 0-) is returned, which is
    also the convention of ``mpmath.polylog``.
    """
    if precision == "extended":
        import mpmath

        f = np.vectorize(lambda v: complex(mpmath.polylog(2, mpmath.mpc(v))), otypes=[complex])
        return _unwrap(f(np.asarray(z, dtype=complex)), z)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(zz)):
        raise DomainError("dilog argument must be finite")
    out = np.empty_like(zz)
    big = np.abs(zz) > 1.0
    cut = big & (zz.imag == 0.0) & (zz.real > 1.0)
    off = big & ~cut
    inside = ~big
    out[inside] = _dilog_disk(zz[inside])
    if off.any():
        zo = zz[off]
        out[off] = -_dilog_disk(1.0 / zo) - ZETA2 - 0.5 * np.log(-zo) ** 2
    if cut.any():
        x = zz[cut].real
        lx = np.log(x)
        re = 2.0 * ZETA2 - 0.5 * lx * lx - _dilog_disk((1.0 / x).astype(complex)).real
        out[cut] = re - 1j * PI * lx
    return _unwrap(out.reshape(np.shape(z)), z)


def lobachevsky(theta):
    """Lobachevsky function, odd with period pi."""
    th = np.mod(np.asarray(theta, dtype=float), PI)
    val = 0.5 * np.imag(dilog(np.exp(2j * th)))
    return _unwrap(np.asarray(val), theta)


def bloch_wigner(z):
    """D2(z) = Im Li2(z) + log|z| arg(1 - z); zero on the real axis."""
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros(zz.shape)
    live = zz.imag != 0.0
    w = zz[live]
    out[live] = np.imag(dilog(w)) + np.log(np.abs(w)) * np.angle(1.0 - w)
    return _unwrap(out.reshape(np.shape(z)), z)


def f_asymptote(t, X):
    """Piecewise bound F(t, X) for Im Li2(exp(2i(t + iX)))."""
    t = np.asarray(t, dtype=float)
    X = np.asarray(X, dtype=float)
    val = np.where(X >= 0.0, 0.0, 2.0 * (2.0 * t - PI) * X)
    return _unwrap(val, val)


# quantum dilogarithm -------------------------------------------------------

_GL_LO = np.polynomial.legendre.leggauss(20)
_GL_HI = np.polynomial.legendre.leggauss(30)
_SEMI = np.polynomial.legendre.leggauss(48)


def strip_margin(r: int, z) -> float:
    """Distance of Re z to the boundary of the strip (-pi/r, pi + pi/r)."""
    re = np.real(z)
    return np.minimum(re + PI / r, PI + PI / r - re)


def _check_r(r):
    if int(r) != r or r < 3 or r % 2 == 0:
        raise DomainError(f"r must be an odd integer >= 3, got {r}")


def _panels(lo, hi, width):
    n = max(1, int(math.ceil((hi - lo) / width)))
    return np.linspace(lo, hi, n + 1)


def _gl(fun, edges, rule):
    x0, w0 = rule
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    x = (0.5 * (a + b) + half * x0[None, :]).ravel()
    w = (half * w0[None, :]).ravel()
    return np.sum(fun(x) * w)


def _phi_scalar(r, z, eps, tol):
    a = 2.0 * z - PI
    b = 2.0 * PI / r
    kappa = PI + b - abs(a.real)
    if kappa <= 0:
        raise DomainError(f"Re z = {z.real} outside the strip of phi_{r}")

    def ray(x):
        num = np.exp((a - PI - b) * x) - np.exp((-a - PI - b) * x)
        return num / (x * -np.expm1(-2.0 * PI * x) * -np.expm1(-2.0 * b * x))

    # truncate where the integrand envelope drops below 1e-18
    X = eps + 42.0 / kappa
    while 2.0 * math.exp(-kappa * X) / (X * -math.expm1(-2 * b * X)) > 1e-18:
        X *= 1.25
        if X > 1e7:
            raise ToleranceError("quantum dilogarithm tail does not decay")
    width = min(1.0, 2.0 * PI / max(abs(a.imag), 1e-300))
    edges = _panels(eps, X, width)
    lo = _gl(ray, edges, _GL_LO)
    hi = _gl(ray, edges, _GL_HI)
    if abs(hi - lo) > tol * max(1.0, abs(hi)):
        raise ToleranceError(f"ray quadrature unconverged: {abs(hi - lo):.2e}")

    th0, tw = _SEMI
    th = 0.5 * PI * (th0 + 1.0)
    x = eps * np.exp(1j * th)
    fx = np.exp(a * x) / (4.0 * x * np.sinh(PI * x) * np.sinh(b * x))
    # path runs from -eps to +eps through the upper half plane (theta: pi -> 0)
    semi = -np.sum(fx * 1j * x * tw) * 0.5 * PI
    return 4j * PI / r * (semi + hi)


def _phi_extended(r, z, eps):
    import mpmath

    mp = mpmath.mp
    with mpmath.workdps(30):
        zz = mpmath.mpc(z)
        a = 2 * zz - mp.pi
        b = 2 * mp.pi / r

        def ray(x):
            return (mpmath.exp((a - mp.pi - b) * x) - mpmath.exp((-a - mp.pi - b) * x)) / (
                x * -mpmath.expm1(-2 * mp.pi * x) * -mpmath.expm1(-2 * b * x))

        def semi(th):
            x = eps * mpmath.expj(th)
            return mpmath.exp(a * x) / (4 * x * mpmath.sinh(mp.pi * x) * mpmath.sinh(b * x)) * 1j * x

        kappa = mp.pi + b - abs(mpmath.re(a))
        X = eps + 80 / kappa
        pts = [eps] + [eps + k * (X - eps) / 16 for k in range(1, 17)]
        val = mpmath.quad(ray, pts) - mpmath.quad(semi, [0, mp.pi / 2, mp.pi])
        return complex(4j * mp.pi / r * val)


def quantum_dilog(r: int, z, precision: str = "double", eps: float = 0.5, tol: float = 1e-10):
    """phi_r(z) from its contour integral, valid for -pi/r < Re z < pi + pi/r."""
    _check_r(r)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if precision == "extended":
        vals = [_phi_extended(r, v, eps) for v in zz.ravel()]
    else:
        vals = [_phi_scalar(r, complex(v), eps, tol) for v in zz.ravel()]
    return _unwrap(np.array(vals, dtype=complex).reshape(np.shape(z)), z)


# quantum factorials --------------------------------------------------------

@dataclass(frozen=True)
class QuantumTables:
    """Quantum factorial data at t = exp(4 pi i / r).

    ``phase_units[n]`` is the argument of (t)_n in units of pi/(2r), kept as an
    exact integer modulo 4r so long products never lose their phase.
    """

    r: int
    t: complex
    pochhammer: np.ndarray
    log_abs_pochhammer: np.ndarray
    phase_units: np.ndarray
    braced_factorial: np.ndarray
    brace: np.ndarray
    quantum_int: np.ndarray

    def log_pochhammer(self, n):
        """Complex log of (t)_n with the exact reduced phase."""
        n = np.asarray(n)
        return self.log_abs_pochhammer[n] + 1j * (PI / (2 * self.r)) * self.phase_units[n]


MAX_R = 2001


def build_quantum_tables(r: int, cap: int = MAX_R) -> QuantumTables:
    _check_r(r)
    if r > cap:
        raise DomainError(f"r = {r} exceeds the table cap {cap}")
    k = np.arange(1, r)
    s = np.sin(2.0 * PI * k / r)
    # 1 - t^k = -2i sin(2 pi k/r) exp(2 pi i k/r)
    log_abs = np.concatenate([[0.0], np.cumsum(np.log(2.0 * np.abs(s)))])
    neg = np.concatenate([[0], np.cumsum(s < 0)])
    n = np.arange(r, dtype=np.int64)
    units = np.mod(2 * n * (n + 1) - n * r + 2 * r * neg, 4 * r)
    poch = np.exp(log_abs + 1j * (PI / (2 * r)) * units)
    poch[0] = 1.0
    # {n}! = (-1)^n t^{-n(n+1)/4} (t)_n has phase pi (n/2 + #negative sines)
    bf_units = np.mod(n + 2 * neg, 4)
    braced = np.exp(log_abs + 0.5j * PI * bf_units)
    m = np.arange(0, 2 * r + 1)
    brace = 2j * np.sin(2.0 * PI * m / r)
    qint = np.sin(2.0 * PI * m / r) / math.sin(2.0 * PI / r)
    for arr in (poch, log_abs, units, braced, brace, qint):
        arr.setflags(write=False)
    return QuantumTables(r, complex(np.exp(4j * PI / r)), poch, log_abs, units, braced, brace, qint)
