"""Potential function V, its quantum deformation V_r and the sister potential W.

Points are complex triples (x, y, z); every dilogarithm is Li2(exp(2i c.w)) for
one of five fixed integer covectors c, so values, gradients and Hessians share
one table of exponents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .contfrac import FourierData, SurgerySpec, expand_slope, fourier_maps
from .errors import BranchError, DomainError
from .specfun import bloch_wigner, dilog, quantum_dilog

PI = math.pi
LOG5_4 = math.log(5.0) / 4.0
CUT_TOL = 1e-12
REGION_TOL = 1e-12

# covectors and signs of the five dilogarithm terms
_COVECTORS = np.array([[1, 1, 0], [-1, 1, 0], [0, -1, 1], [0, -1, -1], [0, -1, 0]], dtype=float)
_SIGNS = np.array([1.0, 1.0, 1.0, 1.0, -1.0])


# regions -------------------------------------------------------------------

def _in_D(x, y, z, tol=REGION_TOL):
    return abs(x) - tol <= y < PI + tol and -tol < z < PI - y + tol


def _in_Deps(x, y, z, eps, tol=REGION_TOL):
    t = tol
    return (-PI / 4 + eps - t < x < PI / 4 - eps + t and y - x > eps - t and x + y > eps - t
            and z - y > eps - t and y + z < PI - eps + t and y + 2 * z < 1.75 * PI - eps + t
            and 2 * z - y > PI / 4 - eps - t)


def _in_DH(x, y, z, tol=REGION_TOL):
    return (-tol < y - x < PI / 2 + tol and -tol < y + x < PI / 2 + tol
            and PI / 2 - tol < z + y < PI + tol and -tol < z - y < PI / 2 + tol)


def region_flags(x, y, z, eps: float = 0.02) -> frozenset:
    """All regions containing the real point (x, y, z); closures within 1e-12 count."""
    flags = set()
    if _in_D(x, y, z):
        flags.add("D")
    if _in_Deps(x, y, z, 0.0):
        flags.add("D0")
    if _in_Deps(x, y, z, eps):
        flags.add("D_eps")
    if _in_DH(x, y, z):
        flags.add("DH")
    return frozenset(flags)


@dataclass(frozen=True)
class PotentialPoint:
    x: complex
    y: complex
    z: complex
    eps: float = 0.02

    @property
    def flags(self) -> frozenset:
        return region_flags(self.x.real if isinstance(self.x, complex) else float(self.x),
                            complex(self.y).real, complex(self.z).real, self.eps)

    @property
    def region(self) -> str:
        f = self.flags
        for name in ("D_eps", "D0", "DH", "D"):
            if name in f:
                return name
        return "outside"

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=complex)


def point(x, y, z, eps: float = 0.02) -> PotentialPoint:
    return PotentialPoint(complex(x), complex(y), complex(z), eps)


@dataclass(frozen=True)
class IndexData:
    s: int
    m: int
    n: int
    l: int
    kvalue: Fraction
    Jval: Fraction
    Kval: Fraction


def index_data(fd: FourierData, s: int, m: int, n: int = 0, l: int = 0) -> IndexData:
    return IndexData(s, m, n, l, fd.kvalue(s, m), fd.Jmap[s], fd.Kmap[s])


def fourier_data(spec: SurgerySpec) -> FourierData:
    spec = spec.normalized()
    return fourier_maps(expand_slope(spec.p, spec.q))


def partner(fd: FourierData, s: int, m: int, mrange=range(-50, 51)):
    """Some (s', m') with k(s,m) + k(s',m') = 0."""
    target = -fd.kvalue(s, m)
    for s2 in fd.Imap:
        num = (Fraction(fd.Imap[s2], fd.q) + 1 - target) / 2
        if num.denominator == 1:
            return s2, int(num)
    raise DomainError(f"no partner index for {(s, m)}")


# dilogarithm terms ------------------------------------------------------------

def _exponentials(w):
    args = 2j * (_COVECTORS @ w)
    return np.exp(args)


def _check_cut(e, strict_one=False):
    for i, v in enumerate(e):
        near_axis = abs(v.imag) < CUT_TOL
        if near_axis and v.real > 1.0 + CUT_TOL:
            raise BranchError(f"dilogarithm term {i} has argument {v} on the cut")
        if strict_one and near_axis and abs(v.real - 1.0) <= CUT_TOL:
            raise BranchError(f"logarithm in term {i} is singular at argument {v}")


def dilog_part(pt: PotentialPoint) -> complex:
    """Li2(A) + Li2(B) + Li2(C) + Li2(D) - Li2(E) at the point."""
    e = _exponentials(pt.vector())
    _check_cut(e)
    return complex(np.sum(_SIGNS * dilog(e)))


def _quadratic_V(w, idx: IndexData, spec: SurgerySpec):
    x, y, z = w
    p, q, pp = spec.p, spec.q, spec.twist
    k = float(idx.kvalue)
    return (-(p + 2 * q) / q * x * x - 4 * y * y - (4 * pp + 2) * z * z + 2 * PI * k * x
            - 4 * PI * idx.n * y - 2 * PI * (2 * idx.l + 1) * z + float(idx.Kval) * PI ** 2 - PI ** 2 / 2)


def _quadratic_W(w, idx: IndexData, spec: SurgerySpec):
    x, y, z = w
    p, q, pp = spec.p, spec.q, spec.twist
    k = float(idx.kvalue)
    return ((p + 2 * q) / q * x * x - 4 * y * y + 4 * (pp - 1) * z * z - 2 * PI * k * x
            - 4 * PI * idx.n * y + 4 * PI * idx.l * z - PI ** 2 / 2 - float(idx.Kval) * PI ** 2)


def eval_V(pt: PotentialPoint, idx: IndexData, spec: SurgerySpec) -> complex:
    spec = spec.normalized()
    return dilog_part(pt) + complex(_quadratic_V(pt.vector(), idx, spec))


def eval_W(pt: PotentialPoint, idx: IndexData, spec: SurgerySpec) -> complex:
    spec = spec.normalized()
    return dilog_part(pt) + complex(_quadratic_W(pt.vector(), idx, spec))


def _dilog_gradient(w):
    e = _exponentials(w)
    _check_cut(e, strict_one=True)
    # d/dw Li2(exp(2i c.w)) = -2i log(1 - exp(2i c.w)) c
    return (_SIGNS * -2j * np.log(1.0 - e)) @ _COVECTORS


def grad_V(pt: PotentialPoint, idx: IndexData, spec: SurgerySpec) -> np.ndarray:
    spec = spec.normalized()
    x, y, z = w = pt.vector()
    p, q, pp = spec.p, spec.q, spec.twist
    quad = np.array([
        -2 * (p + 2 * q) / q * x + 2 * PI * float(idx.kvalue),
        -8 * y - 4 * PI * idx.n,
        -2 * (4 * pp + 2) * z - 2 * PI * (2 * idx.l + 1),
    ])
    return _dilog_gradient(w) + quad


def grad_W(pt: PotentialPoint, idx: IndexData, spec: SurgerySpec) -> np.ndarray:
    spec = spec.normalized()
    x, y, z = w = pt.vector()
    p, q, pp = spec.p, spec.q, spec.twist
    quad = np.array([
        2 * (p + 2 * q) / q * x - 2 * PI * float(idx.kvalue),
        -8 * y - 4 * PI * idx.n,
        8 * (pp - 1) * z + 4 * PI * idx.l,
    ])
    return _dilog_gradient(w) + quad


def h(w):
    """h(w) = 1 / (exp(2iw) - 1)."""
    d = np.exp(2j * np.asarray(w, dtype=complex)) - 1.0
    if np.any(np.abs(d) < CUT_TOL):
        raise BranchError("pole of h")
    return 1.0 / d


def _dilog_hessian(w):
    u = _COVECTORS @ w
    # second derivative of Li2(exp(2iu)) in u is -4 h(-u)
    coef = _SIGNS * -4.0 * h(-u)
    return np.einsum("k,ki,kj->ij", coef, _COVECTORS, _COVECTORS)


def hessian_V(pt: PotentialPoint, idx: IndexData, spec: SurgerySpec) -> np.ndarray:
    spec = spec.normalized()
    p, q, pp = spec.p, spec.q, spec.twist
    H = _dilog_hessian(pt.vector())
    H = H + np.diag([-2 * (p + 2 * q) / q, -8.0, -2 * (4 * pp + 2)])
    return 0.5 * (H + H.T)


def hessian_W(pt: PotentialPoint, idx: IndexData, spec: SurgerySpec) -> np.ndarray:
    spec = spec.normalized()
    p, q, pp = spec.p, spec.q, spec.twist
    H = _dilog_hessian(pt.vector()) + np.diag([2 * (p + 2 * q) / q, -8.0, 8.0 * (pp - 1)])
    return 0.5 * (H + H.T)


# quantum potential -------------------------------------------------------------

def eval_Vr(r: int, pt: PotentialPoint, idx: IndexData, spec: SurgerySpec, precision: str = "double") -> complex:
    """V_r(x, y, z, s, m, n, l) through the quantum dilogarithm, for Re(x, y, z) in D0."""
    spec = spec.normalized()
    x, y, z = pt.x, pt.y, pt.z
    p, q, pp = spec.p, spec.q, spec.twist
    args = np.array([y + x + PI / r, y - x + PI / r, z - y, PI - y - z, PI - y - PI / r, PI / r])
    re = args.real
    if np.any(re <= -PI / r) or np.any(re >= PI + PI / r):
        raise DomainError("quantum dilogarithm argument outside its strip")
    phi = quantum_dilog(r, args, precision=precision)
    I = fourier_data(spec).Imap[idx.s]
    val = phi[0] + phi[1] + phi[2] + phi[3] - phi[4] - phi[5]
    val += (-(p + 2 * q) / q * x * x - 4 * y * y - (4 * pp + 2) * z * z + 2 * PI * (I / q + 1) * x
            - 2 * PI * z + float(idx.Kval) * PI ** 2)
    val += -PI ** 2 / 3 - 4 * PI / r * (x + y) + 2 * PI ** 2 / r - PI ** 2 / (3 * r * r)
    val += -4 * PI * idx.m * x - 4 * PI * idx.n * y - 4 * PI * idx.l * z
    return complex(val)


def vr_first_order(r: int, pt: PotentialPoint) -> complex:
    """The 1/r correction so that V_r = V + vr_first_order + O(1/r^2)."""
    x, y = pt.x, pt.y
    s = (np.log(1 - np.exp(2j * (y + x))) + np.log(1 - np.exp(2j * (y - x))) + np.log(1 - np.exp(-2j * y))
         - 2j * (x + y) + math.log(r) + 1.5j * PI - math.log(2.0))
    return complex(-s * 2j * PI / r)


def im_V_surface(pt_real, shift: float, idx: IndexData, spec: SurgerySpec) -> float:
    """Im V at (x, y + i shift, z) for a real triple."""
    x, y, z = pt_real
    return eval_V(point(x, y + 1j * shift, z), idx, spec).imag


def d2_sum(pt: PotentialPoint) -> float:
    """Signed D2 sum over the five exponential arguments."""
    e = _exponentials(pt.vector())
    return float(np.sum(_SIGNS * bloch_wigner(e)))


def im_V_second_derivative_in_imy(pt: PotentialPoint) -> float:
    """d^2 Im V / d(Im y)^2 = -Im V_yy (only the dilogarithm part depends on Im y nonlinearly)."""
    x, y, z = pt.x, pt.y, pt.z
    return float((4 * (h(y + z) + h(y - z) - h(y + x) - h(y - x) - h(y))).imag)


# appendix face maximizations ---------------------------------------------------

def _v(x, y, z, with_square=False):
    val = dilog_part(point(x, y, z))
    if with_square:
        val -= 4 * complex(y) ** 2
    return val


def _maximize(fun, lo, hi, scan=1000):
    grid = np.linspace(lo, hi, scan + 2)[1:-1]
    vals = np.array([fun(t) for t in grid])
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if i == 0 or i == len(grid) - 1:
        # monotone on the face: supremum at the boundary
        end = lo if i == 0 else hi
        return end, fun(end)
    res = minimize_scalar(lambda t: -fun(t), bracket=(a, grid[i], b), method="golden", tol=1e-10)
    return float(res.x), float(-res.fun)


PLUS0 = 1e-7  # one-sided step for limits taken from the right


@dataclass(frozen=True)
class FaceMaximum:
    name: str
    argmax: float
    value: float
    printed: float


def appendix_maxima() -> list:
    S = LOG5_4
    iS = 1j * S
    faces = [
        ("F1", lambda y: _v(y, y, PI / 2).imag, 1e-9, PI / 4, 3.0448),
        ("F2", lambda y: _v(PI / 4, y, PI / 2).imag, PI / 4, PI / 2, 3.2527),
        ("F3", lambda z: _v(0.0, 2 * z - PI / 4, z).imag, PI / 8, PI / 4, 3.1439),
        ("F4", lambda y: _v(0.0, y, y + PLUS0).imag, PI / 4, PI / 2, 2.7868),
        ("F1 shifted", lambda y: _v(y, y + iS, PI / 2, True).imag, 1e-9, PI / 4, 3.2543),
        ("F2 shifted", lambda y: _v(PI / 2 - y, y + iS, PI / 2, True).imag, PI / 4, PI / 2, 2.635),
        ("F3 shifted", lambda y: _v(0.0, y + iS, PI / 2 - y, True).imag, 1e-9, PI / 4, 3.4595),
        ("F4 shifted", lambda y: _v(0.0, y + iS, y + PLUS0, True).imag, PI / 4, PI / 2, 2.5778),
    ]
    out = []
    for name, fun, lo, hi, printed in faces:
        arg, val = _maximize(fun, lo, hi)
        out.append(FaceMaximum(name, arg, val, printed))
    return out


def strip_dilog_max():
    """Maximum over t of Im Li2(exp(2i(t + i log5/4))) and where it is attained."""
    fun = lambda t: dilog(np.exp(2j * (t + 1j * LOG5_4))).imag
    return _maximize(fun, 0.0, PI)


def f_y(y) -> complex:
    """2 Li2(e^{2iy}) + 2 Li2(-e^{-2iy}) - Li2(e^{-2iy}) - 4 y^2."""
    e = np.exp(2j * complex(y))
    return complex(2 * dilog(e) + 2 * dilog(-1 / e) - dilog(1 / e) - 4 * complex(y) ** 2)


def complete_structure_y(sign: int = 1) -> complex:
    return sign * math.atan(2.0) / 2 + 1j * LOG5_4


def y_pair(x, z):
    """The two solutions y1, y2 of V'_y = 0 at fixed (x, z), with Re y1 >= Re y2.

    With a = e^{2ix}, c = e^{2iz} the equation is quadratic in 1/b, b = e^{2iy}.
    Near (0, pi/2) these continue the pair +-arctan(2)/2 + i log5/4.
    """
    a, c = np.exp(2j * complex(x)), np.exp(2j * complex(z))
    B = a + 1 / a
    C = 1 + a + 1 / a - c - 1 / c
    d = np.sqrt(B * B - 4 * C)
    ys = [np.log(2 / (B + d)) / 2j, np.log(2 / (B - d)) / 2j]
    ys.sort(key=lambda w: -w.real)
    return complex(ys[0]), complex(ys[1])
