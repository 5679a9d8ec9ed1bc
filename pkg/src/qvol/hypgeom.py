"""Hyperbolic structures on Whitehead link fillings W((p, q), (1, -p')).

The five-tetrahedron triangulation is parametrized by (a, b, c); Newton's
method runs in u = (log a, log b, log(-c)) and is continued from the complete
structure along generalized filling coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .contfrac import SurgerySpec
from .errors import ConsistencyError, ContinuationError, DegenerateError
from .potential import (PotentialPoint, fourier_data, grad_V, hessian_V, index_data, eval_V, eval_W,
                        point)
from .specfun import bloch_wigner, lobachevsky

PI = math.pi
TWO_PI_I = 2j * PI
COMPLETE_ABC = (1.0 + 0j, (1 + 2j) / 5, -1.0 + 0j)


# classification ----------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    hyperbolic: bool
    reason: str = ""


def classify(spec: SurgerySpec) -> Classification:
    p, q, pp = spec.p, spec.q, spec.twist
    if pp in (0, -1):
        return Classification(False, f"twist {pp} gives the unknot or the figure-eight family")
    slope = Fraction(p, q)
    if slope in (0, 1, 2, 3, 4):
        return Classification(False, f"slope {slope} is exceptional")
    if pp == 1 and slope in (-2, -3, -4):
        return Classification(False, f"slope {slope} on the trefoil is exceptional")
    return Classification(True)


# shapes ------------------------------------------------------------------------

def shapes_from_abc(a, b, c):
    """(c1, ..., c5) of the pentagonal bipyramid."""
    for d, name in ((b, "b"), (b - c, "b - c"), (a * b, "ab"), (b * c - 1, "bc - 1")):
        if abs(d) < 1e-300:
            raise DegenerateError(f"{name} vanishes")
    return np.array([b / (b - c), (b - a) / b, (b - 1) / b, (a * b - 1) / (a * b), b * c / (b * c - 1)])


def primed_shapes(a, b, c):
    """(c1', c2'', c3'', c4'', c5') used by the volume formula."""
    return np.array([c / b, b / a, b, a * b, 1 / (b * c)])


def thurston_shapes(cs):
    """Cross-ratio shapes (c1..c5) -> Thurston coordinates (w, x, y, z)."""
    c1, c2, c3, c4, c5 = cs
    den = [c1 * c2 * (c4 - 1), (c1 - 1) * (1 / (c4 * c5) - 1), (c1 * c2 - 1) * (1 / c5 - 1), c2 - 1]
    if min(abs(d) for d in den) < 1e-300:
        raise DegenerateError("vanishing denominator in the shape map")
    x = (1 - c1 * c2) / den[0]
    y = -c1 * (c2 - 1) * (c3 - 1) / den[1]
    z = -c1 * c2 * (c3 - 1) * (c4 - 1) / den[2]
    w = (1 / (c4 * c5) - 1) / den[3]
    return np.array([w, x, y, z])


def cross_ratio_shapes(wxyz):
    """Thurston coordinates (w, x, y, z) -> (c1, ..., c5), the inverse of thurston_shapes.

    c2 and c4 carry the factors (1 - w) and (1 - x); with (w - 1) and (x - 1) the
    complete structure would map to c2 = c4 = -2i.
    """
    w, x, y, z = wxyz
    u = y * z + x * z - y - z
    v = w * y + y * z - y - z
    den = [(w * y - 1) * u, w * z * (x - 1) * (y - 1), (y - 1) * (z - 1), x * y * (z - 1) * (w - 1),
           (x * z - 1) * v]
    if min(abs(d) for d in den) < 1e-300:
        raise DegenerateError("vanishing denominator in the cross-ratio map")
    return np.array([
        w * y * (y - 1) * (z - 1) / den[0],
        (1 - w) * u / den[1],
        (w * y - 1) * (x * z - 1) / den[2],
        (1 - x) * v / den[3],
        x * z * (y - 1) * (z - 1) / den[4],
    ])


def thurston_gluing_residual(wxyz) -> float:
    w, x, y, z = wxyz
    r1 = np.log(w) + np.log(x) + np.log(y) + np.log(z) - TWO_PI_I
    r2 = np.log(1 - w) + np.log(1 - x) - np.log(1 - y) - np.log(1 - z)
    return float(max(abs(r1), abs(r2)))


def bipyramid_gluing_residual(cs) -> float:
    """Residual of the three edge equations in the primed convention."""
    c1, c2, c3, c4, c5 = cs
    p1, p5 = 1 - 1 / c1, 1 - 1 / c5
    d2, d3, d4 = 1 / (1 - c2), 1 / (1 - c3), 1 / (1 - c4)
    r1 = sum(np.log(c) for c in cs) - TWO_PI_I
    r2 = 2 * np.log(d3) + np.log(p1) + np.log(p5) - TWO_PI_I
    r3 = 2 * np.log(d3) - np.log(d2) - np.log(d4)
    # the first equation holds exactly only modulo 2 pi i in principal logs
    r1 = r1 - TWO_PI_I * round((r1 / TWO_PI_I).real)
    r2 = r2 - TWO_PI_I * round((r2 / TWO_PI_I).real)
    return float(max(abs(r1), abs(r2), abs(r3)))


# equations in log coordinates --------------------------------------------------

# the five monomials f with a log(1 - f) term: ab, b/a, 1/b, c/b, 1/(bc)
_MONO = np.array([[1, 1, 0], [-1, 1, 0], [0, -1, 0], [0, -1, 1], [0, -1, -1]])


def _log_terms(a, b, c, ref=None):
    """log(1 - f) for the five monomials; with ``ref`` each is moved by 2 pi i k to the nearest value."""
    f = np.array([a * b, b / a, 1 / b, c / b, 1 / (b * c)])
    L = np.log(1 - f)
    if ref is not None:
        L = L + TWO_PI_I * np.round((np.asarray(ref) - L).imag / (2 * PI))
    return L


def _holonomies_from(u, L):
    m1 = u[0]
    l1 = 2 * u[0] + 2 * L[0] - 2 * L[1]
    m2 = 2 * u[2] + L[4] - L[3]
    l2 = 2 * u[2]
    return m1, l1, m2, l2


def _gluing_from(u, L):
    return 2 * u[1] - L[0] - L[1] - L[2] + L[3] + L[4]


def holonomies(a, b, c):
    u = (np.log(a), np.log(b), np.log(-c))
    return _holonomies_from(u, _log_terms(a, b, c))


def gluing(a, b, c):
    return _gluing_from((np.log(a), np.log(b), np.log(-c)), _log_terms(a, b, c))


def _from_logs(u):
    return np.exp(u[0]), np.exp(u[1]), -np.exp(u[2])


def _residual(u, coeffs, t, ref=None):
    a, b, c = _from_logs(u)
    (p, q), (P, Q) = coeffs
    L = _log_terms(a, b, c, ref)
    m1, l1, m2, l2 = _holonomies_from(u, L)
    return np.array([p * m1 + q * l1 - TWO_PI_I * t, P * m2 + Q * l2 - TWO_PI_I * t, _gluing_from(u, L)])


def _jacobian(u, coeffs):
    a, b, c = _from_logs(u)
    (p, q), (P, Q) = coeffs
    ab, ba, cb, ibc, ib = a * b, b / a, c / b, 1 / (b * c), 1 / b
    # derivatives of log(1 - f) with f a monomial in (a, b, -c): d/du_k = -f/(1-f) * exponent_k
    g = lambda f: -f / (1 - f)
    dm1 = np.array([1, 0, 0])
    dl1 = np.array([2, 0, 0]) + 2 * g(ab) * np.array([1, 1, 0]) - 2 * g(ba) * np.array([-1, 1, 0])
    dm2 = np.array([0, 0, 2]) + g(ibc) * np.array([0, -1, -1]) - g(cb) * np.array([0, -1, 1])
    dl2 = np.array([0, 0, 2])
    dglu = (np.array([0, 2, 0]) - g(ab) * np.array([1, 1, 0]) - g(ba) * np.array([-1, 1, 0])
            - g(ib) * np.array([0, -1, 0]) + g(cb) * np.array([0, -1, 1]) + g(ibc) * np.array([0, -1, -1]))
    return np.array([p * dm1 + q * dl1, P * dm2 + Q * dl2, dglu], dtype=complex)


def _newton(u, coeffs, t, tol=1e-12, step_tol=1e-13, maxit=50, ref=None):
    for _ in range(maxit):
        F = _residual(u, coeffs, t, ref)
        du = np.linalg.solve(_jacobian(u, coeffs), -F)
        if np.max(np.abs(du)) > PI / 2:
            return None
        u = u + du
        if np.max(np.abs(du)) < step_tol:
            break
    if not np.all(np.isfinite(u)) or np.max(np.abs(_residual(u, coeffs, t, ref))) > tol:
        return None
    return u


@dataclass
class HyperbolicSolution:
    abc: tuple
    shapes: np.ndarray
    wxyz: np.ndarray
    holonomies: tuple
    volume: float
    cs: float = float("nan")
    geometric: bool = False
    residual: float = 0.0
    coeffs: tuple = field(default=((1, 0), (1, 0)))


def _package(u, coeffs, t=1.0, ref=None):
    a, b, c = _from_logs(u)
    cs = shapes_from_abc(a, b, c)
    res = float(np.max(np.abs(_residual(u, coeffs, t, ref))))
    hol = _holonomies_from(u, _log_terms(a, b, c, ref))
    sol = HyperbolicSolution((complex(a), complex(b), complex(c)), cs, thurston_shapes(cs),
                             tuple(complex(h) for h in hol), 0.0,
                             geometric=bool(np.all(cs.imag > 0)), residual=res, coeffs=coeffs)
    sol.volume = _volume_d2(primed_shapes(a, b, c))
    return sol


def complete_structure() -> HyperbolicSolution:
    u = np.array([0.0, np.log(COMPLETE_ABC[1]), 0.0], dtype=complex)
    return _package(u, ((1, 0), (0, 1)), 0.0)


def solve_filling(coeffs, steps: int = 32, tol: float = 1e-12) -> HyperbolicSolution:
    """Solve p m1 + q l1 = P m2 + Q l2 = 2 pi i, continuing t * 2 pi i from t = 0."""
    u = np.array([0.0, np.log(COMPLETE_ABC[1]), 0.0], dtype=complex)
    # logarithms are continued along the path, not taken principal at each point
    ref = _log_terms(*_from_logs(u))
    t, dt = 0.0, 1.0 / steps
    while t < 1.0:
        nt = min(1.0, t + dt)
        guess = _newton(u, coeffs, nt, tol=tol, ref=ref)
        if guess is None:
            dt /= 2
            if dt < 1e-6:
                raise ContinuationError(f"Newton failed near t = {t:.6f}", last_parameter=t)
            continue
        u, t = guess, nt
        ref = _log_terms(*_from_logs(u), ref)
        dt = min(dt * 1.5, 1.0 / steps)
    return _package(u, coeffs, ref=ref)


def solve_structure(spec: SurgerySpec, steps: int = 32, tol: float = 1e-12) -> HyperbolicSolution:
    """Geometric solution for K_{p'}(p, q) = W((p, q), (1, -p'))."""
    cls = classify(spec)
    if not cls.hyperbolic:
        raise DegenerateError(f"not hyperbolic: {cls.reason}")
    spec = spec.normalized()
    sol = solve_filling(((spec.p, spec.q), (1, -spec.twist)), steps, tol)
    try:
        sol.cs = complex_volume(spec, sol)[1]
    except (ConsistencyError, DegenerateError):
        pass
    return sol


# volume ------------------------------------------------------------------------

def _volume_d2(primed) -> float:
    return float(np.sum(bloch_wigner(primed)))


def shape_angles(z):
    z = complex(z)
    return (math.atan2(z.imag, z.real), np.angle(1 / (1 - z)), np.angle(1 - 1 / z))


def tetra_volume_lobachevsky(z) -> float:
    if abs(complex(z).imag) < 1e-300:
        raise DegenerateError("flat tetrahedron")
    return float(sum(lobachevsky(t) for t in shape_angles(z)))


def volume(sol: HyperbolicSolution, check: bool = True) -> float:
    """Sum of D2 over the five shapes, checked against the Lobachevsky angle sums."""
    if sol.residual > 1e-9:
        raise ConsistencyError(f"solution residual {sol.residual:.2e} too large")
    if np.any(np.abs(sol.shapes.imag) < 1e-14):
        raise DegenerateError("degenerate shape")
    vol = _volume_d2(sol.shapes)
    if check and sol.geometric:
        alt = sum(tetra_volume_lobachevsky(z) for z in sol.shapes)
        if abs(alt - vol) > 1e-9 * max(1.0, abs(vol)):
            raise ConsistencyError(f"D2 sum {vol} and Lobachevsky sum {alt} disagree")
    return vol


# critical points and the complex volume ----------------------------------------

@dataclass(frozen=True)
class CriticalData:
    x0: complex
    y1: complex
    y2: complex
    z0: complex
    b2: complex


def critical_coordinates(sol: HyperbolicSolution) -> CriticalData:
    a, b, c = sol.abc
    b2 = sister_b(a, b, c)
    return CriticalData(np.log(a) / 2j, np.log(b) / 2j, np.log(b2) / 2j, np.log(-c) / 2j + PI / 2, b2)


def sister_b(a, b1, c):
    """The other root of 1/b^2 - (a + 1/a)/b + (1 + a + 1/a - c - 1/c) = 0."""
    inv = a + 1 / a - 1 / b1
    if abs(1 / b1 - inv) < 1e-12 * max(1.0, abs(inv)):
        raise DegenerateError("double root b1 = b2")
    return 1 / inv


def sister_solution(sol: HyperbolicSolution, spec: SurgerySpec) -> HyperbolicSolution:
    """(a, b2, c) solving the equations of W((p + 4q, -q), (1, p' - 1/2))."""
    spec = spec.normalized()
    a, b1, c = sol.abc
    b2 = sister_b(a, b1, c)
    coeffs = ((spec.p + 4 * spec.q, -spec.q), (1, spec.twist - 0.5))
    u = np.array([np.log(a), np.log(b2), np.log(-c)])
    out = _package(u, coeffs)
    # the sister equation for the second cusp reads m2' + (p' - 1/2) l2' = -2 pi i
    m1, l1, m2, l2 = out.holonomies
    r1 = coeffs[0][0] * m1 + coeffs[0][1] * l1 - TWO_PI_I
    r2 = m2 + (spec.twist - 0.5) * l2 + TWO_PI_I
    out.residual = float(max(abs(r1), abs(r2), abs(gluing(a, b2, c))))
    return out


def sister_quadratic_residuals(a, b1, b2, c) -> float:
    r1 = 1 / b1 + 1 / b2 - (a + 1 / a)
    r2 = 1 / (b1 * b2) - (1 + a + 1 / a - c - 1 / c)
    r3 = (1 - b1 / a) * (1 - b2 / a) - (1 - a * b1) * (1 - a * b2)
    return float(max(abs(r1), abs(r2), abs(r3)))


def w_critical(sol: HyperbolicSolution, spec: SurgerySpec):
    """(point, index) of the W critical point (x0, y1, z0) with (s+, m+, 0, 2 - p')."""
    spec = spec.normalized()
    fd = fourier_data(spec)
    cd = critical_coordinates(sol)
    sp, mp = fd.splus
    return point(cd.x0, cd.y1, cd.z0), index_data(fd, sp, mp, 0, 2 - spec.twist)


def critical_point(sol: HyperbolicSolution, spec: SurgerySpec, tol: float = 1e-9) -> list:
    """The four critical points of V from the conjugated and reflected W critical point."""
    spec = spec.normalized()
    fd = fourier_data(spec)
    cd = critical_coordinates(sol)
    (sp, mp), (sm, mm) = fd.splus, fd.sminus
    x0c, y2c, z0c = np.conj(cd.x0), np.conj(cd.y2), np.conj(cd.z0)
    pp = spec.twist
    variants = [
        (point(-x0c, -y2c, PI - z0c), index_data(fd, sm, mm, 0, -pp - 2)),
        (point(x0c, -y2c, PI - z0c), index_data(fd, sp, mp, 0, -pp - 2)),
        (point(-x0c, -y2c, z0c), index_data(fd, sm, mm, 0, -pp)),
        (point(x0c, -y2c, z0c), index_data(fd, sp, mp, 0, -pp)),
    ]
    for pt, idx in variants:
        g = np.max(np.abs(grad_V(pt, idx, spec)))
        if g > tol:
            raise ConsistencyError(f"gradient {g:.2e} at a claimed critical point")
    return variants


def mod_pi2(x: float) -> float:
    return float(x - PI ** 2 * math.floor(x / PI ** 2))


def dist_mod_pi2(a: float, b: float) -> float:
    d = mod_pi2(a - b)
    return min(d, PI ** 2 - d)


def complex_volume(spec: SurgerySpec, sol: HyperbolicSolution | None = None, tol: float = 1e-8):
    """(Vol, CS mod pi^2) from W at its critical point, cross-checked against V's four critical values."""
    spec = spec.normalized()
    if sol is None:
        sol = solve_structure(spec)
    pt, idx = w_critical(sol, spec)
    w = eval_W(pt, idx, spec)
    vol, cs = w.imag, mod_pi2(w.real)
    for vpt, vidx in critical_point(sol, spec):
        v = eval_V(vpt, vidx, spec)
        # V = i (Vol + i CS) = -CS + i Vol
        if abs(v.imag - vol) > tol or dist_mod_pi2(-v.real, cs) > tol:
            raise ConsistencyError(f"critical value {v} disagrees with W value {w}")
    return vol, cs


def t_constant(sol: HyperbolicSolution, spec: SurgerySpec, normalization: str = "saddle") -> complex:
    """Asymptotic constant of RT_r from the Hessian of V at (x0bar, -y2bar, z0bar).

    ``normalization="printed"`` is the bare closed form with 8/sqrt(pi^3) in front.
    ``"saddle"`` (default) is what a saddle-point evaluation of the four leading
    Fourier terms actually produces: the exponent is r V/(4 pi i), so the Gaussian
    integral sees Hess(V)/(4 pi i) and contributes (4 pi i)^{3/2}; and the factorial
    ratio carries 2^{e3 - e1 - e2} = 1 on the relevant region, not 2^{e1 + e2 + e3} = 4.
    Together these multiply the printed form by (4 pi i)^{3/2} / 4.
    """
    if normalization not in ("saddle", "printed"):
        raise ValueError(f"unknown normalization {normalization!r}")
    spec = spec.normalized()
    fd = fourier_data(spec)
    cd = critical_coordinates(sol)
    sp, mp = fd.splus
    x, y, z = np.conj(cd.x0), -np.conj(cd.y2), np.conj(cd.z0)
    idx = index_data(fd, sp, mp, 0, -spec.twist)
    H = hessian_V(point(x, y, z), idx, spec)
    J = float(fd.Jmap[sp])
    num = 8 * (-1) ** ((mp - spec.twist) % 2) * np.sin(x / spec.q - J * PI) * np.sin(2 * z)
    den = np.sqrt(spec.q * PI ** 3 * (1 - np.exp(2j * (y + z))) * (1 - np.exp(2j * (y - z)))
                  * np.linalg.det(-H))
    t = complex(num / den)
    if normalization == "saddle":
        t *= (4j * PI) ** 1.5 / 4
    return t


