"""Verification drivers: growth-rate fit of RT_r, seeded identity suite, appendix table.

Every report is a plain dict of JSON-serializable values so the CLI can emit it
directly.  Reports from ``run_identity_suite`` carry no timing data, so equal
seeds give byte-identical JSON.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .contfrac import SurgerySpec, expand_slope, fourier_maps, ijk2_violations, ijk_violations
from .errors import DegenerateError, DomainError, InsufficientData
from .hypgeom import classify, complex_volume, critical_point, solve_structure, t_constant
from .potential import (appendix_maxima, complete_structure_y, d2_sum, eval_V, eval_Vr,
                        eval_W, f_y, fourier_data, grad_V, hessian_V, index_data, partner,
                        point, region_flags, strip_dilog_max, y_pair)
from .quantum_rt import default_threads, rt_invariant
from .specfun import bloch_wigner, lobachevsky

PI = math.pi
V3 = 1.0149416064096536  # volume of the regular ideal tetrahedron

REPORT_SCHEMA = {
    "type": "object",
    "required": ["spec", "geometry", "rt_rows", "fit", "verdict"],
    "properties": {
        "spec": {
            "type": "object",
            "required": ["p", "q", "twist"],
            "properties": {k: {"type": "integer"} for k in ("p", "q", "twist")},
        },
        "geometry": {
            "type": "object",
            "required": ["volume", "cs_mod_pi2", "shapes", "residual"],
            "properties": {
                "volume": {"type": "number"},
                "cs_mod_pi2": {"type": "number"},
                "shapes": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                                      "minItems": 2, "maxItems": 2}},
                "residual": {"type": "number"},
            },
        },
        "rt_rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["r", "re", "im", "log_abs", "growth_rate", "seconds"],
                "properties": {
                    "r": {"type": "integer"},
                    "re": {"type": "number"},
                    "im": {"type": "number"},
                    "log_abs": {"type": "number"},
                    "growth_rate": {"type": "number"},
                    "seconds": {"type": "number", "minimum": 0},
                    "rel_error": {"type": "number", "minimum": 0},
                },
            },
        },
        "fit": {
            "type": ["object", "null"],
            "required": ["vol_estimate", "correction_c1", "rms_residual"],
            "properties": {k: {"type": "number"} for k in ("vol_estimate", "correction_c1", "rms_residual")},
        },
        "verdict": {
            "type": "object",
            "required": ["vol_gap", "pass"],
            "properties": {"vol_gap": {"type": ["number", "null"]}, "pass": {"type": "boolean"}},
        },
        "asymptotics": {"type": "object"},
    },
}

CSV_COLUMNS = ("r", "re", "im", "log_abs", "growth_rate", "seconds")


# conjecture fit ------------------------------------------------------------------

def fit_growth(rs, log_abs) -> dict:
    """Least squares (4 pi / r) log|RT_r| = vol + c1 / r."""
    rs = np.asarray(rs, dtype=float)
    if rs.size < 4:
        raise InsufficientData(f"need at least 4 values of r for the fit, got {rs.size}")
    g = 4 * PI * np.asarray(log_abs) / rs
    A = np.column_stack([np.ones_like(rs), 1 / rs])
    coef, *_ = np.linalg.lstsq(A, g, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - g) ** 2)))
    return {"vol_estimate": float(coef[0]), "correction_c1": float(coef[1]), "rms_residual": rms}


def normalized_magnitudes(rs, log_abs, vol) -> np.ndarray:
    """|RT_r| exp(-r Vol / 4 pi)."""
    rs = np.asarray(rs, dtype=float)
    return np.exp(np.asarray(log_abs) - rs * vol / (4 * PI))


def decay_envelopes(rs, normalized) -> tuple:
    """max of r |a_{r+2} - a_r| / a_r over the first and last third of the rows."""
    rs = np.asarray(rs, dtype=float)
    a = np.asarray(normalized)
    scaled = rs[1:] * np.abs(np.diff(a)) / a[:-1]
    third = max(1, scaled.size // 3)
    return float(scaled[:third].max()), float(scaled[-third:].max())


def limit_estimate(rs, normalized) -> float:
    """c0 from a fit c0 + c1 / r over the upper half of the rows."""
    rs = np.asarray(rs, dtype=float)
    half = rs.size // 2
    A = np.column_stack([np.ones(rs.size - half), 1 / rs[half:]])
    coef, *_ = np.linalg.lstsq(A, np.asarray(normalized)[half:], rcond=None)
    return float(coef[0])


def verify_conjecture(spec: SurgerySpec, r_min: int = 51, r_max: int = 301, step: int = 2,
                      threads: int | None = None, deterministic: bool = True,
                      rel_tol: float = 0.01) -> dict:
    """Compute RT_r for odd r in [r_min, r_max] and compare the growth rate with the volume."""
    spec = spec.normalized()
    if r_min % 2 == 0 or r_max % 2 == 0 or step % 2:
        raise DomainError("r_min, r_max must be odd and step even")
    cls = classify(spec)
    if not cls.hyperbolic:
        raise DegenerateError(f"{spec} is not hyperbolic: {cls.reason}")
    sol = solve_structure(spec)
    vol, cs = complex_volume(spec, sol)
    rs = list(range(r_min, r_max + 1, step))
    if len(rs) < 4:
        raise InsufficientData(f"need at least 4 values of r for the fit, got {len(rs)}")
    threads = threads or default_threads()

    def one(r):
        return rt_invariant(spec, r, threads=1, deterministic=deterministic)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            vals = list(pool.map(one, rs))
    else:
        vals = [one(r) for r in rs]
    rows = [{"r": v.r, "re": v.value.real, "im": v.value.imag, "log_abs": v.log_abs,
             "growth_rate": 4 * PI * v.log_abs / v.r, "seconds": v.seconds, "rel_error": v.rel_error}
            for v in vals]
    log_abs = [row["log_abs"] for row in rows]
    fit = fit_growth(rs, log_abs)
    gap = abs(fit["vol_estimate"] - vol) / vol
    norm = normalized_magnitudes(rs, log_abs, vol)
    early, late = decay_envelopes(rs, norm)
    t_saddle = abs(t_constant(sol, spec))
    t_printed = abs(t_constant(sol, spec, normalization="printed"))
    lim = limit_estimate(rs, norm)
    return {
        "spec": {"p": spec.p, "q": spec.q, "twist": spec.twist},
        "geometry": {"volume": vol, "cs_mod_pi2": cs,
                     "shapes": [[c.real, c.imag] for c in sol.shapes],
                     "residual": sol.residual},
        "rt_rows": rows,
        "fit": fit,
        "verdict": {"vol_gap": gap, "pass": bool(gap < rel_tol)},
        "asymptotics": {
            "normalized": [float(v) for v in norm],
            "decay_envelope_early": early,
            "decay_envelope_late": late,
            "limit_estimate": lim,
            "t_abs": t_saddle,
            "t_abs_printed": t_printed,
            "limit_over_t": lim / t_saddle,
        },
    }


def report_csv_lines(report: dict) -> list:
    lines = [",".join(CSV_COLUMNS)]
    for row in report["rt_rows"]:
        lines.append(",".join(repr(row[c]) for c in CSV_COLUMNS))
    return lines


# identity suite -------------------------------------------------------------------

IDENTITY_TOL = 1e-10
GRADIENT_TOL = 1e-6
HESSIAN_TOL = 1e-5


def _random_spec(rng) -> SurgerySpec:
    while True:
        q = int(rng.integers(1, 6))
        p = int(rng.integers(-40, 41))
        pp = int(rng.integers(-12, 13))
        if math.gcd(p, q) != 1:
            continue
        spec = SurgerySpec(p, q, pp)
        if classify(spec).hyperbolic:
            return spec


def _random_real(rng, region: str, eps: float = 0.02):
    while True:
        x, y, z = rng.uniform(-PI / 2, PI / 2), rng.uniform(0, PI), rng.uniform(0, PI)
        if region in region_flags(x, y, z, eps):
            return x, y, z


def _random_point(rng, region: str = "D", spread: float = 0.3):
    x, y, z = _random_real(rng, region)
    im = rng.uniform(-spread, spread, size=3)
    return point(x + 1j * im[0], y + 1j * im[1], z + 1j * im[2])


def _potential_identities(spec, rng) -> dict:
    fd = fourier_data(spec)
    pp = spec.twist
    pt = _random_point(rng)
    x, y, z = pt.x, pt.y, pt.z
    s = int(rng.integers(fd.q))
    m, n = int(rng.integers(-3, 4)), int(rng.integers(-3, 4))
    l = int(rng.integers(-15, 16))
    s2, m2 = partner(fd, s, m)
    idx = index_data(fd, s, m, n, l)
    dK = float(fd.Kmap[s] - fd.Kmap[s2]) * PI ** 2
    V, W = eval_V(pt, idx, spec), eval_W(pt, idx, spec)
    conj = np.conj
    mirror = point(-conj(x), -conj(y), -conj(z))
    out = {
        "V conjugation": abs(conj(V) - eval_V(mirror, index_data(fd, s2, m2, -n, -l - 1), spec) - dK),
        "V x-reflection": abs(V - eval_V(point(-x, y, z), index_data(fd, s2, m2, n, l), spec) - dK),
        "V z-reflection": abs(V - eval_V(point(x, y, PI - z), index_data(fd, s, m, n, -2 * pp - 2 - l), spec)
                              + 4 * (pp + l + 1) * PI ** 2),
        "V z-translation": abs(V - eval_V(point(x, y, PI + z), index_data(fd, s, m, n, l - 2 * pp - 1), spec)
                               - 4 * (l - pp) * PI ** 2),
        "W conjugation": abs(conj(W) - eval_W(mirror, index_data(fd, s2, m2, -n, -l), spec) + dK),
        "W x-reflection": abs(W - eval_W(point(-x, y, z), index_data(fd, s2, m2, n, l), spec) + dK),
        "W z-reflection": abs(W - eval_W(point(x, y, PI - z), index_data(fd, s, m, n, -2 * pp + 2 - l), spec)
                              + 4 * (-pp - l + 1) * PI ** 2),
    }
    # cancelling index: the z-reflection maps l = -p'-1 to itself with no shift
    lc = -pp - 1
    ic = index_data(fd, s, m, n, lc)
    out["cancelling index antisymmetry"] = abs(eval_V(pt, ic, spec) - eval_V(point(x, y, PI - z), ic, spec))
    # V + W pairing on the two roots of V'_y = 0, near the complete structure
    xs = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1))
    zs = complex(PI / 2 + rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1))
    y1, y2 = y_pair(xs, zs)
    out["V+W pairing"] = abs(eval_V(point(xs, y1, zs), index_data(fd, s, m, 0, l), spec)
                             + eval_W(point(xs, y2, zs), index_data(fd, s, m, 0, l + 2), spec))
    return out


def _derivative_checks(spec, rng) -> dict:
    fd = fourier_data(spec)
    pt = _random_point(rng, "D_eps", 0.2)
    idx = index_data(fd, int(rng.integers(fd.q)), int(rng.integers(-2, 3)), int(rng.integers(-2, 3)),
                     int(rng.integers(-12, 13)))
    w = pt.vector()
    g = grad_V(pt, idx, spec)
    H = hessian_V(pt, idx, spec)
    h1, h2 = 1e-6, 1e-5
    fd_g = np.empty(3, dtype=complex)
    fd_H = np.empty((3, 3), dtype=complex)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        fd_g[i] = (eval_V(point(*(w + h1 * e)), idx, spec) - eval_V(point(*(w - h1 * e)), idx, spec)) / (2 * h1)
        fd_H[:, i] = (grad_V(point(*(w + h2 * e)), idx, spec) - grad_V(point(*(w - h2 * e)), idx, spec)) / (2 * h2)
    return {
        "gradient vs finite difference": float(np.max(np.abs(g - fd_g)) / max(1.0, np.max(np.abs(g)))),
        "Hessian vs finite difference": float(np.max(np.abs(H - fd_H)) / max(1.0, np.max(np.abs(H)))),
        "Hessian symmetry": float(np.max(np.abs(H - H.T))),
    }


def _concavity(spec, rng) -> float:
    """Largest eigenvalue of Im Hess V over a point with real part in D_H; must be negative."""
    fd = fourier_data(spec)
    x, y, z = _random_real(rng, "DH")
    pt = point(x, y + 1j * rng.uniform(-0.1, 0.1), z)
    H = hessian_V(pt, index_data(fd, 0, 0, 0, 0), spec)
    return float(np.linalg.eigvalsh(H.imag).max())


def _quantum_reflection(spec, rng, r: int = 101) -> float:
    fd = fourier_data(spec)
    x, y, z = _random_real(rng, "D_eps")
    im = rng.uniform(-0.05, 0.05, size=3)
    pt = point(x + 1j * im[0], y + 1j * im[1], z + 1j * im[2])
    s, m = int(rng.integers(fd.q)), int(rng.integers(-2, 3))
    n, l = int(rng.integers(-2, 3)), int(rng.integers(-12, 13))
    s2, m2 = partner(fd, s, m)
    a = eval_Vr(r, pt, index_data(fd, s, m, n, l), spec)
    b = eval_Vr(r, point(-pt.x, pt.y, pt.z), index_data(fd, s2, m2, n, l), spec)
    return abs(a - b + 8 * PI / r * pt.x - float(fd.Kmap[s] - fd.Kmap[s2]) * PI ** 2)


def _fixed_identities() -> dict:
    out = {}
    d2i = bloch_wigner(1j)
    for sign in (1, -1):
        val = f_y(complete_structure_y(sign))
        out[f"f(y0) sign {sign:+d}"] = abs(val - (-PI ** 2 / 4 + sign * 4j * d2i))
    out["regular tetrahedron"] = max(abs(3 * lobachevsky(PI / 3) - V3),
                                     abs(bloch_wigner(complex(0.5, math.sqrt(3) / 2)) - V3))
    # Im V at critical points equals the signed D2 sum of its five exponentials
    worst = 0.0
    for spec in (SurgerySpec(19, 1, 10), SurgerySpec(7, 3, 4), SurgerySpec(-11, 2, -6)):
        sol = solve_structure(spec)
        for pt, idx in critical_point(sol, spec):
            worst = max(worst, abs(eval_V(pt, idx, spec).imag - d2_sum(pt)))
    out["critical value imaginary part"] = worst
    return out


def _congruences(rng, samples: int) -> int:
    bad = 0
    done = 0
    while done < samples:
        p, q = int(rng.integers(-200, 201)), int(rng.integers(1, 201))
        if math.gcd(p, q) != 1:
            continue
        exp = expand_slope(p, q)
        fd = fourier_maps(exp)
        bad += len(ijk_violations(exp, fd)) + len(ijk2_violations(fd))
        done += 1
    return bad


def run_identity_suite(seed: int = 42, samples: int = 200) -> dict:
    """Seeded random execution of the exact identities; max residual per identity."""
    rng = np.random.default_rng(seed)
    worst: dict = {}
    thresholds: dict = {}

    def record(name, value, tol):
        worst[name] = max(worst.get(name, 0.0), float(value))
        thresholds[name] = tol

    for _ in range(samples):
        spec = _random_spec(rng)
        for name, val in _potential_identities(spec, rng).items():
            record(name, val, IDENTITY_TOL)
        d = _derivative_checks(spec, rng)
        record("gradient vs finite difference", d["gradient vs finite difference"], GRADIENT_TOL)
        record("Hessian vs finite difference", d["Hessian vs finite difference"], HESSIAN_TOL)
        record("Hessian symmetry", d["Hessian symmetry"], 1e-14)
    # concavity is a sign condition: record the largest eigenvalue, threshold 0
    conc = [_concavity(_random_spec(rng), rng) for _ in range(samples)]
    quantum = [_quantum_reflection(_random_spec(rng), rng) for _ in range(max(1, samples // 10))]
    for name, val in _fixed_identities().items():
        record(name, val, IDENTITY_TOL)
    record("quantum x-reflection", max(quantum), 1e-8)
    entries = [{"identity": k, "max_residual": worst[k], "threshold": thresholds[k],
                "pass": worst[k] < thresholds[k]} for k in worst]
    entries.append({"identity": "Im Hessian negative definite on DH", "max_residual": max(conc),
                    "threshold": 0.0, "pass": max(conc) < 0.0})
    bad = _congruences(rng, samples)
    entries.append({"identity": "congruence lemmas (exact)", "max_residual": float(bad),
                    "threshold": 0.0, "pass": bad == 0})
    return {"seed": seed, "samples": samples, "entries": entries,
            "pass": all(e["pass"] for e in entries)}


# appendix table -------------------------------------------------------------------

def reproduce_appendix() -> dict:
    rows = []
    for fm in appendix_maxima():
        rows.append({"name": fm.name, "computed": fm.value, "printed": fm.printed,
                     "abs_diff": abs(fm.value - fm.printed), "argmax": fm.argmax, "tol": 1e-3})
    t0, smax = strip_dilog_max()
    rows.append({"name": "strip maximum", "computed": smax, "printed": 0.448473,
                 "abs_diff": abs(smax - 0.448473), "argmax": t0, "tol": 1e-5})
    d2i = bloch_wigner(1j)
    for sign in (1, -1):
        val = f_y(complete_structure_y(sign))
        target = complex(-PI ** 2 / 4, sign * 4 * d2i)
        rows.append({"name": f"f(y0) sign {sign:+d}", "computed": [val.real, val.imag],
                     "printed": [target.real, target.imag], "abs_diff": abs(val - target),
                     "argmax": None, "tol": 1e-10})
    return {"rows": rows, "pass": all(r["abs_diff"] < r["tol"] for r in rows)}
