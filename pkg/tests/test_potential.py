import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qvol.contfrac import SurgerySpec
from qvol.errors import BranchError, DomainError
from qvol.hypgeom import critical_coordinates, critical_point, sister_solution, solve_structure, w_critical
from qvol.potential import (LOG5_4, appendix_maxima, complete_structure_y, d2_sum, eval_V, eval_Vr, eval_W,
                            f_y, fourier_data, grad_V, grad_W, hessian_V, hessian_W, im_V_second_derivative_in_imy,
                            im_V_surface, index_data, partner, point, region_flags, strip_dilog_max,
                            vr_first_order, y_pair)
from qvol.specfun import bloch_wigner

PI = math.pi
SPECS = [SurgerySpec(19, 1, 10), SurgerySpec(7, 3, 4), SurgerySpec(-11, 2, -6), SurgerySpec(23, 3, 5),
         SurgerySpec(-18, 1, 12)]


def test_region_flags():
    assert region_flags(0.0, PI / 4, PI / 2) >= {"D", "D0", "D_eps", "DH"}
    assert region_flags(0.0, 1.0, 3.0) == frozenset()
    # boundary of D counts as inside
    assert "D" in region_flags(0.3, 0.3, 1.0)
    assert point(0, PI / 4, PI / 2).region == "D_eps"
    assert point(2.0, 0.1, 0.1).region == "outside"


def test_branch_error_on_cut():
    spec = SurgerySpec(19, 1, 10)
    idx = index_data(fourier_data(spec), 0, 0)
    # y + x = -0.1i puts exp(2i(y + x)) = e^{0.2} on the cut
    with pytest.raises(BranchError):
        eval_V(point(-0.05j, -0.05j, 1.0), idx, spec)


def test_branch_error_from_h_pole():
    spec = SurgerySpec(19, 1, 10)
    idx = index_data(fourier_data(spec), 0, 0)
    with pytest.raises(BranchError):
        hessian_V(point(0.2, 0.2, 1.0), idx, spec)


def test_eval_vr_strip_error():
    spec = SurgerySpec(19, 1, 10)
    idx = index_data(fourier_data(spec), 0, 0)
    with pytest.raises(DomainError):
        eval_Vr(101, point(0.0, 2.0, 2.5), idx, spec)


# symmetry identities ---------------------------------------------------------------

interior = st.tuples(st.floats(-0.7, 0.7), st.floats(0.0, PI), st.floats(0.0, PI),
                     st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
indices = st.tuples(st.sampled_from(SPECS), st.integers(0, 10), st.integers(-3, 3), st.integers(-3, 3),
                    st.integers(-15, 15))


def _interior_point(data):
    x, y, z, a, b, c = data
    # interior of the analytic region, so imaginary offsets keep every term off the cut
    if "D_eps" not in region_flags(x, y, z):
        return None
    return point(x + 1j * a, y + 1j * b, z + 1j * c)


@settings(max_examples=200)
@given(interior, indices)
def test_potential_symmetries(raw, ind):
    pt = _interior_point(raw)
    if pt is None:
        return
    spec, s, m, n, l = ind
    fd = fourier_data(spec)
    s %= fd.q
    pp = spec.twist
    s2, m2 = partner(fd, s, m)
    assert fd.kvalue(s, m) + fd.kvalue(s2, m2) == 0
    dK = float(fd.Kmap[s] - fd.Kmap[s2]) * PI ** 2
    x, y, z = pt.x, pt.y, pt.z
    idx = index_data(fd, s, m, n, l)
    V, W = eval_V(pt, idx, spec), eval_W(pt, idx, spec)
    mirror = point(-np.conj(x), -np.conj(y), -np.conj(z))
    tol = 1e-10
    assert abs(np.conj(V) - eval_V(mirror, index_data(fd, s2, m2, -n, -l - 1), spec) - dK) < tol
    assert abs(V - eval_V(point(-x, y, z), index_data(fd, s2, m2, n, l), spec) - dK) < tol
    assert abs(V - eval_V(point(x, y, PI - z), index_data(fd, s, m, n, -2 * pp - 2 - l), spec)
               + 4 * (pp + l + 1) * PI ** 2) < tol
    assert abs(V - eval_V(point(x, y, PI + z), index_data(fd, s, m, n, l - 2 * pp - 1), spec)
               - 4 * (l - pp) * PI ** 2) < tol
    assert abs(np.conj(W) - eval_W(mirror, index_data(fd, s2, m2, -n, -l), spec) + dK) < tol
    assert abs(W - eval_W(point(-x, y, z), index_data(fd, s2, m2, n, l), spec) + dK) < tol
    assert abs(W - eval_W(point(x, y, PI - z), index_data(fd, s, m, n, -2 * pp + 2 - l), spec)
               + 4 * (-pp - l + 1) * PI ** 2) < tol


@settings(max_examples=100)
@given(st.floats(-0.3, 0.3), st.floats(-0.1, 0.1), st.floats(-0.3, 0.3), st.floats(-0.1, 0.1),
       st.sampled_from(SPECS), st.integers(-12, 12))
def test_v_plus_w_vanishes_on_y_roots(xr, xi, zr, zi, spec, l):
    fd = fourier_data(spec)
    x, z = complex(xr, xi), complex(PI / 2 + zr, zi)
    y1, y2 = y_pair(x, z)
    idx = index_data(fd, 0, 0, 0, l)
    assert abs(grad_V(point(x, y1, z), idx, spec)[1]) < 1e-10
    assert abs(grad_V(point(x, y2, z), idx, spec)[1]) < 1e-10
    total = eval_V(point(x, y1, z), idx, spec) + eval_W(point(x, y2, z), index_data(fd, 0, 0, 0, l + 2), spec)
    assert abs(total) < 1e-10


def test_y_pair_continues_complete_structure():
    y1, y2 = y_pair(0.0, PI / 2)
    assert abs(y1 - complete_structure_y(1)) < 1e-14
    assert abs(y2 - complete_structure_y(-1)) < 1e-14


@settings(max_examples=100)
@given(interior, indices)
def test_cancelling_index_antisymmetry(raw, ind):
    pt = _interior_point(raw)
    if pt is None:
        return
    spec, s, m, n, _ = ind
    fd = fourier_data(spec)
    idx = index_data(fd, s % fd.q, m, n, -spec.twist - 1)
    assert abs(eval_V(pt, idx, spec) - eval_V(point(pt.x, pt.y, PI - pt.z), idx, spec)) < 1e-10


# derivatives -----------------------------------------------------------------------

def _sample_points(rng, count, region="D_eps", spread=0.2):
    out = []
    while len(out) < count:
        x, y, z = rng.uniform(-PI / 4, PI / 4), rng.uniform(0, PI), rng.uniform(0, PI)
        if region in region_flags(x, y, z):
            im = rng.uniform(-spread, spread, 3)
            out.append(point(x + 1j * im[0], y + 1j * im[1], z + 1j * im[2]))
    return out


@pytest.mark.parametrize("which", ["V", "W"])
def test_gradient_finite_differences(which):
    rng = np.random.default_rng(7)
    f, g = (eval_V, grad_V) if which == "V" else (eval_W, grad_W)
    h = 1e-6
    for k, pt in enumerate(_sample_points(rng, 100)):
        spec = SPECS[k % len(SPECS)]
        fd = fourier_data(spec)
        idx = index_data(fd, k % fd.q, k % 3 - 1, k % 5 - 2, k % 7 - 3)
        w = pt.vector()
        num = np.array([(f(point(*(w + h * e)), idx, spec) - f(point(*(w - h * e)), idx, spec)) / (2 * h)
                        for e in np.eye(3)])
        ana = g(pt, idx, spec)
        assert np.max(np.abs(num - ana)) / max(1.0, np.max(np.abs(ana))) < 1e-6


@pytest.mark.parametrize("which", ["V", "W"])
def test_hessian_finite_differences_and_symmetry(which):
    rng = np.random.default_rng(11)
    g, H = (grad_V, hessian_V) if which == "V" else (grad_W, hessian_W)
    h = 1e-5
    for k, pt in enumerate(_sample_points(rng, 20)):
        spec = SPECS[k % len(SPECS)]
        idx = index_data(fourier_data(spec), 0, 0, 0, 0)
        w = pt.vector()
        num = np.column_stack([(g(point(*(w + h * e)), idx, spec) - g(point(*(w - h * e)), idx, spec)) / (2 * h)
                               for e in np.eye(3)])
        ana = H(pt, idx, spec)
        assert np.max(np.abs(ana - ana.T)) < 1e-14
        assert np.max(np.abs(num - ana)) / max(1.0, np.max(np.abs(ana))) < 1e-5


def test_im_hessian_negative_definite_on_DH():
    rng = np.random.default_rng(3)
    count = 0
    while count < 200:
        x, y, z = rng.uniform(-PI / 2, PI / 2), rng.uniform(0, PI), rng.uniform(0, PI)
        if "DH" not in region_flags(x, y, z):
            continue
        spec = SPECS[count % len(SPECS)]
        H = hessian_V(point(x, y, z), index_data(fourier_data(spec), 0, 0), spec)
        assert np.linalg.eigvalsh(H.imag).max() < 0
        count += 1


@pytest.mark.parametrize("spec", SPECS[:3])
def test_critical_data_gradients(spec):
    sol = solve_structure(spec)
    pt, idx = w_critical(sol, spec)
    assert np.max(np.abs(grad_W(pt, idx, spec))) < 1e-9
    for vpt, vidx in critical_point(sol, spec):
        assert np.max(np.abs(grad_V(vpt, vidx, spec))) < 1e-9


@pytest.mark.parametrize("spec", SPECS[:3])
def test_x_derivative_matches_sister_dehn_form(spec):
    # at (x0, y2, z0) with (s+, m+, 0, -p'-2) the x and z derivatives are the
    # Dehn expressions of the sister filling
    sol = solve_structure(spec)
    sis = sister_solution(sol, spec)
    cd = critical_coordinates(sol)
    fd = fourier_data(spec)
    sp, mp = fd.splus
    g = grad_V(point(cd.x0, cd.y2, cd.z0), index_data(fd, sp, mp, 0, -spec.twist - 2), spec)
    m1, l1, m2, l2 = sis.holonomies
    p, q = spec.p, spec.q
    assert abs(g[0] - 1j / q * ((p + 4 * q) * m1 - q * l1 - 2j * PI)) < 1e-10
    assert abs(g[2] - 2j * (m2 + (spec.twist - 0.5) * l2 - 2j * PI)) < 1e-10


# critical values --------------------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS)
def test_critical_values_are_complex_volume(spec):
    sol = solve_structure(spec)
    pt, idx = w_critical(sol, spec)
    W = eval_W(pt, idx, spec)
    assert abs(W.imag - sol.volume) < 1e-9
    values = [eval_V(p, i, spec) for p, i in critical_point(sol, spec)]
    for v in values:
        assert abs(v.imag - sol.volume) < 1e-8
        d = (v.real + W.real) / PI ** 2
        assert abs(d - round(d)) * PI ** 2 < 1e-8
    for (p, i) in critical_point(sol, spec):
        assert abs(eval_V(p, i, spec).imag - d2_sum(p)) < 1e-9


@settings(max_examples=100)
@given(interior, indices)
def test_imaginary_part_splits_into_d2_and_gradient(raw, ind):
    pt = _interior_point(raw)
    if pt is None:
        return
    spec, s, m, n, l = ind
    fd = fourier_data(spec)
    idx = index_data(fd, s % fd.q, m, n, l)
    w = pt.vector()
    for f, g in ((eval_V, grad_V), (eval_W, grad_W)):
        lhs = f(pt, idx, spec).imag
        rhs = d2_sum(pt) + float(np.dot(g(pt, idx, spec).real, w.imag))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


# quantum potential ------------------------------------------------------------------

FIXED = [point(0.05 + 0.02j, 0.6 + 0.1j, 1.7 - 0.05j), point(-0.2, 0.7, 1.5), point(0.1 - 0.03j, 0.9 + 0.05j, 1.3)]


@pytest.mark.parametrize("pt", FIXED)
def test_vr_second_order_remainder_bounded(pt):
    spec = SurgerySpec(19, 1, 10)
    idx = index_data(fourier_data(spec), 0, 0)
    V = eval_V(pt, idx, spec)
    scaled = [r * r * abs(eval_Vr(r, pt, idx, spec) - V - vr_first_order(r, pt)) for r in range(101, 502, 50)]
    assert max(scaled) < 100
    # the scaled remainder settles rather than grows
    assert abs(scaled[-1] - scaled[-2]) < 0.01 * scaled[-1]


@pytest.mark.parametrize("pt", FIXED)
def test_vr_imaginary_part_converges(pt):
    spec = SurgerySpec(19, 1, 10)
    idx = index_data(fourier_data(spec), 0, 0)
    r = 1001
    Vr, V = eval_Vr(r, pt, idx, spec), eval_V(pt, idx, spec)
    assert abs((Vr - vr_first_order(r, pt)).imag - V.imag) < 1e-4
    # without the 1/r correction the gap is of size 2 pi log(r) / r
    raw = abs(Vr.imag - V.imag)
    assert raw < 4 * PI * math.log(r) / r


def test_vr_reflection_identity():
    rng = np.random.default_rng(5)
    r = 101
    for k, pt in enumerate(_sample_points(rng, 30, spread=0.05)):
        spec = SPECS[k % len(SPECS)]
        fd = fourier_data(spec)
        s, m = k % fd.q, k % 5 - 2
        s2, m2 = partner(fd, s, m)
        n, l = k % 3 - 1, k % 11 - 5
        a = eval_Vr(r, pt, index_data(fd, s, m, n, l), spec)
        b = eval_Vr(r, point(-pt.x, pt.y, pt.z), index_data(fd, s2, m2, n, l), spec)
        assert abs(a - b + 8 * PI / r * pt.x - float(fd.Kmap[s] - fd.Kmap[s2]) * PI ** 2) < 1e-8


# surfaces and appendix values --------------------------------------------------------

def test_im_v_surface_examples():
    spec = SurgerySpec(19, 1, 10)
    idx = index_data(fourier_data(spec), 0, 0)
    assert abs(im_V_surface((PI / 6, PI / 6, PI / 2), 0.0, idx, spec) - 3.0448) < 1e-3
    # the surface includes -4y^2, whose imaginary part is -8 y Im y
    y0 = 0.4278594
    val = im_V_surface((0.0, y0, PI / 2 - y0), LOG5_4, idx, spec)
    assert abs(val - 3.4595) < 1e-3
    val = im_V_surface((0.0, PI / 4, PI / 4 + 1e-7), LOG5_4, idx, spec)
    assert abs(val - 2.5778) < 1e-3


def test_appendix_maxima():
    for fm in appendix_maxima():
        assert abs(fm.value - fm.printed) < 1e-3, fm.name
    by_name = {fm.name: fm for fm in appendix_maxima()}
    assert abs(by_name["F1 shifted"].argmax - 0.372498) < 1e-4
    assert abs(by_name["F3 shifted"].argmax - 0.4278594) < 1e-4
    assert abs(by_name["F2"].argmax - 0.978) < 1e-3


def test_strip_maximum():
    t0, val = strip_dilog_max()
    assert abs(val - 0.448473) < 1e-5
    assert abs(t0 - 0.5 * math.acos(1 / (2 * math.sqrt(5)))) < 1e-6


@pytest.mark.parametrize("sign", [1, -1])
def test_f_at_complete_structure(sign):
    val = f_y(complete_structure_y(sign))
    assert abs(val - (-PI ** 2 / 4 + sign * 4j * bloch_wigner(1j))) < 1e-10


def test_im_v_convex_in_imaginary_y():
    xs = np.linspace(-PI / 4, PI / 4, 22)[1:-1]
    ys = np.linspace(0, PI, 22)[1:-1]
    # offset by half a step so no grid point sits on a boundary plane z = y
    zs = np.linspace(0, PI, 22)[1:-1] + PI / 42
    checked = 0
    for x in xs:
        for y in ys:
            for z in zs:
                if "D0" not in region_flags(x, y, z):
                    continue
                for t in (-LOG5_4, 0.0, LOG5_4):
                    assert im_V_second_derivative_in_imy(point(x, y + 1j * t, z)) > 0
                    checked += 1
    assert checked > 100
