import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvol.errors import DomainError
from qvol.specfun import (bloch_wigner, build_quantum_tables, dilog, f_asymptote, lobachevsky,
                          quantum_dilog, strip_margin)

PI = math.pi
V3 = 1.0149416064096536
CATALAN = 0.915965594177219015054603514932


def _disk(radius):
    return st.builds(lambda r, t: r * cmath.exp(1j * t),
                     st.floats(0.01, radius), st.floats(-PI, PI))


def _off_axis():
    return st.builds(complex, st.floats(-8, 8), st.floats(0.05, 8) | st.floats(-8, -0.05))


# dilog ---------------------------------------------------------------------------

def test_dilog_anchor_values():
    assert dilog(0) == 0
    assert abs(dilog(1) - PI ** 2 / 6) < 1e-14
    assert abs(dilog(1j) - complex(-PI ** 2 / 48, CATALAN)) < 1e-14


@pytest.mark.parametrize("z", [0.3 + 0.2j, -0.9 + 0.1j, 0.99 - 0.3j, 1.7 + 0.4j, -4 - 2j, 9.5 + 0.01j,
                               0.5 + 0.5j, -1.0, 0.8, 1 - 1e-6j, 3 + 7j])
def test_dilog_against_mpmath(z):
    ref = complex(mpmath.polylog(2, z))
    assert abs(dilog(z) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_dilog_arrays_keep_shape():
    z = np.array([[0.1, 0.2j], [2 + 1j, -3.0]])
    out = dilog(z)
    assert out.shape == (2, 2)
    assert abs(out[1, 0] - complex(mpmath.polylog(2, 2 + 1j))) < 1e-13


def test_dilog_rejects_nonfinite():
    with pytest.raises(ValueError):
        dilog(complex("nan"))


@given(_disk(0.45), _disk(0.45))
def test_five_term_relation(x, y):
    lhs = (dilog(x) + dilog(y) - dilog(x / (1 - y)) - dilog(y / (1 - x))
           + dilog(x * y / ((1 - x) * (1 - y))))
    assert abs(lhs + cmath.log(1 - x) * cmath.log(1 - y)) < 1e-12


@given(_off_axis())
def test_inversion(z):
    res = dilog(1 / z) + dilog(z) + PI ** 2 / 6 + 0.5 * cmath.log(-z) ** 2
    assert abs(res) < 1e-12 * max(1.0, abs(cmath.log(-z)) ** 2)


@given(st.floats(1e-3, PI - 1e-3))
def test_unit_circle_formula(theta):
    val = dilog(cmath.exp(2j * theta))
    assert abs(val - (PI ** 2 / 6 + theta * (theta - PI) + 2j * lobachevsky(theta))) < 1e-12


def test_extended_backend_agrees():
    for z in (0.3 + 0.4j, 2.5 - 1j, -7 + 0.2j):
        assert abs(dilog(z, precision="extended") - dilog(z)) < 1e-13


# Lobachevsky and Bloch-Wigner --------------------------------------------------------

def test_lobachevsky_values():
    assert lobachevsky(0.0) == 0.0
    assert abs(3 * lobachevsky(PI / 3) - V3) < 1e-12
    grid = np.linspace(0.01, PI - 0.01, 2001)
    assert abs(grid[np.argmax(lobachevsky(grid))] - PI / 6) < 2e-3


def test_lobachevsky_integral_oracle():
    for th in (0.2, 0.7, 1.3, 2.9):
        ref = -mpmath.quad(lambda t: mpmath.log(abs(2 * mpmath.sin(t))), [0, th])
        assert abs(lobachevsky(th) - float(ref)) < 1e-12


@given(st.floats(-20, 20))
def test_lobachevsky_odd_periodic(th):
    assert abs(lobachevsky(th + PI) - lobachevsky(th)) < 1e-12
    assert abs(lobachevsky(-th) + lobachevsky(th)) < 1e-12


def test_lobachevsky_log_modulus_of_continuity():
    xs = np.linspace(0.05, PI - 0.05, 40)
    ratios = []
    for a in np.geomspace(1e-8, 0.4, 30):
        d = np.max(np.abs(lobachevsky(xs + a) - lobachevsky(xs)))
        ratios.append(d / abs(a * math.log(a)))
    assert max(ratios) < 5.0


def test_bloch_wigner_values():
    assert bloch_wigner(0.37) == 0.0
    assert abs(bloch_wigner(complex(0.5, math.sqrt(3) / 2)) - V3) < 1e-13
    series = sum(math.sin(n * PI / 2) / n ** 2 for n in range(1, 200001))
    assert abs(bloch_wigner(1j) - series) < 1e-9
    assert abs(bloch_wigner(1j) - CATALAN) < 1e-14


@given(_off_axis())
def test_bloch_wigner_symmetries(z):
    d = bloch_wigner(z)
    assert abs(bloch_wigner(1 - 1 / z) - d) < 1e-12
    assert abs(bloch_wigner(1 / z) + d) < 1e-12
    assert abs(bloch_wigner(z.conjugate()) + d) < 1e-12
    assert (d > 0) == (z.imag > 0)


# asymptote ------------------------------------------------------------------------

def test_f_asymptote_branches():
    assert f_asymptote(1.0, 0.5) == 0.0
    assert f_asymptote(PI / 2, -1.0) == 0.0
    assert abs(f_asymptote(0.3, -2.0) - 2 * (0.6 - PI) * -2.0) < 1e-15


def test_f_asymptote_bounds_imaginary_part():
    t = np.linspace(0.01, PI - 0.01, 100)
    X = np.linspace(-3, 3, 100)
    T, XX = np.meshgrid(t, X)
    gap = np.abs(np.imag(dilog(np.exp(2j * (T + 1j * XX)))) - f_asymptote(T, XX))
    assert gap.max() <= V3 + 1e-12


# quantum dilogarithm -------------------------------------------------------------------

@pytest.mark.parametrize("r", [11, 51, 101])
def test_phi_at_pi_over_r(r):
    ref = (PI ** 2 / 6 + 2j * PI * math.log(r) / r - (PI ** 2 + 2j * PI * math.log(2)) / r
           + 2 * PI ** 2 / (3 * r * r))
    assert abs(quantum_dilog(r, PI / r) - ref) < 1e-8


@pytest.mark.parametrize("r", [7, 31, 101])
@pytest.mark.parametrize("z", [0.3, 1.1 + 0.4j, 2.0 - 0.3j, 0.05 + 1j])
def test_phi_reflection(r, z):
    lhs = quantum_dilog(r, z) + quantum_dilog(r, PI - z)
    assert abs(lhs - (2 * z * (z - PI) + PI ** 2 / 3 - 2 * PI ** 2 / (3 * r * r))) < 1e-8


@pytest.mark.parametrize("z", [0.7, 1.2 + 0.3j, 2.4 - 0.2j])
def test_phi_converges_to_dilog_with_predicted_coefficient(z):
    r = 501
    e = cmath.exp(2j * z)
    got = r * r * (quantum_dilog(r, z) - dilog(e))
    want = 2 * PI ** 2 * e / (3 * (1 - e))
    assert abs(got - want) < 0.05 * abs(want)


def test_phi_extended_matches_double():
    for z in (0.4, 1.5 + 0.2j):
        assert abs(quantum_dilog(21, z, precision="extended") - quantum_dilog(21, z)) < 1e-9


def test_phi_strip_enforced():
    with pytest.raises(DomainError):
        quantum_dilog(11, -0.5)
    with pytest.raises(DomainError):
        quantum_dilog(11, PI + 0.5)
    with pytest.raises(DomainError):
        quantum_dilog(10, 1.0)
    assert strip_margin(11, 1.0) == pytest.approx(1.0 + PI / 11)


# quantum factorial tables ----------------------------------------------------------------

def test_tables_recurrence_and_braced_factorial():
    r = 23
    T = build_quantum_tables(r)
    t = cmath.exp(4j * PI / r)
    assert T.pochhammer[0] == 1
    direct = [1 + 0j]
    for n in range(1, r):
        direct.append(direct[-1] * (1 - t ** n))
    assert np.max(np.abs(T.pochhammer - direct)) < 1e-12 * np.max(np.abs(direct))
    for n in range(r):
        want = (-1) ** n * t ** (-n * (n + 1) / 4) * direct[n]
        assert abs(T.braced_factorial[n] - want) < 1e-12 * max(1.0, abs(want))
    assert np.allclose(T.quantum_int[:r], [np.sin(2 * PI * m / r) / np.sin(2 * PI / r) for m in range(r)])


def test_tables_reject_bad_r():
    for r in (2, 1, 10):
        with pytest.raises(DomainError):
            build_quantum_tables(r)
    with pytest.raises(DomainError):
        build_quantum_tables(2003)


def test_pochhammer_from_quantum_dilog():
    r = 101
    T = build_quantum_tables(r)
    base = quantum_dilog(r, PI / r)
    worst = 0.0
    for n in range(r):
        eps = 1 if n >= (r + 1) // 2 else 0
        arg = (2 * PI * n + PI) / r - eps * PI
        pred = 2 ** eps * abs(cmath.exp(r / (4j * PI) * (base - quantum_dilog(r, arg))))
        worst = max(worst, abs(abs(T.pochhammer[n]) - pred) / pred)
    assert worst < 1e-6


def test_braced_factorial_log_growth():
    gaps = []
    rs = (101, 201, 401, 801)
    for r in rs:
        T = build_quantum_tables(r)
        n = np.arange(1, r)
        gap = T.log_abs_pochhammer[n] + r / (2 * PI) * lobachevsky(2 * n * PI / r)
        gaps.append(np.max(np.abs(gap)) / math.log(r))
    # the gap divided by log r stays bounded as r grows
    assert max(gaps) < 2.0
    assert gaps[-1] <= gaps[0] + 0.5
