import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randdigraph.deformed_exp import (
    SIMPLE,
    EntireFnSpec,
    dphi_at_root,
    find_root,
    phi_eval,
    root_asymptotic,
    uniform_approx,
)
from randdigraph.scalar_core import DomainError


def g_coefficients(r, w, order):
    """Maclaurin coefficients of (1 - w u)^r exp(-u), exact."""
    e = [Fraction((-1) ** n, math.factorial(n)) for n in range(order + 1)]
    poly = [Fraction(math.comb(r, k)) * (-w) ** k for k in range(r + 1)]
    return [sum(poly[k] * e[n - k] for k in range(min(r, n) + 1)) for n in range(order + 1)]


def direct_multigraphic(z, w, r, order=80):
    g = g_coefficients(r, Fraction(w), order)
    return math.fsum(float(g[n]) * math.exp(-n * n * w / 2) * z**n for n in range(order + 1))


def direct_simple(z, w, r, order=60):
    g = g_coefficients(r, w, order)
    return sum(g[n] * (1 + w) ** (-(n * (n - 1) // 2)) * z**n for n in range(order + 1))


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=-3, max_value=3), st.sampled_from([0.25, 0.5, 1.0]), st.integers(0, 2))
def test_multigraphic_against_direct_sum(z, w, r):
    want = direct_multigraphic(z, w, r)
    got = float(phi_eval(z, Fraction(w), r, digits=15))
    assert got == pytest.approx(want, rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("z", [Fraction(1), Fraction(-2), Fraction(5, 2)])
@pytest.mark.parametrize("w", [Fraction(1, 2), Fraction(1)])
@pytest.mark.parametrize("r", [0, 1])
def test_simple_against_exact_sum(z, w, r):
    want = direct_simple(z, w, r)
    got = phi_eval(z, w, r, kind=SIMPLE, digits=25)
    with mpmath.workprec(120):
        exact = mpmath.mpf(want.numerator) / want.denominator
        assert abs(got - exact) <= mpmath.mpf(10) ** -22 * max(1, abs(exact))


def test_derivative_identity():
    # d/dz phi_1(F) = (-phi_0(xF) - phi_1(xF)/w + phi_1(x F')) / z
    z, w = mpmath.mpf("0.5"), mpmath.mpf("0.2")
    F = EntireFnSpec.one()
    lhs = phi_eval(z, w, 1, F, deriv=1, digits=20)
    a = phi_eval(z, w, 0, F.times_x(), digits=20)
    b = phi_eval(z, w, 1, F.times_x(), digits=20)
    c = phi_eval(z, w, 1, F.derivative().times_x(), digits=20)
    with mpmath.workprec(100):
        rhs = (-a - b / w + c) / z
        assert abs(lhs - rhs) < mpmath.mpf(10) ** -17 * abs(lhs)


def test_entire_function_spec():
    F = EntireFnSpec.poly_times_exp([1, 2], 2)
    x = mpmath.mpf("0.3")
    assert float(F.eval(x)) == pytest.approx((1 + 2 * 0.3) * math.exp(0.3 + 0.045), rel=1e-14)
    dF = F.derivative()
    assert float(dF.eval(x)) == pytest.approx(float(mpmath.diff(F.eval, x)), rel=1e-10)
    t = EntireFnSpec.exp_ck(1).taylor(6)
    assert t == [Fraction(1, math.factorial(n)) for n in range(7)]


@pytest.mark.parametrize("kind", ["multigraphic", SIMPLE])
@pytest.mark.parametrize("w", [0.1, 0.03])
def test_root_is_a_zero(kind, w):
    root = find_root(1, w, kind=kind, digits=20)
    with mpmath.workprec(120):
        h = mpmath.mpf(10) ** -12 * root
        lo = phi_eval(root - h, w, kind=kind, digits=20)
        hi = phi_eval(root + h, w, kind=kind, digits=20)
    assert lo * hi < 0


def test_roots_are_ordered_and_approach_asymptotics():
    w = 0.01
    r1, r2 = find_root(1, w), find_root(2, w)
    assert r1 < r2
    a1 = root_asymptotic(1, w)
    assert abs(float(r1 / a1) - 1) < 0.02


def test_dphi_ratio_tends_to_one():
    # the relative error peaks near w = 0.01 before decaying
    ratios = [abs(float(dphi_at_root(1, w)["ratio"]) - 1) for w in (0.01, 0.001, 0.0003)]
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] < 0.07


def test_dphi_ratio_with_linear_factor():
    for w in (0.01, 0.001):
        assert abs(float(dphi_at_root(1, w, 1)["ratio"]) - 1) < 0.03


def test_uniform_approx_region_a():
    w = 0.1
    assert float(uniform_approx("a", 1.0, w)) == pytest.approx(float(phi_eval(1.0, w)), rel=0.01)


def test_uniform_approx_checks_region():
    w = 0.1
    with pytest.raises(DomainError):
        uniform_approx("a", 1 / (math.e * w), w)
