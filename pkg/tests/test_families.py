import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randdigraph.airy import ai_general, ai_root
from randdigraph.airy_integrals import varphi
from randdigraph.deformed_exp import SIMPLE, EntireFnSpec, find_root, phi_eval
from randdigraph.families import (
    FamilySpec,
    WindowP,
    family_ggf,
    probability_exact,
    probability_exact_certified,
    probability_series_in_p,
)
from randdigraph.oracle import md_probability_capped
from randdigraph.scalar_core import DomainError
from randdigraph.series import tree_eval

ACYCLIC = FamilySpec.acyclic()
ELEMENTARY = FamilySpec.elementary()
BICYCLIC = FamilySpec.bicyclic()


def acyclic_by_sources(n, p, model):
    """P(acyclic) by inclusion-exclusion over the set of sources."""
    q = 1 - p
    inside = (lambda k: q ** (k * (k - 1))) if model == "D2" else (lambda k: (1 - 2 * p) ** (k * (k - 1) // 2))
    a = [Fraction(1)]
    for m in range(1, n + 1):
        a.append(sum((-1) ** (k + 1) * math.comb(m, k) * inside(k) * q ** (k * (m - k)) * a[m - k] for k in range(1, m + 1)))
    return a[n]


def as_mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


@pytest.mark.parametrize("model", ["D2", "SD"])
@pytest.mark.parametrize("n", [2, 5, 12, 30])
def test_acyclic_against_source_recurrence(model, n):
    p = Fraction(1, n + 1)
    want = acyclic_by_sources(n, p, model)
    got = probability_exact(ACYCLIC, model, n, p, 25)
    with mpmath.workprec(120):
        assert abs(got - as_mpf(want)) < mpmath.mpf(10) ** -24


@pytest.mark.parametrize("model", ["D2", "SD"])
def test_series_in_p_against_source_recurrence(model):
    n = 4
    coeffs = probability_series_in_p(ACYCLIC, model, n)
    for p in (Fraction(1, 7), Fraction(1, 3)):
        assert sum(c * p**k for k, c in enumerate(coeffs)) == acyclic_by_sources(n, p, model)


def test_one_vertex_multidigraph():
    p = Fraction(1, 3)
    with mpmath.workprec(120):
        e = mpmath.exp(-as_mpf(p))
        assert abs(probability_exact(ACYCLIC, "MD", 1, p, 25) - e) < mpmath.mpf(10) ** -24
        assert abs(probability_exact(ELEMENTARY, "MD", 1, p, 25) - e * (1 + as_mpf(p))) < mpmath.mpf(10) ** -24


def test_two_vertex_simple_models():
    p = Fraction(2, 7)
    assert probability_series_in_p(ACYCLIC, "D2", 2) == [1, 0, -1]
    assert float(probability_exact(ACYCLIC, "D2", 2, p)) == pytest.approx(float(1 - p * p), rel=1e-12)
    assert abs(probability_exact(ACYCLIC, "SD", 2, p) - 1) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 25), st.fractions(min_value=Fraction(1, 100), max_value=Fraction(2, 5), max_denominator=200),
       st.sampled_from(["MD", "D2", "SD"]))
def test_family_ordering(n, p, model):
    a = probability_exact(ACYCLIC, model, n, p, 12)
    e = probability_exact(ELEMENTARY, model, n, p, 12)
    b = probability_exact(BICYCLIC, model, n, p, 12)
    tol = mpmath.mpf(10) ** -11
    assert -tol <= a <= e + tol
    assert -tol <= b
    assert e + b <= 1 + tol


@pytest.mark.parametrize("model,p", [("D2", Fraction(1)), ("SD", Fraction(1, 2)), ("SD", Fraction(3, 5)), ("D2", Fraction(-1, 5))])
def test_domain(model, p):
    with pytest.raises(DomainError):
        probability_exact(ACYCLIC, model, 3, p)


def test_family_model_restrictions():
    with pytest.raises(ValueError):
        probability_exact(FamilySpec.one_complex_kernel(1, 0), "D2", 5, Fraction(1, 5))
    with pytest.raises(ValueError):
        probability_exact(FamilySpec.one_complex_excess(1), "MD", 5, Fraction(1, 5))
    with pytest.raises(ValueError):
        FamilySpec.one_complex_kernel(1, 2)


def test_bicyclic_is_sum_of_kernels():
    # the one-vertex kernel with two loops carries the symmetry weight 1/2
    p = WindowP(40, Fraction(1))
    total = probability_exact(BICYCLIC, "MD", 40, p, 20)
    k0, k1 = (probability_exact(FamilySpec.one_complex_kernel(1, d), "MD", 40, p, 20) for d in (0, 1))
    with mpmath.workprec(120):
        assert abs(total - (k0 + k1 / 2)) < mpmath.mpf(10) ** -18


def test_rational_and_real_rings_agree():
    w = Fraction(1, 7)
    exact = family_ggf(ELEMENTARY, "D2", w, 10, ring="rational")
    real = family_ggf(ELEMENTARY, "D2", w, 10, ring="hp_real", prec=150)
    with mpmath.workprec(150):
        for x, y in zip(real.coeffs, exact.coeffs):
            assert abs(x - as_mpf(y)) <= mpmath.mpf(2) ** -140 * max(1, abs(as_mpf(y)))


def test_certified_digits():
    res = probability_exact_certified(ELEMENTARY, "MD", 200, WindowP(200, Fraction(0)), digits=15)
    assert res.digits >= 15
    with mpmath.workprec(res.bits):
        assert abs(res.value - probability_exact(ELEMENTARY, "MD", 200, WindowP(200, Fraction(0)), 20)) < mpmath.mpf(10) ** -14


AMBIENT_CASES = {
    "elementary MD": lambda: probability_exact(ELEMENTARY, "MD", 5, Fraction(1, 10), 25),
    "bicyclic MD": lambda: probability_exact(BICYCLIC, "MD", 30, WindowP(30, Fraction(1)), 25),
    "elementary SD": lambda: probability_exact(ELEMENTARY, "SD", 30, Fraction(1, 30), 25),
    "phi": lambda: phi_eval(Fraction(1, 3), Fraction(1, 5), 1, EntireFnSpec.exp_ck(2), SIMPLE, digits=25),
    "root": lambda: find_root(1, Fraction(1, 5), 1, digits=25),
    "airy": lambda: ai_general(-3, ai_root(1, True, 128), 128),
    "varphi": lambda: varphi(1, mpmath.mpf(10) ** -20),
    "oracle": lambda: md_probability_capped(2, Fraction(1, 3), ELEMENTARY, bits=160)[0],
    "tree": lambda: tree_eval("T", Fraction(1, 4), 128),
}


@pytest.mark.parametrize("name", list(AMBIENT_CASES))
def test_results_do_not_depend_on_ambient_precision(name):
    f = AMBIENT_CASES[name]
    values = []
    for bits in (30, 53, 400):
        with mpmath.workprec(bits):
            values.append(f())
    with mpmath.workprec(400):
        ref = values[-1]
        for v in values[:-1]:
            assert abs(v - ref) <= mpmath.mpf(10) ** -19 * abs(ref)
