"""Acceptance criteria 1-11.

Each test carries ``@pytest.mark.criterion(k)``; the terminal summary
prints one PASS/FAIL line per criterion.  Runtime limits are asserted
where a criterion states one.
"""

import math
import os
import statistics
import time
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from randdigraph import airy
from randdigraph.airy import ai, ai_general, ai_prime, ai_root
from randdigraph.airy_integrals import (
    airy_table_I,
    elementary_critical,
    residue_sum,
    tau_integral,
    varphi,
)
from randdigraph.asymptotics import asym_probability, convergence_rows, fit_slope, gamma2, sigma2
from randdigraph.deformed_exp import SIMPLE, find_root, phi_eval, root_asymptotic, uniform_approx
from randdigraph.families import (
    FamilySpec,
    WindowP,
    probability_exact,
    probability_exact_certified,
    probability_series_in_p,
)
from randdigraph.oracle import exact_poly, md_probability_capped
from randdigraph.strong_counts import a_r_polynomial, s_r, strong_egf
from reference_tables import (
    AIRY_I,
    AIRY_I_INDEPENDENT,
    AIRY_I_MISPRINTS,
    AIRY_I_MUS,
    AIRY_VALUES,
    AIRY_VALUES_MISPRINTS,
    BICYCLIC,
    ELEMENTARY,
    MDAG,
    S_R,
    SIMPLE_ELEMENTARY,
    WINDOW_MUS,
    five_digit_unit,
)

LONG = os.environ.get("RANDDIGRAPH_LONG_TABLES") == "1"


def _report(label, value, expected, tol):
    print(f"{label}: got {mpmath.nstr(value, 12)} expected {expected} tol {tol}")


# -- criterion 1 ---------------------------------------------------------------


@pytest.mark.criterion(1)
def test_c1_airy_constants():
    airy.clear_cache()
    t0 = time.perf_counter()
    a1 = ai_root(1, prec=96)
    d1 = ai_prime(a1, 96)
    a1p = ai_root(1, prime=True, prec=96)
    v1 = ai(a1p, 96)
    elapsed = time.perf_counter() - t0
    checks = [
        ("a1", a1, -2.338107, 1e-6),
        ("Ai'(a1)", d1, 0.701211, 1e-6),
        ("a1'", a1p, -1.018793, 1e-6),
        ("Ai(a1')", v1, 0.53565666, 1e-7),
    ]
    for label, got, want, tol in checks:
        _report(label, got, want, tol)
        assert abs(got - want) <= tol, label
    print(f"runtime {elapsed:.3f}s")
    assert elapsed < 1.0


# -- criterion 2 ---------------------------------------------------------------


@pytest.fixture(scope="module")
def airy_tables():
    t0 = time.perf_counter()
    a1p = ai_root(1, prime=True, prec=128)
    values = [ai_general(-k, a1p, 128) * (-1) ** k for k in range(11)]
    table = [[airy_table_I(k, mu, mpf(10) ** -13, 96) for mu in AIRY_I_MUS] for k in range(11)]
    return values, table, time.perf_counter() - t0


def _airy_value_params():
    out = []
    for k in range(11):
        if k in AIRY_VALUES_MISPRINTS:
            mark = pytest.mark.xfail(
                strict=True,
                reason=f"printed {AIRY_VALUES[k]}; independent quadrature gives {AIRY_VALUES_MISPRINTS[k]}",
            )
            out.append(pytest.param(k, marks=mark))
        else:
            out.append(k)
    return out


@pytest.mark.criterion(2)
@pytest.mark.parametrize("k", _airy_value_params())
def test_c2_airy_values_five_significant_digits(airy_tables, k):
    got = airy_tables[0][k]
    want = float(AIRY_VALUES[k])
    tol = 0.5 * five_digit_unit(want)
    _report(f"(-1)^{k} Ai(-{k}; a1')", got, AIRY_VALUES[k], tol)
    assert abs(got - want) <= tol


@pytest.mark.criterion(2)
def test_c2_airy_values_match_independent_quadrature(airy_tables):
    with mpmath.workdps(25):
        a1p = mpmath.airyaizero(1, derivative=1)
        for k in range(11):
            if k == 0:
                ref = mpmath.airyai(a1p)
            else:
                g = lambda t: (t - a1p) ** (k - 1) * mpmath.airyai(t)
                ref = mpmath.quad(g, [a1p, 0, 4, mpmath.inf]) / mpmath.factorial(k - 1)
            print(f"n={k}: ours {mpmath.nstr(airy_tables[0][k], 12)} quadrature {mpmath.nstr(ref, 12)}")
            assert abs(airy_tables[0][k] / ref - 1) < 1e-12


def _airy_I_params():
    out = []
    for k in range(11):
        for j, mu in enumerate(AIRY_I_MUS):
            marks = ()
            if (k, mu) in AIRY_I_MISPRINTS:
                marks = pytest.mark.xfail(
                    strict=True,
                    reason=f"printed {AIRY_I[k][j]}; independent value {AIRY_I_INDEPENDENT[k][j]}",
                )
            out.append(pytest.param(k, j, marks=marks, id=f"n{k}-mu{mu}"))
    return out


@pytest.mark.criterion(2)
@pytest.mark.parametrize("k,j", _airy_I_params())
def test_c2_airy_I_five_significant_digits(airy_tables, k, j):
    got = airy_tables[1][k][j]
    text = AIRY_I[k][j]
    want = float(text)
    tol = 0.5 * five_digit_unit(want)
    _report(f"I({k}, {AIRY_I_MUS[j]})", got, text, tol)
    assert abs(got - want) <= tol


@pytest.mark.criterion(2)
def test_c2_airy_I_matches_independent_values(airy_tables):
    worst = 0
    for k in range(11):
        for j in range(len(AIRY_I_MUS)):
            ref = mpf(AIRY_I_INDEPENDENT[k][j])
            worst = max(worst, abs(airy_tables[1][k][j] / ref - 1))
    print(f"largest relative difference over 99 cells: {mpmath.nstr(worst, 3)}")
    assert worst < 1e-12


@pytest.mark.criterion(2)
def test_c2_airy_tables_runtime(airy_tables):
    print(f"runtime {airy_tables[2]:.1f}s for 11 + 99 values")
    assert airy_tables[2] < 120


# -- criterion 3 ---------------------------------------------------------------


@pytest.mark.criterion(3)
def test_c3_exact_contour_identities():
    airy.clear_cache()
    t0 = time.perf_counter()
    one_a = tau_integral([(-2, 1)], [(1, 2)], tol=mpf(10) ** -12)
    one_b = tau_integral([], [(0, 2)], tol=mpf(10) ** -12)
    elapsed = time.perf_counter() - t0
    _report("int Ai(-2; t) / Ai'(t)^2", one_a, 1, 1e-8)
    _report("int Ai(t)^-2", one_b, 1, 1e-8)
    assert abs(one_a - 1) <= 1e-8
    assert abs(one_b - 1) <= 1e-8
    print(f"runtime {elapsed:.1f}s")
    assert elapsed < 30


# -- criterion 4 ---------------------------------------------------------------


@pytest.mark.criterion(4)
def test_c4_critical_constants():
    checks = [
        ("varphi(0)", varphi(0, mpf(10) ** -12), 0.488736706, 1e-8),
        ("elementary_critical(0)", elementary_critical(0, mpf(10) ** -10), 0.699687, 1e-5),
        ("gamma2(1)", gamma2(1), 0.898389, 1e-5),
        ("sigma2(1)", sigma2(1), 0.916215, 1e-5),
    ]
    for model in ("MD", "D2", "SD"):
        fam = FamilySpec.bicyclic()
        n = 10**6
        v = asym_probability(fam, model, n, Fraction(1, n), "critical").value
        checks.append((f"bicyclic critical mu=0 ({model})", v, 0.125, 1e-6))
    for label, got, want, tol in checks:
        _report(label, got, want, tol)
        assert abs(got - want) <= tol, label


# -- criterion 5 ---------------------------------------------------------------

_WINDOW_TABLES = {
    "mdag": (FamilySpec.acyclic(), MDAG, True),
    "elementary": (FamilySpec.elementary(), ELEMENTARY, False),
    "bicyclic": (FamilySpec.bicyclic(), BICYCLIC, False),
}


def _window_params():
    out = []
    for name in _WINDOW_TABLES:
        for n in (100, 1000, 3000, 5000, 10000):
            for mu in WINDOW_MUS:
                marks = () if n <= 1000 else (pytest.mark.slow, pytest.mark.skipif(not LONG, reason="set RANDDIGRAPH_LONG_TABLES=1"))
                out.append(pytest.param(name, n, mu, marks=marks, id=f"{name}-n{n}-mu{mu}"))
    return out


@pytest.mark.criterion(5)
@pytest.mark.parametrize("name,n,mu", _window_params())
def test_c5_window_tables(name, n, mu):
    family, table, scale = _WINDOW_TABLES[name]
    res = probability_exact_certified(family, "MD", n, WindowP(n, Fraction(mu)), digits=10)
    got = res.value * (mpmath.cbrt(n) if scale else 1)
    want = table[n][WINDOW_MUS.index(mu)]
    _report(f"{name} n={n} mu={mu}", got, want, 1e-5)
    assert abs(got - want) < 1e-5


def _simple_params():
    out = []
    for n in (100, 1000, 3000, 5000, 10000):
        for model in ("SD", "D2", "MD"):
            marks = () if n <= 1000 else (pytest.mark.slow, pytest.mark.skipif(not LONG, reason="set RANDDIGRAPH_LONG_TABLES=1"))
            out.append(pytest.param(n, model, marks=marks, id=f"n{n}-{model}"))
    return out


@pytest.mark.criterion(5)
@pytest.mark.parametrize("n,model", _simple_params())
def test_c5_three_model_elementary(n, model):
    got = probability_exact(FamilySpec.elementary(), model, n, Fraction(1, n), digits=10)
    want = SIMPLE_ELEMENTARY[n][model]
    _report(f"elementary {model} n={n}", got, want, 1e-5)
    assert abs(got - want) < 1e-5


@pytest.mark.criterion(5)
@pytest.mark.parametrize("name", list(_WINDOW_TABLES))
def test_c5_limit_rows_from_asymptotics(name):
    family, table, scale = _WINDOW_TABLES[name]
    n = 10**9
    for mu in WINDOW_MUS:
        res = asym_probability(family, "MD", n, WindowP(n, Fraction(mu)), "critical")
        got = res.value * (mpmath.cbrt(n) if scale else 1)
        want = table["inf"][WINDOW_MUS.index(mu)]
        _report(f"{name} limit mu={mu}", got, want, 1e-5)
        assert abs(got - want) < 1e-5


@pytest.mark.criterion(5)
def test_c5_three_model_limit_row():
    for model in ("SD", "D2", "MD"):
        got = asym_probability(FamilySpec.elementary(), model, 10**9, Fraction(1, 10**9), "critical").value
        want = SIMPLE_ELEMENTARY["inf"][model]
        _report(f"elementary limit {model}", got, want, 1e-5)
        assert abs(got - want) < 1e-5


# -- criterion 6 ---------------------------------------------------------------

_DEGREE_FACTOR = {"multi": 2, "simple": 5, "strict": 8}


def _excess_coefficients(r, variant, upto):
    strong = strong_egf(variant, upto, upto + r)
    series = [strong.coeff_extract(n, n + r) for n in range(upto + 1)]
    factor = [Fraction(math.comb(3 * r, i) * (-1) ** i) for i in range(upto + 1)]
    return [sum((factor[i] * series[n - i] for i in range(n + 1)), Fraction(0)) for n in range(upto + 1)]


@pytest.mark.criterion(6)
def test_c6_strong_counts():
    t0 = time.perf_counter()
    got = [s_r(r) for r in range(1, 6)]
    print("s_r:", [str(x) for x in got])
    assert got == S_R
    for r in (1, 2, 3):
        values = {v: a_r_polynomial(r, v).value(Fraction(1)) for v in _DEGREE_FACTOR}
        print(f"A_{r}(1):", {k: str(x) for k, x in values.items()})
        assert len(set(values.values())) == 1
    # degree bounds: expand past the bound and check the extra coefficients vanish
    for variant, factor in _DEGREE_FACTOR.items():
        for r in (1, 2, 3):
            bound = factor * r
            coeffs = _excess_coefficients(r, variant, bound + 2)
            assert coeffs[bound + 1] == 0 and coeffs[bound + 2] == 0, (variant, r)
            assert tuple(coeffs[: bound + 1]) == a_r_polynomial(r, variant).coeffs
    elapsed = time.perf_counter() - t0
    print(f"runtime {elapsed:.1f}s")
    assert elapsed < 300


# -- criterion 7 ---------------------------------------------------------------


@pytest.mark.criterion(7)
@pytest.mark.parametrize("model", ["D2", "SD"])
@pytest.mark.parametrize("family", [FamilySpec.acyclic(), FamilySpec.elementary(), FamilySpec.bicyclic()], ids=str)
def test_c7_oracle_polynomials(model, family):
    for n in range(1, 5):
        enum = exact_poly(n, model, family)
        series = probability_series_in_p(family, model, n)
        width = max(len(enum), len(series))
        enum = enum + [Fraction(0)] * (width - len(enum))
        series = series + [Fraction(0)] * (width - len(series))
        assert enum == series, (n, model, str(family))


@pytest.mark.criterion(7)
@pytest.mark.parametrize("family", [FamilySpec.acyclic(), FamilySpec.elementary(), FamilySpec.bicyclic()], ids=str)
def test_c7_multidigraph_bracket(family):
    for n in (1, 2, 3):
        for p in (Fraction(1, 10), Fraction(1, 2), Fraction(1)):
            low, tail = md_probability_capped(n, p, family, M=20, bits=160)
            exact = probability_exact(family, "MD", n, p, digits=30)
            assert tail <= 1e-8
            with mpmath.workprec(256):
                slack = mpf(10) ** -35
                assert low - slack <= exact <= low + tail + slack, (n, p, str(family))


# -- criterion 8 ---------------------------------------------------------------


@pytest.mark.criterion(8)
def test_c8_simple_root():
    root = find_root(1, 1, 0, kind=SIMPLE, digits=15)
    _report("simple-graphic first root at w = 1", root, 1.488079, 1e-5)
    assert abs(root - mpf("1.488079")) <= 1e-5


@pytest.mark.criterion(8)
@pytest.mark.parametrize("r01", [0, 1])
def test_c8_root_asymptotic_gap(r01):
    gaps = []
    for w in (Fraction(1, 100), Fraction(1, 1000)):
        root = find_root(1, w, r01, digits=20)
        approx = root_asymptotic(1, w, r01)
        gaps.append(abs(root - approx) / root)
    ratio = gaps[0] / gaps[1]
    print(f"r={r01}: gaps {[mpmath.nstr(g, 5) for g in gaps]} ratio {mpmath.nstr(ratio, 5)}")
    assert 10 <= ratio <= 40


# -- criterion 9 ---------------------------------------------------------------


@pytest.mark.criterion(9)
@pytest.mark.parametrize("part,expected", [("c", 1 / 3), ("c_refined", 2 / 3)])
def test_c9_uniform_approximation_order(part, expected):
    tau = 0.5
    ws = (1e-2, 1e-3, 1e-4)
    logs = []
    for w in ws:
        z = (1 - tau * w ** (2 / 3)) / (math.e * w)
        rel = abs(uniform_approx(part, z, w) / phi_eval(z, w, digits=10) - 1)
        logs.append(math.log(float(rel)))
    slope = statistics.linear_regression([math.log(w) for w in ws], logs).slope
    print(f"part {part}: slope {slope:.4f} expected {expected:.4f}")
    assert abs(slope - expected) <= 0.15


# -- criterion 10 --------------------------------------------------------------


@pytest.mark.criterion(10)
@pytest.mark.parametrize("mu", [1, 2, 3])
def test_c10_residue_sum_matches_contour(mu):
    res, tail = residue_sum("acyclic", mu, 30)
    integral = varphi(mu, mpf(10) ** -12)
    _report(f"residue sum mu={mu} (tail {mpmath.nstr(tail, 3)})", res, mpmath.nstr(integral, 12), 1e-6)
    assert abs(res - integral) <= 1e-6


# -- criterion 11 --------------------------------------------------------------


@pytest.mark.criterion(11)
@pytest.mark.parametrize("lam,lo,hi", [(Fraction(1, 2), -1.3, -0.7), (Fraction(2), -0.5, -0.2)])
def test_c11_convergence_slope(lam, lo, hi):
    rows = convergence_rows(FamilySpec.acyclic(), "MD", lam, [250, 500, 1000, 2000], digits=10)
    slope = fit_slope(rows)
    for r in rows:
        print(f"n={r.n} exact={mpmath.nstr(r.exact, 10)} asym={mpmath.nstr(r.asym, 10)} log|ratio-1|={r.log_abs_ratio_minus_one:.4f}")
    print(f"lambda={lam}: slope {slope:.4f} in [{lo}, {hi}]")
    assert lo <= slope <= hi
