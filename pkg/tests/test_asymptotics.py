from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randdigraph.airy_integrals import varphi
from randdigraph.asymptotics import (
    AUTO_WINDOW,
    ConvergenceRow,
    Regime,
    alpha,
    asym_probability,
    beta,
    constants,
    convergence_rows,
    fit_slope,
)
from randdigraph.families import FamilySpec
from randdigraph.scalar_core import DomainError
from randdigraph.strong_counts import s_r

ACYCLIC = FamilySpec.acyclic()
ELEMENTARY = FamilySpec.elementary()


@settings(max_examples=50)
@given(st.floats(min_value=0.05, max_value=20).filter(lambda x: abs(x - 1) > 1e-3))
def test_alpha_and_beta_have_the_sign_of_lambda_minus_one(lam):
    assert (alpha(lam) > 0) == (lam > 1)
    assert (beta(lam) > 0) == (lam > 1)


def test_alpha_beta_vanish_at_one():
    assert alpha(1) == 0
    assert beta(1) == 0


def test_alpha_is_cubic_near_one():
    # alpha(1 + e) = e^3/6 + O(e^4): the first two derivatives vanish
    e = mpmath.mpf("1e-4")
    with mpmath.workprec(128):
        assert abs(alpha(1 + e) / e**3 - mpmath.mpf(1) / 6) < 1e-3


@pytest.mark.parametrize(
    "n,p,tag",
    [(1000, Fraction(1, 2000), "subcritical"), (1000, Fraction(1, 1000), "critical"), (1000, Fraction(3, 1000), "supercritical")],
)
def test_auto_regime(n, p, tag):
    assert Regime.from_np(n, p).tag == tag


def test_auto_window_edge():
    n = 1000
    inside = Fraction(1, n) * (1 + Fraction(AUTO_WINDOW, 10))
    outside = Fraction(1, n) * (1 + Fraction(AUTO_WINDOW + 1, 10))
    assert Regime.from_np(n, inside).tag == "critical"
    assert Regime.from_np(n, outside).tag == "supercritical"


def test_regime_consistency_is_checked():
    with pytest.raises(DomainError):
        Regime.from_np(100, Fraction(2, 100), "subcritical")
    with pytest.raises(DomainError):
        Regime.from_np(100, Fraction(1, 200), "supercritical")
    with pytest.raises(ValueError):
        Regime.from_np(100, Fraction(1, 200), "lukewarm")


def test_critical_is_scaled_varphi():
    n = 10**6
    res = asym_probability(ACYCLIC, "MD", n, Fraction(1, n), "critical")
    with mpmath.workprec(128):
        want = varphi(0, mpmath.mpf(10) ** -15) / mpmath.cbrt(n)
        assert abs(res.value - want) < mpmath.mpf(10) ** -14 * want
    assert res.warnings == ()


def test_wide_mu_warns():
    n = 1000
    res = asym_probability(ELEMENTARY, "MD", n, Fraction(2, n), "critical")
    assert res.warnings


def test_subcritical_error_shrinks_like_one_over_n():
    rows = convergence_rows(ACYCLIC, "MD", Fraction(1, 2), [100, 200, 400, 800])
    assert -1.2 < fit_slope(rows) < -0.8


@pytest.mark.parametrize("model", ["D2", "SD"])
def test_simple_models_subcritical_ratio(model):
    rows = convergence_rows(ACYCLIC, model, Fraction(1, 2), [400, 1600])
    errs = [abs(float(r.ratio) - 1) for r in rows]
    assert errs[1] < errs[0] < 0.05


def test_supercritical_elementary_ratio():
    rows = convergence_rows(ELEMENTARY, "MD", Fraction(3, 2), [200, 800])
    errs = [abs(float(r.ratio) - 1) for r in rows]
    assert errs[1] < errs[0] < 0.3


def test_convergence_needs_lambda_off_one():
    with pytest.raises(DomainError):
        convergence_rows(ACYCLIC, "MD", 1, [10, 20])


def test_fit_slope_on_synthetic_rows():
    rows = [ConvergenceRow(n, 1 + mpmath.mpf(n) ** (-mpmath.mpf(1) / 3), mpmath.mpf(1)) for n in (10, 100, 1000)]
    assert fit_slope(rows) == pytest.approx(-1 / 3, abs=1e-9)
    with pytest.raises(ValueError):
        fit_slope(rows[:1])


def test_named_constants():
    assert constants("alpha", 1) == 0
    assert constants("c_r", 1, "D2", 1) == s_r(1)
    assert constants("c_r", 1, "SD", 2) == s_r(2)
    with pytest.raises(ValueError):
        constants("zeta", 1)
    with pytest.raises(DomainError):
        constants("delta1", 1, "MD")
    with pytest.raises(DomainError):
        constants("sigma_rd", 2, "MD", 1, 2)


def test_per_kernel_family_is_multidigraph_only():
    with pytest.raises(ValueError):
        asym_probability(FamilySpec.one_complex_kernel(1, 0), "SD", 100, Fraction(1, 100))
