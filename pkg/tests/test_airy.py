import mpmath
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from randdigraph.airy import ai, ai_asymptotic, ai_bundle, ai_general, ai_prime, ai_root, ai_roots

REAL_POINTS = [-8.0, -3.3, -1.0188, 0.0, 0.7, 2.5, 6.5, 9.0]


@pytest.mark.parametrize("x", REAL_POINTS)
def test_values_against_scipy(x):
    a, ap, _, _ = scipy.special.airy(x)
    assert float(ai(x, 80)) == pytest.approx(a, rel=1e-12, abs=1e-15)
    assert float(ai_prime(x, 80)) == pytest.approx(ap, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("z", [1 + 1j, -2 + 0.5j, 3 - 4j, 7j])
def test_complex_values_against_scipy(z):
    a, ap, _, _ = scipy.special.airy(z)
    assert abs(complex(ai(mpmath.mpc(z), 80)) - a) < 1e-12 * max(1, abs(a))
    assert abs(complex(ai_prime(mpmath.mpc(z), 80)) - ap) < 1e-12 * max(1, abs(ap))


def test_roots_against_scipy():
    # scipy's zeros are good to about 1e-12 relative (its a5 ends ...112781,
    # tabulated value -7.944133587120853)
    a, ap, _, _ = scipy.special.ai_zeros(6)
    assert [float(r) for r in ai_roots(6)] == pytest.approx(list(a), rel=5e-12)
    assert [float(r) for r in ai_roots(6, prime=True)] == pytest.approx(list(ap), rel=5e-12)
    assert float(ai_root(5)) == pytest.approx(-7.944133587120853, rel=1e-15)
    assert float(ai_root(3)) == pytest.approx(a[2], rel=1e-13)


def test_roots_are_zeros():
    with mpmath.workprec(150):
        r = ai_root(2, prec=150)
        assert abs(ai(r, 150)) < mpmath.mpf(2) ** -140
        rp = ai_root(1, prime=True, prec=150)
        assert abs(ai_prime(rp, 150)) < mpmath.mpf(2) ** -140


def test_antiderivative_normalisation():
    with mpmath.workprec(100):
        assert abs(ai_general(-1, 0, 100) + mpmath.mpf(1) / 3) < mpmath.mpf(2) ** -95


@pytest.mark.parametrize("x", [-2.0, 0.5, 3.0])
def test_antiderivative_against_scipy_quadrature(x):
    tail, _ = scipy.integrate.quad(lambda t: scipy.special.airy(t)[0], x, float("inf"), epsabs=1e-14, epsrel=1e-13)
    assert float(ai_general(-1, x, 80)) == pytest.approx(-tail, rel=1e-10)


@pytest.mark.parametrize("method", ["series", "hyperbola", "segments"])
def test_methods_agree(method):
    z = mpmath.mpf("1.25")
    ref = ai_bundle(z, -3, 4, 120, method="hyperbola")
    got = ai_bundle(z, -3, 4, 120, method=method) if method != "series" else ai_bundle(z, 0, 4, 120, method=method)
    with mpmath.workprec(120):
        for k, v in got.items():
            assert abs(v - ref[k]) < mpmath.mpf(10) ** -30 * max(1, abs(ref[k]))


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-6, max_value=6), st.integers(min_value=-6, max_value=3))
def test_order_recurrence(x, k):
    # Ai(k + 3) = (k + 1) Ai(k) + z Ai(k + 1)
    with mpmath.workprec(100):
        b = ai_bundle(mpmath.mpf(x), k, k + 3, 100)
        lhs = b[k + 3]
        rhs = (k + 1) * b[k] + x * b[k + 1]
        scale = max(abs(b[k]), abs(b[k + 1]), abs(b[k + 3]), mpmath.mpf(1))
        assert abs(lhs - rhs) < mpmath.mpf(10) ** -25 * scale


@pytest.mark.parametrize("k", [-2, 0, 1, 3])
def test_asymptotic_leading_term(k):
    z = mpmath.mpf(40)
    ratio = ai_general(k, z, 80) / ai_asymptotic(k, z)
    assert abs(float(ratio) - 1) < 0.05
