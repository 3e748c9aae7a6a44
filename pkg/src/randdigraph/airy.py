"""Generalized Airy functions ``Ai(k; z)`` for every integer order ``k``.

``Ai(k; z) = (-1)^k / (2 pi i) * integral over Pi(phi) of t^k exp(-z t + t^3/3) dt``

where ``Pi(phi)`` comes from ``infinity * exp(-i phi)``, runs along the ray
of angle ``-phi`` down to radius ``R``, crosses the vertical segment
``Re t = R cos(phi)`` and leaves along the ray of angle ``+phi``.  We use
``phi = pi/3``.  For ``k >= 0`` this is the k-th derivative of ``Ai``; for
``k < 0`` it is the |k|-fold antiderivative normalised by the contour
(for instance ``Ai(-1; z) = int_{-inf}^z Ai - 1``).

Evaluation strategy

* ``k >= 0`` and ``|z| <= 6``: Maclaurin series seeded with ``Ai(0)`` and
  ``Ai'(0)``.
* otherwise (the default ``"hyperbola"`` method): the contour is deformed
  to the hyperbola ``x0 (cosh s + i sqrt(3) sinh s)``, which has the same
  asymptotic directions as ``Pi(pi/3)``, and integrated with the
  trapezoidal rule in ``s``.  The vertex ``x0`` is placed at the saddle
  point ``sqrt(z)`` when possible.  Guard bits cover the gap between the
  integrand peak and the size of the result.
* ``method="segments"`` keeps the literal three-piece ``Pi(pi/3)`` contour
  with tanh-sinh quadrature on each piece; it is slower and serves as an
  independent cross-check of the hyperbola path.

Every quadrature pass computes a whole range of orders ``kmin..kmax`` from
the same exponential factor; results are cached per abscissa so that
repeated contour integrals in :mod:`randdigraph.airy_integrals` share work.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mpc, mpf

from .quadrature import tanh_sinh
from .scalar_core import DomainError, NumericalFailure, default_precision, workprec

__all__ = [
    "ContourSpec",
    "ai",
    "ai_asymptotic",
    "ai_bundle",
    "ai_general",
    "ai_prime",
    "ai_root",
    "ai_roots",
    "clear_cache",
]

SERIES_RADIUS = 6.0
PHI = math.pi / 3


@dataclass(frozen=True)
class ContourSpec:
    """Geometry of ``Pi(phi)``: angle, radius of the corner points, ray length."""

    phi: float = PHI
    radius_cut: float = 1.0
    truncation_T: float = 10.0

    def __post_init__(self):
        if not (math.pi / 6 < self.phi <= math.pi / 2):
            raise ValueError("phi must lie in (pi/6, pi/2]")
        if self.radius_cut <= 0 or self.truncation_T <= self.radius_cut:
            raise ValueError("need 0 < radius_cut < truncation_T")


# ---------------------------------------------------------------------------
# Maclaurin path
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _ai_zero_values(bits: int) -> tuple[mpf, mpf]:
    with workprec(bits):
        a0 = 1 / (mpmath.cbrt(9) * mpmath.gamma(mpf(2) / 3))
        a1 = -1 / (mpmath.cbrt(3) * mpmath.gamma(mpf(1) / 3))
    return a0, a1


def _maclaurin_coeffs(bits: int, count: int) -> list[mpf]:
    return _maclaurin_cache(bits, max(64, 1 << (count - 1).bit_length()))[:count]


@lru_cache(maxsize=32)
def _maclaurin_cache(bits: int, count: int) -> list[mpf]:
    a0, a1 = _ai_zero_values(bits)
    with workprec(bits):
        c = [a0, a1, mpf(0)]
        for m in range(count - 3):
            c.append(c[m] / ((m + 2) * (m + 3)))
    return c


def _maclaurin_bundle(z, kmin: int, kmax: int, bits: int) -> dict[int, object]:
    az = float(abs(z))
    guard = int(math.ceil(4 / 3 * az**1.5 * 1.4427)) + 20 + 2 * kmax
    work = bits + guard
    out = {}
    with workprec(work):
        # terms behave like |z|^m / (m!)^(2/3); find where they drop below eps
        count = 3
        lz = math.log(max(az, 1e-300))
        target = -work * math.log(2) - 20
        while count * lz - 2 / 3 * math.lgamma(count + 1) + kmax * math.log(count) > target:
            count += 8
        count += 3 * kmax + 16
        coeffs = _maclaurin_coeffs(work, count + kmax + 3)
        for k in range(kmin, kmax + 1):
            terms = []
            zp = mpf(1)
            for m in range(k, len(coeffs)):
                cm = coeffs[m]
                if cm != 0:
                    terms.append(cm * (mpmath.rf(m - k + 1, k) if k else 1) * zp)
                zp *= z
            s = mpmath.fsum(terms)
            out[k] = s
    return out


# ---------------------------------------------------------------------------
# Contour path
# ---------------------------------------------------------------------------


def _log_result_estimate(k: int, z: complex) -> float:
    az = abs(z)
    if az < 1:
        return -2.0
    e = -(2 / 3 * cmath.sqrt(z) ** 3).real + (k / 2 - 0.25) * math.log(az) - math.log(2 * math.sqrt(math.pi))
    return e


def _contour_geometry(z: complex) -> float:
    sq = cmath.sqrt(z)
    return max(1.0, 2 * sq.real)


def _log_integrand(t: complex, z: complex, k: int) -> float:
    return (-z * t + t**3 / 3).real + k * math.log(abs(t))


def _ray_length(z: complex, k: int, radius: float, sign: int, log_floor: float) -> float:
    """Ray length beyond which ``|t^k exp(-zt + t^3/3)|`` stays below e^log_floor."""
    d = cmath.exp(1j * sign * PHI)
    u = radius
    while True:
        u += 0.25
        if u > 1e4:
            raise NumericalFailure("contour tail bound not reached")
        val = _log_integrand(u * d, z, k)
        # beyond the local peak and below the floor, decay is monotone (cubic)
        if val < log_floor and u * u > abs(z) + abs(k) + 1:
            return u


def _segments_bundle(z, kmin: int, kmax: int, bits: int) -> dict[int, object]:
    zc = complex(z)
    radius = _contour_geometry(zc)
    c = math.cos(PHI)
    s = math.sin(PHI)
    # guard bits: peak of the integrand along the path vs the result size
    samples = [complex(radius * c, radius * s * y / 20) for y in range(-20, 21)]
    for sign in (-1, 1):
        d = cmath.exp(1j * sign * PHI)
        samples += [d * (radius + 0.25 * j) for j in range(200)]
    peak = max(max(_log_integrand(t, zc, kmin), _log_integrand(t, zc, kmax)) for t in samples)
    est = max(_log_result_estimate(kmin, zc), _log_result_estimate(kmax, zc))
    guard = max(0, int(math.ceil((peak - est) * 1.4427))) + 24
    work = bits + guard
    log_tol = -(bits + 2) * math.log(2) + est
    lengths = [_ray_length(zc, kk, radius, sign, log_tol) for sign in (-1, 1) for kk in (kmin, kmax)]
    T = max(lengths)
    with workprec(work):
        z = mpmath.mpmathify(z)
        R = mpf(radius)
        phi = mpmath.pi / 3
        dn = mpmath.expjpi(mpf(-1) / 3)
        up = mpmath.expjpi(mpf(1) / 3)
        nk = kmax - kmin + 1
        tol = mpmath.exp(mpf(log_tol)) / 4

        def powers(t, base):
            tk = t**kmin
            out = []
            for _ in range(nk):
                out.append(base * tk)
                tk *= t
            return out

        def lower(u):
            # t = u e^{-i phi}, traversed from u = T down to u = R
            t = u * dn
            return powers(t, -dn * mpmath.exp(-z * t + t**3 / 3))

        def middle(y):
            t = mpc(R * mpmath.cos(phi), y)
            return powers(t, 1j * mpmath.exp(-z * t + t**3 / 3))

        def upper(u):
            t = u * up
            return powers(t, up * mpmath.exp(-z * t + t**3 / 3))

        h = R * mpmath.sin(phi)
        total = [mpc(0)] * nk
        for f, a, b in ((lower, R, T), (middle, -h, h), (upper, R, T)):
            part, _ = tanh_sinh(f, a, b, work, tol, min_level=3, max_level=12)
            total = [p + q for p, q in zip(total, part)]
        out = {}
        two_pi_i = 2j * mpmath.pi
        real_z = mpmath.im(z) == 0
        for i, k in enumerate(range(kmin, kmax + 1)):
            v = total[i] / two_pi_i
            if k % 2:
                v = -v
            out[k] = mpmath.re(v) if real_z else v
    return out


def _hyperbola_x0(z: complex) -> float:
    sq = cmath.sqrt(z)
    p, q = sq.real, abs(sq.imag)
    return max(0.5, math.sqrt(max(p * p - q * q / 3, 0.0)))


def _hyperbola_bundle(z, kmin: int, kmax: int, bits: int) -> dict[int, object]:
    """Trapezoidal rule on ``t(s) = x0 (cosh s + i sqrt(3) sinh s)``.

    The hyperbola has the same asymptotic directions ``exp(+-i pi/3)`` as
    ``Pi(pi/3)``, so by Cauchy's theorem it yields the same integral.  The
    integrand decays doubly exponentially in ``s`` and is analytic in the
    strip ``|Im s| < pi/6``, so the trapezoidal rule converges
    geometrically as the step is halved.  ``x0`` puts the vertex of the
    hyperbola through the saddle point ``sqrt(z)`` whenever possible.
    """
    zc = complex(z)
    x0 = _hyperbola_x0(zc)
    r3 = math.sqrt(3)

    def path(sv: float) -> complex:
        return x0 * complex(math.cosh(sv), r3 * math.sinh(sv))

    def log_mag(sv: float, k: int) -> float:
        t = path(sv)
        dt = x0 * abs(complex(math.sinh(sv), r3 * math.cosh(sv)))
        return _log_integrand(t, zc, k) + math.log(dt)

    grid = [j * 0.05 for j in range(-200, 201)]
    peak = max(max(log_mag(g, kmin), log_mag(g, kmax)) for g in grid)
    est = max(_log_result_estimate(kmin, zc), _log_result_estimate(kmax, zc))
    guard = max(0, int(math.ceil((peak - est) * 1.4427))) + 24
    work = bits + guard
    log_tol = -(bits + 4) * math.log(2) + est
    ends = []
    for sign in (-1, 1):
        sv = 0.0
        while True:
            sv += 0.05
            if sv > 12:
                raise NumericalFailure("contour tail bound not reached")
            if max(log_mag(sign * sv, kmin), log_mag(sign * sv, kmax)) < log_tol - 8 and sv > 1:
                break
        ends.append(sv)
    smax = max(ends)
    with workprec(work):
        z = mpmath.mpmathify(z)
        X0 = mpf(x0)
        R3 = mpmath.sqrt(3)
        nk = kmax - kmin + 1
        tol = mpmath.exp(mpf(log_tol))

        def node(sv):
            ch = mpmath.cosh(sv)
            sh = mpmath.sinh(sv)
            t = X0 * mpc(ch, R3 * sh)
            base = X0 * mpc(sh, R3 * ch) * mpmath.exp(-z * t + t**3 / 3)
            tk = t**kmin
            out = []
            for _ in range(nk):
                out.append(base * tk)
                tk *= t
            return out

        h0 = mpf(1) / 4
        jmax = int(smax / 0.25) + 1
        acc = [mpc(0)] * nk
        for j in range(-jmax, jmax + 1):
            acc = [a + v for a, v in zip(acc, node(j * h0))]
        prev = [a * h0 for a in acc]
        level = 0
        while True:
            level += 1
            if level > 10:
                raise NumericalFailure("trapezoidal rule on the Airy contour did not converge", partial=prev)
            h = h0 / 2**level
            count = jmax * 2**level
            for j in range(-count + 1, count, 2):
                acc = [a + v for a, v in zip(acc, node(j * h))]
            cur = [a * h for a in acc]
            err = max(abs(a - b) for a, b in zip(cur, prev))
            prev = cur
            if err <= tol and level >= 2:
                break
        out = {}
        two_pi_i = 2j * mpmath.pi
        real_z = mpmath.im(z) == 0
        for i, k in enumerate(range(kmin, kmax + 1)):
            v = cur[i] / two_pi_i
            if k % 2:
                v = -v
            out[k] = mpmath.re(v) if real_z else v
    return out


def _contour_bundle(z, kmin: int, kmax: int, bits: int, method: str = "hyperbola") -> dict[int, object]:
    if method == "hyperbola":
        return _hyperbola_bundle(z, kmin, kmax, bits)
    if method == "segments":
        return _segments_bundle(z, kmin, kmax, bits)
    raise ValueError(f"unknown contour method {method!r}")


# ---------------------------------------------------------------------------
# Public evaluation API
# ---------------------------------------------------------------------------

_BUNDLE_CACHE: dict = {}
_CACHE_LIMIT = 200000


def clear_cache() -> None:
    _BUNDLE_CACHE.clear()


def ai_bundle(
    z, kmin: int, kmax: int, prec: int | None = None, method: str = "auto"
) -> dict[int, object]:
    """``{k: Ai(k; z)}`` for ``kmin <= k <= kmax`` from one evaluation.

    ``method`` is ``"auto"`` (series when ``kmin >= 0`` and ``|z| <= 6``,
    otherwise the hyperbolic contour), ``"series"``, ``"hyperbola"`` or
    ``"segments"`` (tanh-sinh on the three pieces of ``Pi(pi/3)``).  Real
    ``z`` gives real values.  Results are cached.
    """
    if kmin > kmax:
        raise ValueError("kmin must not exceed kmax")
    bits = prec or default_precision()
    with workprec(bits):
        z = mpmath.mpmathify(z)
        if isinstance(z, mpc) and z.imag == 0:
            z = z.real
    if method == "auto":
        method = "series" if kmin >= 0 and abs(z) <= SERIES_RADIUS else "hyperbola"
    key = (z.real, z.imag if isinstance(z, mpc) else 0, kmin, kmax, bits, method)
    hit = _BUNDLE_CACHE.get(key)
    if hit is not None:
        return hit
    if method == "series":
        if kmin < 0:
            raise ValueError("the Maclaurin path only covers k >= 0")
        vals = _maclaurin_bundle(z, kmin, kmax, bits)
    else:
        vals = _contour_bundle(z, kmin, kmax, bits, method)
    with workprec(bits):
        vals = {k: +v for k, v in vals.items()}
    if len(_BUNDLE_CACHE) > _CACHE_LIMIT:
        _BUNDLE_CACHE.clear()
    _BUNDLE_CACHE[key] = vals
    return vals


def ai_general(k: int, z, prec: int | None = None, method: str = "auto"):
    """``Ai(k; z)`` for any integer ``k``."""
    return ai_bundle(z, k, k, prec, method)[k]


def ai(z, prec: int | None = None):
    return ai_general(0, z, prec)


def ai_prime(z, prec: int | None = None):
    return ai_general(1, z, prec)


def ai_asymptotic(k: int, z, eps: float = math.pi / 6):
    """Leading term ``(-1)^k z^(k/2-1/4) exp(-2/3 z^(3/2)) / (2 sqrt(pi))``.

    Valid for large ``|z|`` with ``|arg z| <= pi - eps``.
    """
    z = mpmath.mpmathify(z)
    if z == 0:
        raise DomainError("asymptotic form needs z != 0")
    if abs(mpmath.arg(z)) > math.pi - eps:
        raise DomainError("argument too close to the negative real axis")
    v = z ** (mpf(k) / 2 - mpf(1) / 4) * mpmath.exp(-mpf(2) / 3 * z ** (mpf(3) / 2)) / (2 * mpmath.sqrt(mpmath.pi))
    if k % 2:
        v = -v
    if not isinstance(z, mpc):
        return mpmath.re(v)
    return v


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------


def _seed(j: int, prime: bool) -> float:
    """Leading asymptotic location ``-(3 pi (4j - 1) / 8)^(2/3)`` (``4j - 3`` for ``Ai'``)."""
    q = 4 * j - 3 if prime else 4 * j - 1
    return -((3 * math.pi * q / 8) ** (2 / 3))


def _refined_seed(j: int, prime: bool) -> float:
    # two further terms of the standard large-t expansion of the zeros
    q = 4 * j - 3 if prime else 4 * j - 1
    t = 3 * math.pi * q / 8
    if prime:
        corr = 1 - 7 / 48 / t**2 + 35 / 288 / t**4
    else:
        corr = 1 + 5 / 48 / t**2 - 5 / 36 / t**4
    return -(t ** (2 / 3)) * corr


@lru_cache(maxsize=512)
def ai_root(j: int, prime: bool = False, prec: int | None = None) -> mpf:
    """The j-th zero of ``Ai`` (or of ``Ai'`` when ``prime``), ordered by modulus.

    The bracket comes from the leading asymptotic location of neighbouring
    zeros; Newton's method starts from the refined asymptotic value and a
    step that leaves the bracket is replaced by bisection.
    """
    if j < 1:
        raise ValueError("j must be a positive integer")
    bits = prec or default_precision()
    work = bits + 24
    order = 1 if prime else 0

    def f(x):
        b = ai_bundle(x, order, order + 1, work)
        return b[order], b[order + 1]

    with workprec(work):
        x0 = _seed(j, prime)
        left_gap = x0 - _seed(j + 1, prime)
        right_gap = (_seed(j - 1, prime) - x0) if j > 1 else left_gap
        lo = mpf(x0 - left_gap / 2)
        hi = mpf(min(x0 + right_gap / 2, -0.1))
        flo, _ = f(lo)
        fhi, _ = f(hi)
        if flo * fhi > 0:
            raise NumericalFailure(f"no sign change around the seed for zero {j}")
        x = mpf(_refined_seed(j, prime))
        eps = mpmath.ldexp(1, -bits - 8)
        for _ in range(200):
            fx, dfx = f(x)
            if fx == 0:
                break
            if (fx > 0) == (flo > 0):
                lo, flo = x, fx
            else:
                hi = x
            step = fx / dfx if dfx != 0 else mpf("inf")
            if abs(step) <= eps * abs(x):
                x = x - step
                break
            xn = x - step
            if not (lo <= xn <= hi):
                xn = (lo + hi) / 2
            x = xn
        else:
            raise NumericalFailure(f"root iteration for zero {j} did not converge", partial=x)
    with workprec(bits):
        return +x


def ai_roots(count: int, prime: bool = False, prec: int | None = None) -> list[mpf]:
    return [ai_root(j, prime, prec) for j in range(1, count + 1)]
