"""Imaginary-axis integrals over products of generalized Airy factors.

All integrals here have the form

    (1/(2 pi i)) * integral_{theta - i inf}^{theta + i inf} K(s) ds,
    K(s) = c * exp(-mu s - mu^3/6) * prod Ai(k; -2^(1/3) s)^p / prod Ai(k; -2^(1/3) s)^q

and are described by an :class:`AiryKernelSpec`.  With ``s = theta + i t``
the integral equals ``(1/2pi) * int K(theta + i t) dt``.  When ``mu``,
``theta`` and ``c`` are real the integrand is conjugate-symmetric in
``t`` and only ``[0, T]`` is integrated.

Along the imaginary axis each Airy factor grows like ``exp(2/3 t^(3/2))``,
so the integrand decays like ``exp(-2/3 D t^(3/2))`` with ``D`` the net
power (denominator minus numerator).  ``T`` is taken from that rate and
rounded up to a multiple of :data:`PANEL`.  The trapezoidal nodes are the
multiples of ``STEP0 / 2**level``, so different kernels (other ``mu``, other
orders) hit the same abscissae and reuse cached Airy values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mpc, mpf

from .airy import ai_bundle, ai_root
from .scalar_core import NumericalFailure, workprec

__all__ = [
    "AiryKernelSpec",
    "NonDecayingSpec",
    "PANEL",
    "airy_table_I",
    "contour_integral",
    "elementary_critical",
    "phi_rd",
    "residue_sum",
    "tau_integral",
    "varphi",
]

PANEL = 2
STEP0 = 0.5
MAX_HALVINGS = 8
DEFAULT_TOL = mpf(10) ** -20


class NonDecayingSpec(ValueError):
    """The integrand does not decay along the imaginary axis."""


@dataclass(frozen=True)
class AiryKernelSpec:
    """Integrand description; factors are ``(order k, power p)`` pairs."""

    numer: tuple[tuple[int, int], ...] = ()
    denom: tuple[tuple[int, int], ...] = ()
    mu: object = 0
    prefactor: object = 1
    offset: object = 0
    name: str = field(default="", compare=False)

    @property
    def net_power(self) -> int:
        return sum(p for _, p in self.denom) - sum(p for _, p in self.numer)

    def orders(self) -> list[int]:
        return [k for k, _ in self.numer] + [k for k, _ in self.denom]

    def is_conjugate_symmetric(self) -> bool:
        return all(
            mpmath.im(mpmath.mpmathify(v)) == 0 for v in (self.mu, self.prefactor, self.offset)
        )


def _bundle_range(spec: AiryKernelSpec) -> tuple[int, int]:
    ks = spec.orders()
    if min(ks) >= 0:
        return 0, max(1, max(ks))
    return min(-10, min(ks)), max(1, max(ks))


def _truncation(spec: AiryKernelSpec, tol) -> float:
    d = spec.net_power
    mu = float(mpmath.re(spec.mu))
    theta = float(mpmath.re(spec.offset))
    log_c = math.log(abs(complex(spec.prefactor))) - mu**3 / 6 - mu * theta
    poly = sum(abs(k) * p for k, p in spec.numer + spec.denom) / 2 + d
    target = math.log(1 / float(tol)) + 12 + log_c
    T = 1.0
    for _ in range(100):
        T_new = (max(target + poly * math.log(max(T, 1.0)), 1.0) * 1.5 / d) ** (2 / 3)
        if abs(T_new - T) < 1e-3:
            break
        T = T_new
    return PANEL * math.ceil(max(T_new, 2.0) / PANEL)


def _integrand_factory(spec: AiryKernelSpec, bits: int):
    kmin, kmax = _bundle_range(spec)
    with workprec(bits):
        mu = mpmath.mpmathify(spec.mu)
        theta = mpmath.mpmathify(spec.offset)
        pref = mpmath.mpmathify(spec.prefactor)
        scale = -mpmath.cbrt(2)
        tilt0 = mu**3 / 6

    def f(t):
        s = mpc(theta, t)
        b = ai_bundle(scale * s, kmin, kmax, bits)
        v = pref * mpmath.exp(-mu * s - tilt0)
        for k, p in spec.numer:
            v *= b[k] ** p
        for k, p in spec.denom:
            v /= b[k] ** p
        return v

    return f


def contour_integral(spec: AiryKernelSpec, tol=DEFAULT_TOL, prec: int | None = None):
    """``(1/2 pi i)`` times the integral of the kernel along ``Re s = offset``.

    The integral over ``t`` (``s = offset + i t``) is computed with the
    trapezoidal rule on ``[-T, T]``, halving the step until two levels
    agree to ``tol``.  The integrand is analytic in a strip around the
    real ``t`` axis and decays like ``exp(-2/3 D t^(3/2))``, so the rule
    converges geometrically in ``1/h``.  Returns a real ``mpf`` for
    conjugate-symmetric kernels (symmetry is checked numerically at sample
    points) and an ``mpc`` otherwise.
    """
    tol = mpf(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not spec.denom and not spec.numer:
        raise NonDecayingSpec("spec has no Airy factor")
    if spec.net_power < 1:
        raise NonDecayingSpec(
            f"net Airy power {spec.net_power} < 1: integrand grows along the imaginary axis"
        )
    bits = _bits(tol, prec)
    f = _integrand_factory(spec, bits)
    T = _truncation(spec, tol)
    symmetric = spec.is_conjugate_symmetric()
    with workprec(bits):
        tail = abs(f(mpf(T)))
        if tail * 50 > tol:
            raise NumericalFailure(f"integrand still {mpmath.nstr(tail, 3)} at t = {T}", achieved=tail)
        if symmetric:
            for tt in (mpf("0.37"), mpf("1.9"), mpf(T) / 3):
                u, w = f(tt), f(-tt)
                if abs(u - mpmath.conj(w)) > tol * max(1, abs(u)):
                    raise NumericalFailure("integrand is not conjugate-symmetric", achieved=abs(u - w))

        def pair(t):
            # f(t) + f(-t), using the symmetry when it holds
            if symmetric:
                return 2 * mpmath.re(f(t))
            return f(t) + f(-t)

        h = mpf(STEP0)
        acc = mpmath.re(f(mpf(0))) if symmetric else f(mpf(0))
        jmax = int(T / STEP0)
        for j in range(1, jmax + 1):
            acc += pair(j * h)
        prev = h * acc
        for level in range(1, MAX_HALVINGS + 1):
            h = h / 2
            jmax = int(T / h)
            for j in range(1, jmax + 1, 2):
                acc += pair(j * h)
            cur = h * acc
            if abs(cur - prev) <= tol * 2 * mpmath.pi and level >= 2:
                return cur / (2 * mpmath.pi)
            prev = cur
        raise NumericalFailure(
            "trapezoidal rule did not converge on the imaginary axis",
            partial=cur / (2 * mpmath.pi),
            achieved=abs(cur - prev) / (2 * mpmath.pi),
        )


def _spec(numer=(), denom=(), mu=0, prefactor=1, offset=0, name=""):
    return AiryKernelSpec(tuple(numer), tuple(denom), mu, prefactor, offset, name)


def _bits(tol, prec) -> int:
    """Working precision of :func:`contour_integral` for ``tol`` and ``prec``."""
    return prec or max(64, int(-math.log2(float(tol))) + 24)


def tau_integral(numer, denom, mu=0, tol=DEFAULT_TOL, prec=None):
    """``(1/2 pi i) int F(tau) exp(2^(-1/3) mu tau - mu^3/6) d tau`` over ``i R``.

    ``F`` is the Airy product given by ``numer`` and ``denom``; the
    variable change ``tau = -2^(1/3) s`` maps it to :func:`contour_integral`.
    """
    v = contour_integral(_spec(numer, denom, mu), tol, prec)
    with workprec(_bits(tol, prec)):
        return mpmath.cbrt(2) * v


def varphi(mu, tol=DEFAULT_TOL, prec=None):
    """Critical-window limit of ``n^(1/3)`` times the acyclicity probability."""
    v = contour_integral(_spec(denom=[(0, 1)], mu=mu), tol, prec)
    with workprec(_bits(tol, prec)):
        return v / mpmath.cbrt(2)


def elementary_critical(mu, tol=DEFAULT_TOL, prec=None):
    """Critical-window limit of the probability of being elementary."""
    v = contour_integral(_spec(denom=[(1, 1)], mu=mu), tol, prec)
    with workprec(_bits(tol, prec)):
        return -v / mpmath.cbrt(4)


def phi_rd(r: int, d: int, mu, tol=DEFAULT_TOL, prec=None):
    """``phi_{r,d}(mu)`` for a kernel of excess ``r`` and deficiency ``d``."""
    if r < 1 or not (0 <= d <= 2 * r - 1):
        raise ValueError("need r >= 1 and 0 <= d <= 2r - 1")
    sign = -1 if (1 + 3 * r - d) % 2 else 1
    v = contour_integral(_spec(numer=[(1 - 3 * r + d, 1)], denom=[(1, 2)], mu=mu), tol, prec)
    with workprec(_bits(tol, prec)):
        return sign * v * mpmath.power(2, mpf(-2) / 3 - r + mpf(d) / 3)


def airy_table_I(n: int, mu, tol=DEFAULT_TOL, prec=None):
    """``I(n, mu) = (-1)^n/(2 pi i) int Ai(-n; tau)/Ai'(tau)^2 exp(2^(-1/3) mu tau - mu^3/6) d tau``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    v = contour_integral(_spec(numer=[(-n, 1)], denom=[(1, 2)], mu=mu), tol, prec)
    with workprec(_bits(tol, prec)):
        v = mpmath.cbrt(2) * v
        return -v if n % 2 else v


def residue_sum(kind: str, mu, terms: int = 30, prec: int | None = None):
    """Residue expansion of the critical integrals, valid for ``mu > 0``.

    Returns ``(value, tail_estimate)`` on the same scale as
    :func:`varphi` (``kind="acyclic"``) or :func:`elementary_critical`
    (``kind="elementary"``).  The tail estimate is the modulus of the
    last included term; it is an empirical indicator, not a bound.
    """
    if kind not in ("acyclic", "elementary"):
        raise ValueError("kind must be 'acyclic' or 'elementary'")
    mu = mpmath.mpmathify(mu)
    if mu <= 0:
        raise ValueError("the residue expansion is only used for mu > 0")
    bits = prec or 64
    with workprec(bits):
        c = mpmath.cbrt(2)
        out = []
        for k in range(1, terms + 1):
            if kind == "acyclic":
                a = ai_root(k, False, bits)
                out.append(mpmath.exp(mu * a / c) / ai_bundle(a, 1, 1, bits)[1])
            else:
                a = ai_root(k, True, bits)
                out.append(mpmath.exp(mu * a / c) / (a * ai_bundle(a, 0, 0, bits)[0]))
        tilt = mpmath.exp(-mu**3 / 6)
        if kind == "acyclic":
            scale = tilt / mpmath.cbrt(4)
        else:
            scale = -tilt / 2
        return scale * mpmath.fsum(out), abs(scale * out[-1])
