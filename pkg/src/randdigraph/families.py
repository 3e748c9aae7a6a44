"""Graphic generating functions of digraph families and exact probabilities.

Three random models are covered:

``MD``
    multidigraphs, every ordered pair (loops included) carries a
    Poisson(p) number of arcs; ``w = p`` and
    ``P = exp(-n^2 p / 2) n! [z^n] H(z, w)``.
``D2``
    simple digraphs, each of the ``n(n-1)`` arcs present with probability
    ``p`` (2-cycles allowed); ``w = p/(1-p)`` and
    ``P = (1-p)^(n(n-1)/2) n! [z^n] H(z, w)``.
``SD``
    strict digraphs, each unordered pair is empty with probability
    ``1-2p`` and carries one of its two arcs with probability ``p`` each;
    ``w = p/(1-2p)`` and the same prefactor as ``D2``.

``H`` is a ratio of deformed exponentials, each built as the exponential
Hadamard product of ``(1 - w z)^r exp(-z) F(w z)`` with the ``Set`` series
of the model (``exp(-n^2 w/2)`` or ``(1+w)^(-n(n-1)/2)`` weights).

Family by family (``F_1 = e^x`` for D2, ``F_2 = e^(x + x^2/2)`` for SD):

* acyclic: ``1/phi_0``;
* elementary: ``1/phi_1`` (MD) or ``1/phi~_1(F_a)``;
* one complex component with a given kernel (MD):
  ``w^r/(2r-d)! * phi_(1-3r+d)(x^(2r-d)) / phi_1^2``;
* one complex component of excess r (D2/SD):
  ``w^r phi~_(1-3r)(A_r F_a) / phi~_1(F_a)^2``;
* one bicyclic component: ``w phi_(-2)(A_1) / phi_1^2`` with the excess-one
  polynomial ``A_1`` of the model (``x/2`` for multidigraphs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .deformed_exp import EntireFnSpec
from .scalar_core import (
    DomainError,
    StableResult,
    default_precision,
    stable_evaluate,
    workprec,
)
from .series import RING_RATIONAL, RING_REAL, TruncatedSeries, hadamard_exp
from .strong_counts import a_r_polynomial

__all__ = [
    "FamilySpec",
    "ModelKind",
    "WindowP",
    "family_ggf",
    "probability_exact",
    "probability_exact_certified",
    "probability_series_in_p",
    "w_of_p",
]


class ModelKind:
    MD = "MD"
    D2 = "D2"
    SD = "SD"
    ALL = ("MD", "D2", "SD")

    @classmethod
    def parse(cls, tag: str) -> str:
        t = tag.upper()
        if t not in cls.ALL:
            raise ValueError(f"model must be one of {cls.ALL}, got {tag!r}")
        return t


@dataclass(frozen=True)
class FamilySpec:
    """``tag`` is ``acyclic``, ``elementary``, ``kernel``, ``excess`` or ``bicyclic``."""

    tag: str
    r: int = 0
    d: int = 0

    def __post_init__(self):
        if self.tag not in ("acyclic", "elementary", "kernel", "excess", "bicyclic"):
            raise ValueError(f"unknown family {self.tag!r}")
        if self.tag == "kernel":
            if self.r < 1 or not 0 <= self.d <= 2 * self.r - 1:
                raise ValueError("kernel family needs r >= 1 and 0 <= d <= 2r - 1")
        if self.tag == "excess" and self.r < 1:
            raise ValueError("excess family needs r >= 1")

    @classmethod
    def acyclic(cls) -> "FamilySpec":
        return cls("acyclic")

    @classmethod
    def elementary(cls) -> "FamilySpec":
        return cls("elementary")

    @classmethod
    def one_complex_kernel(cls, r: int, d: int) -> "FamilySpec":
        return cls("kernel", r, d)

    @classmethod
    def one_complex_excess(cls, r: int) -> "FamilySpec":
        return cls("excess", r)

    @classmethod
    def bicyclic(cls) -> "FamilySpec":
        return cls("bicyclic")

    @classmethod
    def parse(cls, text: str, r: int | None = None, d: int | None = None) -> "FamilySpec":
        t = text.lower().replace("-", "_")
        if t in ("acyclic", "elementary", "bicyclic"):
            return cls(t)
        if t in ("kernel", "one_complex_kernel"):
            return cls("kernel", r or 1, d or 0)
        if t in ("excess", "one_complex_excess"):
            return cls("excess", r or 1)
        raise ValueError(f"unknown family {text!r}")

    def check_model(self, model: str) -> None:
        if self.tag == "kernel" and model != ModelKind.MD:
            raise ValueError("the per-kernel family is defined for the MD model only")
        if self.tag == "excess" and model == ModelKind.MD:
            raise ValueError("the excess family is defined for the D2 and SD models only")

    def __str__(self) -> str:
        if self.tag == "kernel":
            return f"kernel(r={self.r},d={self.d})"
        if self.tag == "excess":
            return f"excess(r={self.r})"
        return self.tag


def _exact(x):
    """Convert user input to Fraction when it is exact, else to mpf."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return mpf(x)
    return x


def w_of_p(model: str, p):
    """Edge weight ``w`` of the generating functions for the model."""
    model = ModelKind.parse(model)
    p = _exact(p)
    if p < 0:
        raise DomainError("p must be non-negative")
    if model == ModelKind.MD:
        return p
    a = 1 if model == ModelKind.D2 else 2
    if a * p >= 1:
        raise DomainError(f"p must be below 1/{a} for the {model} model")
    return p / (1 - a * p)


def _ca(model: str) -> int:
    return 1 if model == ModelKind.D2 else 2


def _to_ring(x, ring: str):
    if ring == RING_RATIONAL:
        return Fraction(x)
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def _phi_series(r: int, F: EntireFnSpec, model: str, w, order: int, ring: str, prec) -> TruncatedSeries:
    """``(1 - w z)^r exp(-z) F(w z)`` Hadamard ``Set`` as a truncated series."""
    kw = {} if ring == RING_RATIONAL else {"prec": prec}
    with workprec(prec or 64):
        wr = _to_ring(w, ring)
        # negate here: mpf negation rounds to the ambient precision
        neg_wr = -wr
    inner = TruncatedSeries.exp_z(order, -1, ring, **kw)
    fser = TruncatedSeries(F.taylor(order), RING_RATIONAL)
    if ring != RING_RATIONAL:
        fser = TruncatedSeries(fser.coeffs, ring, prec)
    inner = inner * fser.scale_arg(wr)
    lin = TruncatedSeries([1, neg_wr] + [0] * (order - 1), ring, **kw) if order >= 1 else None
    if lin is not None:
        for _ in range(abs(r)):
            inner = inner * lin if r > 0 else inner / lin
    inner = inner.truncate(order)
    return hadamard_exp(inner, _set_series(model, wr, order, ring, prec))


def _set_series(model: str, w, order: int, ring: str, prec) -> TruncatedSeries:
    if model == ModelKind.MD:
        if ring == RING_RATIONAL:
            raise DomainError("the MD weights exp(-n^2 w/2) are not rational")
        with workprec(prec):
            step = mpmath.exp(-w / 2)
            q = mpmath.exp(-w)
            out, val, fact = [], mpf(1), mpf(1)
            for n in range(order + 1):
                if n:
                    fact *= n
                out.append(val / fact)
                val *= step
                step *= q
        return TruncatedSeries._raw(out, ring, prec)
    if ring == RING_RATIONAL:
        inv = 1 / (1 + w)
        out, val = [], Fraction(1)
        for n in range(order + 1):
            out.append(val / math.factorial(n))
            val *= inv**n
        return TruncatedSeries._raw(out, ring, None)
    with workprec(prec):
        inv = 1 / (1 + w)
        out, val, step, fact = [], mpf(1), mpf(1), mpf(1)
        for n in range(order + 1):
            if n:
                fact *= n
            out.append(val / fact)
            val *= step
            step *= inv
    return TruncatedSeries._raw(out, ring, prec)


def _excess_F(r: int, model: str) -> EntireFnSpec:
    variant = {"MD": "multi", "D2": "simple", "SD": "strict"}[model]
    poly = a_r_polynomial(r, variant).coeffs
    return EntireFnSpec.poly_times_exp(poly, 0 if model == ModelKind.MD else _ca(model))


def family_ggf(family: FamilySpec, model: str, w, order: int, ring: str | None = None, prec: int | None = None):
    """``H(z, w)`` of the family to ``z^order``.

    ``ring`` defaults to exact rationals when ``w`` is a ``Fraction`` and
    the model is D2/SD, and to ``hp_real`` otherwise.
    """
    model = ModelKind.parse(model)
    family.check_model(model)
    if order < 0:
        raise ValueError("order must be non-negative")
    w = _exact(w)
    if ring is None:
        ring = RING_RATIONAL if isinstance(w, Fraction) and model != ModelKind.MD else RING_REAL
    prec = None if ring == RING_RATIONAL else (prec or default_precision())
    one = EntireFnSpec.one()
    if model == ModelKind.MD:
        f_elem = one
    else:
        f_elem = EntireFnSpec.exp_ck(_ca(model))

    def phi(r, F):
        return _phi_series(r, F, model, w, order, ring, prec)

    if family.tag == "acyclic":
        return phi(0, one).reciprocal()
    if family.tag == "elementary":
        return phi(1, f_elem).reciprocal()
    den = phi(1, f_elem)
    den = den * den
    if family.tag == "kernel":
        r, d = family.r, family.d
        num = phi(1 - 3 * r + d, EntireFnSpec.monomial(2 * r - d))
        scale = Fraction(1, math.factorial(2 * r - d))
    else:
        r = 1 if family.tag == "bicyclic" else family.r
        num = phi(1 - 3 * r, _excess_F(r, model))
        scale = Fraction(1)
    with workprec(prec or 64):
        factor = _to_ring(w, ring) ** r * _to_ring(scale, ring)
    return (num / den) * factor


def _log_prefactor(model: str, n: int, p):
    """``log`` of ``exp(-n^2 p/2) n!`` or ``(1-p)^(n(n-1)/2) n!``."""
    lf = mpmath.loggamma(n + 1)
    if model == ModelKind.MD:
        return -mpf(n) ** 2 * p / 2 + lf
    return (n * (n - 1) // 2) * mpmath.log1p(-p) + lf


@dataclass(frozen=True)
class WindowP:
    """``p = (1 + mu n^(-1/3)) / n``, recomputed at whatever precision is asked for."""

    n: int
    mu: Fraction

    def __call__(self, bits: int) -> mpf:
        with workprec(bits):
            return (1 + mpf(self.mu.numerator) / self.mu.denominator / mpmath.cbrt(self.n)) / self.n

    @property
    def lam(self) -> float:
        return 1 + float(self.mu) / self.n ** (1 / 3)


def _resolve_p(p, bits: int):
    if isinstance(p, WindowP):
        return p(bits)
    return _exact(p)


def _prob_at(family: FamilySpec, model: str, n: int, p, bits: int):
    p = _resolve_p(p, bits)
    with workprec(bits):
        w = w_of_p(model, p)
        pv = _to_ring(p, RING_REAL)
        wv = _to_ring(w, RING_REAL)
    h = family_ggf(family, model, wv, n, RING_REAL, bits)
    with workprec(bits):
        coeff = h.coeffs[n]
        if coeff == 0:
            return mpf(0)
        return mpmath.exp(_log_prefactor(model, n, pv)) * coeff


def _start_bits(n: int, digits: int) -> int:
    # the reciprocal recurrence loses about 0.46 n bits near the critical point
    return max(default_precision(), int(0.5 * n) + int(digits * 3.33) + 64)


def probability_exact_certified(family: FamilySpec, model: str, n: int, p, digits: int = 10) -> StableResult:
    """Probability that the random digraph lies in the family, certified by precision growth."""
    model = ModelKind.parse(model)
    family.check_model(model)
    if n < 1:
        raise ValueError("n must be positive")
    w_of_p(model, _resolve_p(p, 64))  # range check
    return stable_evaluate(lambda b: _prob_at(family, model, n, p, b), digits, _start_bits(n, digits))


def probability_exact(family: FamilySpec, model: str, n: int, p, digits: int = 10) -> mpf:
    """Value of :func:`probability_exact_certified`."""
    return probability_exact_certified(family, model, n, p, digits).value


def _prob_rational(family: FamilySpec, model: str, n: int, p: Fraction) -> Fraction:
    w = w_of_p(model, p)
    h = family_ggf(family, model, w, n, RING_RATIONAL)
    return (1 - p) ** (n * (n - 1) // 2) * math.factorial(n) * h.coeffs[n]


def probability_series_in_p(family: FamilySpec, model: str, n: int) -> list[Fraction]:
    """Exact probability as a polynomial in ``p`` (coefficient list, low degree first).

    The probability is a polynomial of degree at most ``n(n-1)`` with
    rational coefficients; it is recovered by exact Newton interpolation
    through ``n(n-1) + 1`` rational sample points ``p = 1/(k+3)``.
    """
    model = ModelKind.parse(model)
    if model == ModelKind.MD:
        raise ValueError("MD probabilities are not polynomial in p")
    family.check_model(model)
    if not 1 <= n <= 8:
        raise ValueError("n must be between 1 and 8")
    deg = n * (n - 1)
    xs = [Fraction(1, k + 3) for k in range(deg + 1)]
    ys = [_prob_rational(family, model, n, x) for x in xs]
    # divided differences
    coef = list(ys)
    for j in range(1, deg + 1):
        for i in range(deg, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * (deg + 1)
    for i in range(deg, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        new = [Fraction(0)] * (deg + 1)
        for k, c in enumerate(poly):
            if c:
                if k + 1 <= deg:
                    new[k + 1] += c
                new[k] -= c * xs[i]
        new[0] += coef[i]
        poly = new
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly
