"""Exact counting series for strongly connected digraphs.

Everything here is exact rational arithmetic on :class:`BivariateSeries`
(coefficient of ``z^n w^m``, ordinary in both variables, with ``1/n!``
folded into the coefficient).

Strong components are peeled off with the exponential Hadamard product:

* multidigraphs: ``Strong = -log(MG (.) 1/MG)`` with
  ``MG(z, w) = sum_n exp(n^2 w / 2) z^n / n!``;
* digraphs with 2-cycles: ``Strong = -log(G (.) 1/G)`` with
  ``G(z, w) = sum_n (1 + w)^(n(n-1)/2) z^n / n!``;
* strict digraphs: ``Strong = -log(G (.) 1/H)`` with
  ``H(z, w) = sum_n ((1 + 2w)/(1 + w))^(n(n-1)/2) z^n / n!``.

The excess-``r`` part of ``Strong`` has the shape
``w^r A_r(w z) / (1 - w z)^(3r)``.  Reading the coefficients with
``m = n + r`` (the substitution ``z -> z/y, w -> y``) gives
``A_r(z) (1 - z)^(-3r)``; multiplying back by ``(1 - z)^(3r)`` and
truncating at the known degree bound yields the polynomial ``A_r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .series import BivariateSeries, TruncatedSeries

__all__ = [
    "ExcessPolynomial",
    "VARIANTS",
    "a_r_polynomial",
    "e_r",
    "s_r",
    "s_rd_bivariate",
    "s_rd_egf",
    "strong_egf",
]

VARIANTS = ("multi", "simple", "strict")
_DEGREE_FACTOR = {"multi": 2, "simple": 5, "strict": 8}


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _binom_series(power: int, nw: int, scale: int = 1) -> list[Fraction]:
    """Coefficients of ``(1 + scale*w)^power`` up to ``w^nw`` (any integer power)."""
    out = []
    c = Fraction(1)
    for m in range(nw + 1):
        out.append(c * scale**m)
        c = c * (power - m) / (m + 1)
    return out


def _mg(nz: int, nw: int) -> BivariateSeries:
    rows = []
    for n in range(nz + 1):
        a = Fraction(n * n, 2)
        inv_nf = Fraction(1, math.factorial(n))
        row, t = [], Fraction(1)
        for m in range(nw + 1):
            row.append(t * inv_nf)
            t = t * a / (m + 1)
        rows.append(row)
    return BivariateSeries(rows, nz, nw)


def _g(nz: int, nw: int) -> BivariateSeries:
    rows = []
    for n in range(nz + 1):
        inv_nf = Fraction(1, math.factorial(n))
        rows.append([c * inv_nf for c in _binom_series(n * (n - 1) // 2, nw)])
    return BivariateSeries(rows, nz, nw)


def _h_strict(nz: int, nw: int) -> BivariateSeries:
    rows = []
    for n in range(nz + 1):
        k = n * (n - 1) // 2
        num = _binom_series(k, nw, 2)
        den = _binom_series(-k, nw, 1)
        prod = [sum((num[i] * den[m - i] for i in range(m + 1)), Fraction(0)) for m in range(nw + 1)]
        inv_nf = Fraction(1, math.factorial(n))
        rows.append([c * inv_nf for c in prod])
    return BivariateSeries(rows, nz, nw)


@lru_cache(maxsize=32)
def strong_egf(variant: str, nz: int, nw: int) -> BivariateSeries:
    """EGF of strongly connected (multi/simple/strict) digraphs to order ``(nz, nw)``."""
    _check_variant(variant)
    if nz < 0 or nw < 0:
        raise ValueError("orders must be non-negative")
    if variant == "multi":
        a = _mg(nz, nw)
        b = a.reciprocal()
    elif variant == "simple":
        a = _g(nz, nw)
        b = a.reciprocal()
    else:
        a = _g(nz, nw)
        b = _h_strict(nz, nw).reciprocal()
    return -(a.hadamard_z(b).log())


@dataclass(frozen=True)
class ExcessPolynomial:
    """``A_r`` for one variant; ``coeffs[i]`` is the coefficient of ``z^i``."""

    r: int
    variant: str
    coeffs: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def value(self, x) -> Fraction:
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def as_series(self) -> TruncatedSeries:
        return TruncatedSeries(list(self.coeffs))


@lru_cache(maxsize=64)
def a_r_polynomial(r: int, variant: str = "multi") -> ExcessPolynomial:
    """``A_r(z) = (1 - z)^(3r) [y^r] Strong(z/y, y)`` truncated at degree 2r, 5r or 8r."""
    _check_variant(variant)
    if r < 1:
        raise ValueError("r must be at least 1")
    if r > 5:
        raise ValueError("r > 5 is outside the supported range")
    deg = _DEGREE_FACTOR[variant] * r
    strong = strong_egf(variant, deg, deg + r)
    series = [strong.coeff_extract(n, n + r) for n in range(deg + 1)]
    factor = _binom_series(3 * r, deg, -1)
    coeffs = [sum((factor[i] * series[n - i] for i in range(n + 1)), Fraction(0)) for n in range(deg + 1)]
    return ExcessPolynomial(r, variant, tuple(coeffs))


@lru_cache(maxsize=16)
def s_r(r: int) -> Fraction:
    """``s_r = -[z^(2r) w^(3r)] (1 - w z)^(3r-1) log(MG (.) 1/MG)``."""
    if r < 1:
        raise ValueError("r must be at least 1")
    strong = strong_egf("multi", 2 * r, 3 * r)
    total = Fraction(0)
    for j in range(2 * r + 1):
        total += math.comb(3 * r - 1, j) * (-1) ** j * strong.coeff_extract(2 * r - j, 3 * r - j)
    return total


def e_r(r: int) -> Fraction:
    """``(6r)! / (2^(5r) 3^(2r) (2r)! (3r)!)``."""
    if r < 1:
        raise ValueError("r must be at least 1")
    num = math.factorial(6 * r)
    den = 2 ** (5 * r) * 3 ** (2 * r) * math.factorial(2 * r) * math.factorial(3 * r)
    return Fraction(num, den)


def _check_rd(r: int, d: int) -> None:
    if r < 1:
        raise ValueError("r must be at least 1")
    if not 0 <= d <= 2 * r - 1:
        raise ValueError("d must satisfy 0 <= d <= 2r - 1")


def s_rd_egf(r: int, d: int, order: int) -> TruncatedSeries:
    """``S_{r,d}(z, w)`` with ``w`` implicit: ``[z^n]`` carries ``w^(n+r)``.

    ``S_{r,d} = (1/(3r-d)!) w^r (1 - w z)^(-(3r-d)) (w z)^(2r-d) / (2r-d)!``,
    so ``[z^n w^(n+r)] = binom(3r-d-1+j, j) / ((3r-d)! (2r-d)!)`` with
    ``n = 2r - d + j``.
    """
    _check_rd(r, d)
    lead = 2 * r - d
    e = 3 * r - d
    norm = Fraction(1, math.factorial(e) * math.factorial(lead))
    coeffs = []
    for n in range(order + 1):
        j = n - lead
        coeffs.append(norm * math.comb(e - 1 + j, j) if j >= 0 else Fraction(0))
    return TruncatedSeries(coeffs)


def s_rd_bivariate(r: int, d: int, nz: int, nw: int) -> BivariateSeries:
    """``S_{r,d}`` as an explicit bivariate series."""
    uni = s_rd_egf(r, d, nz)
    rows = [[Fraction(0)] * (nw + 1) for _ in range(nz + 1)]
    for n in range(nz + 1):
        if n + r <= nw:
            rows[n][n + r] = uni.coeffs[n]
    return BivariateSeries(rows, nz, nw)
