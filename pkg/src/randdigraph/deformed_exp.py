"""Generalized deformed exponentials, their real roots and uniform approximations.

For an entire function ``F`` and an integer ``r`` let

    g(u) = (1 - w u)^r exp(-u) F(w u) = sum_n g_n u^n.

The two families evaluated here are

    phi_r(z, w; F)       = sum_n g_n exp(-n^2 w / 2) z^n          (multigraphic)
    phi~_r(z, w; F)      = sum_n g_n (1 + w)^(-n(n-1)/2) z^n      (simple graphic)

i.e. exponential Hadamard products of ``g`` with the two ``Set`` series.
The weights decay superexponentially, so both sums converge for every
complex ``z``.  Near ``z = 1/(e w)`` the terms grow to ``exp(O(1/w))``
while the sum is ``exp(-1/(2w))`` small: the working precision has to
cover that cancellation, and :func:`phi_eval` chooses it adaptively.

Only ``F`` of the form ``P(x) exp(C_k(x))`` with a polynomial ``P`` and
``C_k(x) = x + x^2/2 + ... + x^k/k`` is supported.  That class contains
every ``F`` used for random digraphs and is closed under ``F -> xF`` and
``F -> F'``, which the derivative identity needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mpc, mpf

from .airy import ai_general, ai_root
from .scalar_core import DomainError, NumericalFailure, default_precision, workprec
from .series import tree_eval

__all__ = [
    "EntireFnSpec",
    "GGFKind",
    "MULTIGRAPHIC",
    "ONE",
    "SIMPLE",
    "dphi_at_root",
    "find_root",
    "phi_eval",
    "root_asymptotic",
    "uniform_approx",
]


def _real(x) -> mpf:
    """``mpf`` from a number, string or ``Fraction`` at the current precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


class GGFKind:
    """Tag for the weighting of the Hadamard product."""

    MULTIGRAPHIC = "multigraphic"
    SIMPLE = "simple_graphic"

    @classmethod
    def parse(cls, tag: str) -> str:
        t = tag.lower()
        if t in ("multigraphic", "multi", "md"):
            return cls.MULTIGRAPHIC
        if t in ("simple_graphic", "simple", "graphic"):
            return cls.SIMPLE
        raise ValueError(f"unknown GGF kind {tag!r}")


MULTIGRAPHIC = GGFKind.MULTIGRAPHIC
SIMPLE = GGFKind.SIMPLE


def _trim(poly: Sequence) -> tuple[Fraction, ...]:
    p = [Fraction(c) for c in poly]
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p) if p else (Fraction(0),)


@dataclass(frozen=True)
class EntireFnSpec:
    """``F(x) = P(x) * exp(C_k(x))`` with exact rational polynomial ``P``.

    ``k = 0`` means no exponential factor.  Use the constructors
    :meth:`one`, :meth:`monomial`, :meth:`exp_ck` and
    :meth:`poly_times_exp` rather than building instances by hand.
    """

    poly: tuple[Fraction, ...]
    ck: int = 0

    def __post_init__(self):
        if self.ck < 0:
            raise ValueError("C_k order must be non-negative")
        object.__setattr__(self, "poly", _trim(self.poly))

    @classmethod
    def one(cls) -> "EntireFnSpec":
        return cls((Fraction(1),), 0)

    @classmethod
    def monomial(cls, k: int) -> "EntireFnSpec":
        if k < 0:
            raise ValueError("monomial degree must be non-negative")
        return cls(tuple([Fraction(0)] * k + [Fraction(1)]), 0)

    @classmethod
    def exp_ck(cls, k: int) -> "EntireFnSpec":
        return cls((Fraction(1),), k)

    @classmethod
    def poly_times_exp(cls, coeffs: Sequence, k: int = 0) -> "EntireFnSpec":
        return cls(tuple(Fraction(c) for c in coeffs), k)

    @property
    def kind(self) -> str:
        nz = [i for i, c in enumerate(self.poly) if c != 0]
        if len(nz) == 1 and self.poly[nz[0]] == 1:
            if self.ck == 0:
                return "one" if nz[0] == 0 else f"monomial({nz[0]})"
            if nz[0] == 0:
                return f"exp_C{self.ck}"
        return "poly_times_exp"

    @property
    def nonvanishing(self) -> bool:
        """True when ``F`` has no zero in ``C \\ {0}`` (``P`` is a monomial)."""
        return sum(1 for c in self.poly if c != 0) == 1

    def _ck_coeffs(self) -> list[Fraction]:
        return [Fraction(0)] + [Fraction(1, j) for j in range(1, self.ck + 1)]

    def eval(self, x):
        """``F(x)`` for a number (mpmath or Python) or a ``Fraction``."""
        if isinstance(x, Fraction):
            if self.ck:
                raise TypeError("exp factor has no rational value")
            return sum((c * x**i for i, c in enumerate(self.poly)), Fraction(0))
        x = mpmath.mpmathify(x)
        p = mpmath.polyval([mpf(c.numerator) / c.denominator for c in reversed(self.poly)], x)
        if self.ck:
            p *= mpmath.exp(sum(x**j / j for j in range(1, self.ck + 1)))
        return p

    def taylor(self, order: int) -> list[Fraction]:
        """Exact Maclaurin coefficients of ``F`` up to ``x^order``."""
        e = [Fraction(1)]
        c = self._ck_coeffs()
        for n in range(1, order + 1):
            s = sum((j * c[j] * e[n - j] for j in range(1, min(self.ck, n) + 1)), Fraction(0))
            e.append(s / n)
        out = [Fraction(0)] * (order + 1)
        for i, pc in enumerate(self.poly):
            if pc:
                for n in range(i, order + 1):
                    out[n] += pc * e[n - i]
        return out

    def times_x(self) -> "EntireFnSpec":
        return EntireFnSpec((Fraction(0),) + self.poly, self.ck)

    def derivative(self) -> "EntireFnSpec":
        """``F'`` = ``(P' + P C_k') exp(C_k)`` with ``C_k' = 1 + x + ... + x^(k-1)``."""
        dp = [c * i for i, c in enumerate(self.poly)][1:] or [Fraction(0)]
        out = [Fraction(0)] * (len(self.poly) + max(self.ck - 1, 0))
        for i, c in enumerate(dp):
            out[i] += c
        for i, c in enumerate(self.poly):
            for j in range(self.ck):
                out[i + j] += c
        return EntireFnSpec(tuple(out), self.ck)

    def value_and_log_derivative_at_one(self) -> tuple[mpf, mpf]:
        """``(F(1), F'(1)/F(1))``."""
        f1 = self.eval(1)
        if f1 == 0:
            raise DomainError("F(1) = 0: the root asymptotics need F(1) != 0")
        return f1, self.derivative().eval(1) / f1

    def describe(self) -> str:
        terms = " + ".join(f"({c})x^{i}" for i, c in enumerate(self.poly) if c)
        return terms + (f" * exp(C_{self.ck}(x))" if self.ck else "")


ONE = EntireFnSpec.one()


# ---------------------------------------------------------------------------
# Coefficients and fixed-precision summation
# ---------------------------------------------------------------------------


class _Coefficients:
    """Lazily extended list ``c_n = g_n * weight_n`` at one precision."""

    def __init__(self, w, inner_w, r: int, F: EntireFnSpec, kind: str, bits: int):
        self.bits = bits
        self.r = r
        self.kind = kind
        with workprec(bits):
            self.w = _real(w)
            wi = _real(inner_w)
            self.wi = wi
            # log-derivative coefficients of exp(-u + C_k(w u))
            lc = [mpf(0)] * (max(F.ck, 1) + 1)
            lc[1] = mpf(-1)
            for j in range(1, F.ck + 1):
                lc[j] += wi**j / j
            self.lc = [(j, j * lc[j]) for j in range(1, len(lc)) if lc[j] != 0]
            self.poly = [(i, mpf(c.numerator) / c.denominator * wi**i) for i, c in enumerate(F.poly) if c]
            if kind == MULTIGRAPHIC:
                self.q = mpmath.exp(-self.w)
                self.ratio = mpmath.exp(-self.w / 2)
            else:
                self.q = 1 / (1 + self.w)
                self.ratio = mpf(1)
        self.e: list = []
        self.stages: list = [mpf(0)] * abs(r)
        self.c: list = []
        self.weight = None

    def extend(self, upto: int) -> None:
        with workprec(self.bits):
            for n in range(len(self.c), upto + 1):
                if n == 0:
                    self.e.append(mpf(1))
                else:
                    s = mpf(0)
                    for j, v in self.lc:
                        if j > n:
                            break
                        s += v * self.e[n - j]
                    self.e.append(s / n)
                s = mpf(0)
                for i, v in self.poly:
                    if i > n:
                        break
                    s += v * self.e[n - i]
                # multiply (r > 0) or divide (r < 0) by (1 - w u), one factor per stage;
                # a stage keeps its last input (r > 0) or its last output (r < 0)
                for i, last in enumerate(self.stages):
                    if self.r > 0:
                        self.stages[i], s = s, s - self.wi * last
                    else:
                        s = s + self.wi * last
                        self.stages[i] = s
                if n == 0:
                    self.weight = mpf(1)
                    self.step = self.ratio
                else:
                    self.weight *= self.step
                    self.step *= self.q
                self.c.append(s * self.weight)


_CACHE: dict = {}


def _exact_key(x):
    """Hashable key that identifies ``x`` exactly (no decimal rounding)."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    return mpmath.mpmathify(x)._mpf_


def _coefficients(w, inner_w, r, F, kind, bits) -> _Coefficients:
    key = (_exact_key(w), _exact_key(inner_w), r, F, kind, bits)
    c = _CACHE.get(key)
    if c is None:
        if len(_CACHE) > 64:
            _CACHE.clear()
        c = _Coefficients(w, inner_w, r, F, kind, bits)
        _CACHE[key] = c
    return c


def _decay_start(z_abs: float, w: float, kind: str, deriv: int) -> int:
    """Index after which successive term ratios stay below 1/2.

    Heuristic bound: ``|g_(n+1)/g_n| <= (2 + 2w)/(n+1)`` and the weight
    ratio is ``exp(-w(n + 1/2))`` (multigraphic) or ``(1+w)^(-n)``.
    """
    rho = 2 + 2 * w
    lq = w if kind == MULTIGRAPHIC else math.log1p(w)
    n = 0
    while True:
        lr = math.log(max(z_abs, 1e-300)) + math.log(rho) - lq * (n + 0.5) - math.log(n + 1)
        lr += deriv * math.log((n + 2) / (n + 1 - deriv)) if n + 1 > deriv else 0
        if lr < -math.log(2):
            return n
        n += 1
        if n > 10**7:
            raise NumericalFailure("no decay of the deformed exponential terms")


@dataclass
class _Sum:
    value: object
    log2_max_term: float
    terms: int


def _phi_fixed(z, w, r, F, kind, bits, deriv=0, inner_w=None, max_terms=400000) -> _Sum:
    """Sum the series at a fixed working precision."""
    coeffs = _coefficients(w, w if inner_w is None else inner_w, r, F, kind, bits + 32)
    with workprec(bits + 32):
        z = mpmath.mpmathify(z)
        n0 = _decay_start(float(abs(z)), float(w), kind, deriv)
        mag = mpmath.mag
        acc = mpf(0) if not isinstance(z, mpc) else mpc(0)
        zp = mpf(1)
        max_mag = -(1 << 62)
        quiet = 0
        n = deriv
        c = coeffs.c
        while True:
            if n >= len(c):
                coeffs.extend(max(2 * n, n + 64))
            ff = 1
            for i in range(deriv):
                ff *= n - i
            t = c[n] * zp
            if ff != 1:
                t *= ff
            acc += t
            mt = mag(t) if t else -(1 << 62)
            if mt > max_mag:
                max_mag = mt
            # |t| below 2^-(bits+4) times max(|acc|, rounding level of the sum)
            floor = max(mag(acc) if acc else -(1 << 62), max_mag - bits)
            if n >= n0 and (not t or mt <= floor - bits - 4):
                quiet += 1
                if quiet >= 8:
                    break
            else:
                quiet = 0
            zp *= z
            n += 1
            if n > max_terms:
                raise NumericalFailure("deformed exponential series did not converge", partial=acc)
        l2 = float(max_mag) if max_mag > -(1 << 62) else -math.inf
    return _Sum(acc, l2, n)


def _log2_abs(v) -> float:
    return float(mpmath.log(abs(v), 2)) if v != 0 else -math.inf


def phi_eval(
    z,
    w,
    r: int = 0,
    F: EntireFnSpec = ONE,
    kind: str = MULTIGRAPHIC,
    *,
    deriv: int = 0,
    digits: int = 20,
    inner_w=None,
    max_bits: int = 1 << 18,
):
    """``d^deriv/dz^deriv`` of ``phi_r`` (or ``phi~_r``) at ``z``, to ``digits`` digits.

    The series is summed at increasing precision.  Each pass measures the
    largest term ``M`` and the size of the result ``v``; the next pass
    uses ``digits`` plus the cancellation ``log2(M/|v|)`` plus a guard.  The
    value is returned once two passes agree to ``digits`` significant
    digits.  ``inner_w`` replaces ``w`` inside ``g`` only (used to check
    the identity between the two weightings).

    Truncation: a pass stops when, beyond the index where term ratios are
    guaranteed to be below 1/2, eight consecutive terms are below
    ``2^-bits`` times the partial sum.
    """
    kind = GGFKind.parse(kind)
    with workprec(64):
        if _real(w) <= 0:
            raise DomainError("w must be positive")
    target = int(digits * 3.33) + 8
    bits = max(64, target + 16)
    prev = None
    while True:
        s = _phi_fixed(z, w, r, F, kind, bits, deriv, inner_w)
        v = s.value
        if prev is not None and _agree(prev, v, digits):
            with workprec(target):
                return +v
        needed = target + max(0.0, s.log2_max_term - _log2_abs(v) if v != 0 else bits) + 24
        new_bits = int(max(needed, bits * 1.25 if prev is not None else needed))
        if new_bits > max_bits:
            raise NumericalFailure(f"phi_eval needs more than {max_bits} bits", partial=v)
        prev, bits = v, max(new_bits, bits + 16)


def _agree(u, v, digits: int) -> bool:
    if u == v:
        return True
    scale = max(abs(u), abs(v))
    return abs(u - v) <= scale * mpf(10) ** (-digits)


# ---------------------------------------------------------------------------
# Roots
# ---------------------------------------------------------------------------


def root_asymptotic(j: int, w, r01: int = 0, F: EntireFnSpec = ONE, prec: int | None = None) -> mpf:
    """Three-term asymptotic location of the j-th real root.

    ``r01 = 0``: ``(1/(e w)) (1 - a_j 2^(-1/3) w^(2/3) - w (1/6 - F'(1)/F(1)))``.
    ``r01 = 1``: ``(1/(e w)) (1 - a'_j 2^(-1/3) w^(2/3) + w (1/6 + F'(1)/F(1)))``.
    The same expressions are used for both weightings.
    """
    if r01 not in (0, 1):
        raise ValueError("r01 must be 0 or 1")
    bits = prec or default_precision()
    with workprec(bits):
        w = _real(w)
        _, ld = F.value_and_log_derivative_at_one()
        a = ai_root(j, r01 == 1, bits)
        c = mpmath.cbrt(2)
        if r01 == 0:
            inner = 1 - a / c * w ** (mpf(2) / 3) - w * (mpf(1) / 6 - ld)
        else:
            inner = 1 - a / c * w ** (mpf(2) / 3) + w * (mpf(1) / 6 + ld)
        return inner / (mpmath.e * w)


def _scan_step(j: int, w, r01: int) -> float:
    roots = [float(ai_root(i, r01 == 1, 64)) for i in range(1, j + 2)]
    gap = min(roots[i] - roots[i + 1] for i in range(len(roots) - 1))
    wf = float(w)
    return gap * 2 ** (-1 / 3) * wf ** (2 / 3) / (math.e * wf) / 4


def _quantize(bits: float) -> int:
    # coefficient tables are cached per precision, so keep the set of precisions small
    return 128 * math.ceil(bits / 128)


def _log2_size_guess(z, w) -> float:
    """``log2`` of ``exp(-U(x)/w)`` with ``x = min(z w, 1/e)``: the leading size of phi."""
    x = min(float(z) * float(w), 1 / math.e)
    if x <= 0:
        return 0.0
    t = float(tree_eval("T", x, 64)) if x < 1 / math.e else 1.0
    return -(t - t * t / 2) / float(w) / math.log(2)


def _sign(z, w, r, F, kind) -> int:
    """Certified sign: the value must exceed the rounding level by 2^12."""
    probe = _phi_fixed(z, w, r, F, kind, 64)
    bits = _quantize(probe.log2_max_term - _log2_size_guess(z, w) + 64)
    while True:
        s = _phi_fixed(z, w, r, F, kind, bits)
        if s.value == 0:
            lost = bits
        else:
            lost = s.log2_max_term - _log2_abs(s.value)
        if bits - lost >= 12:
            return 1 if s.value > 0 else -1
        if bits > 1 << 18:
            return 0
        bits = _quantize(max(bits * 1.5, lost + 64))


def find_root(
    j: int,
    w,
    r01: int = 0,
    F: EntireFnSpec = ONE,
    kind: str = MULTIGRAPHIC,
    digits: int = 20,
) -> mpf:
    """The j-th positive real root of ``phi_r01`` (or ``phi~_r01``).

    The positive axis is scanned from 0 with a step of a quarter of the
    asymptotic root spacing; the j-th sign change gives a bracket.  Inside
    it Newton's method starts from :func:`root_asymptotic` (or the bracket
    midpoint when the seed lies outside) with the derivative taken from
    the term-wise differentiated series.  Steps leaving the bracket are
    replaced by bisection.

    A :class:`NumericalFailure` is raised when no bracket is found before
    four times the asymptotic location, or when the root found is closer
    to the asymptotic location of another index (basin ambiguity) while
    ``w <= 0.05``.
    """
    if j < 1:
        raise ValueError("j must be a positive integer")
    if r01 not in (0, 1):
        raise ValueError("r01 must be 0 or 1")
    kind = GGFKind.parse(kind)
    seed = root_asymptotic(j, w, r01, F, 64)
    h = _scan_step(j, w, r01)
    limit = 4 * float(seed) + 10 * h
    x_prev, s_prev = 0.0, _sign(0, w, r01, F, kind)
    if s_prev == 0:
        raise DomainError("phi vanishes at z = 0")
    found = 0
    x = 0.0
    while True:
        x += h
        if x > limit:
            raise NumericalFailure(f"fewer than {j} sign changes below z = {limit:.4g}")
        s = _sign(x, w, r01, F, kind)
        if s == 0:
            found += 1
            if found == j:
                lo = hi = mpf(x)
                break
            continue
        if s != s_prev:
            found += 1
            if found == j:
                lo, hi = mpf(x_prev), mpf(x)
                break
        x_prev, s_prev = x, s
    if lo == hi:
        return lo
    target = int(digits * 3.33) + 8
    # precision that resolves phi to absolute accuracy below |z phi'| 2^-target near the root
    d = phi_eval((lo + hi) / 2, w, r01, F, kind, deriv=1, digits=3)
    probe = _phi_fixed((lo + hi) / 2, w, r01, F, kind, 64)
    bits = _quantize(target + max(0.0, probe.log2_max_term - _log2_abs(d * hi)) + 40)
    f_lo = _phi_fixed(lo, w, r01, F, kind, bits).value
    with workprec(bits):
        x = seed if lo < seed < hi else (lo + hi) / 2
        eps = mpmath.ldexp(1, -target)
        for _ in range(200):
            fx = _phi_fixed(x, w, r01, F, kind, bits).value
            dfx = _phi_fixed(x, w, r01, F, kind, bits, deriv=1).value
            if fx == 0:
                break
            if (fx > 0) == (f_lo > 0):
                lo, f_lo = x, fx
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
            raise NumericalFailure("root iteration did not converge", partial=x)
        if float(w) <= 0.05:
            dists = []
            for i in range(max(1, j - 1), j + 2):
                dists.append((abs(x - root_asymptotic(i, w, r01, F, 64)), i))
            if min(dists)[1] != j:
                raise NumericalFailure(
                    f"root {mpmath.nstr(x, 10)} is closer to the asymptotic location of index "
                    f"{min(dists)[1]} than of {j}; use a smaller w or more digits",
                    partial=x,
                )
    with workprec(target):
        return +x


def dphi_at_root(
    j: int,
    w,
    r01: int = 0,
    F: EntireFnSpec = ONE,
    k: int = 1,
    kind: str = MULTIGRAPHIC,
    digits: int = 15,
    root=None,
) -> dict:
    """k-th z-derivative at the j-th root: numeric value, asymptotic value and ratio.

    The numeric value differentiates the series term by term.  The
    asymptotic value is

    * ``r01 = 0`` (``k = 1`` only): ``-kappa_j w^(1/6) exp(-1/(2w) + 2^(-1/3) a_j w^(-1/3) - F'(1)/F(1)) F(1)``
      with ``kappa_j = sqrt(2 pi) 2^(2/3) e^(7/6) Ai'(a_j)``;
    * ``r01 = 1``: ``(-1)^(k+1) k w^(1/2) kappa_j F(1) exp(-1/(2w) + 2^(-1/3) a'_j w^(-1/3) - (1/6 + F'(1)/F(1)) + k)``
      with ``kappa_j = 2 sqrt(2 pi) a'_j Ai(a'_j)``.

    For the simple-graphic weighting both are multiplied by ``e^(-1/4)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if r01 == 0 and k != 1:
        raise ValueError("the asymptotic formula for r = 0 covers k = 1 only")
    kind = GGFKind.parse(kind)
    z = root if root is not None else find_root(j, w, r01, F, kind, digits + 5)
    numeric = phi_eval(z, w, r01, F, kind, deriv=k, digits=digits)
    bits = int(digits * 3.33) + 16
    with workprec(bits):
        w = _real(w)
        f1, ld = F.value_and_log_derivative_at_one()
        c = mpmath.cbrt(2)
        if r01 == 0:
            a = ai_root(j, False, bits)
            kap = mpmath.sqrt(2 * mpmath.pi) * c**2 * mpmath.exp(mpf(7) / 6) * ai_general(1, a, bits)
            asym = -kap * w ** (mpf(1) / 6) * mpmath.exp(-1 / (2 * w) + a / c / mpmath.cbrt(w) - ld) * f1
        else:
            a = ai_root(j, True, bits)
            kap = 2 * mpmath.sqrt(2 * mpmath.pi) * a * ai_general(0, a, bits)
            sign = -1 if k % 2 == 0 else 1
            asym = (
                sign * k * mpmath.sqrt(w) * kap * f1
                * mpmath.exp(-1 / (2 * w) + a / c / mpmath.cbrt(w) - (mpf(1) / 6 + ld) + k)
            )
        if kind == SIMPLE:
            asym *= mpmath.exp(mpf(-1) / 4)
        return {"root": z, "numeric": numeric, "asymptotic": asym, "ratio": numeric / asym}


# ---------------------------------------------------------------------------
# Uniform approximations
# ---------------------------------------------------------------------------


def uniform_approx(
    part: str,
    z,
    w,
    r: int = 0,
    F: EntireFnSpec = ONE,
    kind: str = MULTIGRAPHIC,
    *,
    eps: float = 1 / 12,
    K: float = 10.0,
    prec: int | None = None,
):
    """Leading-order approximation of ``phi_r`` in one of the three regions.

    ``part`` is ``"a"`` (far from ``z = 1/(e w)``), ``"b"`` (intermediate),
    ``"c"`` (``1 - e z w = tau w^(2/3)`` with bounded ``tau``) or
    ``"c_refined"`` (part c with the ``w^(1/3)`` correction, ``r`` in
    ``{0, 1}``).  The fixed constants of the regime conditions are ``eps``
    and ``K``; a :class:`DomainError` names the inequality that fails.
    The simple-graphic weighting adds ``exp(-U(zw)/2)`` (part a) or
    ``exp(-1/4)`` (parts b and c).
    """
    kind = GGFKind.parse(kind)
    bits = prec or default_precision()
    with workprec(bits + 16):
        z = mpmath.mpmathify(z)
        w = _real(w)
        c = mpmath.cbrt(2)
        ezw = mpmath.e * z * w
        if part in ("a", "b"):
            if abs(ezw) > 1 + K * w ** (mpf(2) / 3):
                raise DomainError("|e z w| <= 1 + K w^(2/3) is violated")
            T = tree_eval("T", z * w, bits + 16)
            U = T - T * T / 2
            gap = 1 - abs(T)
            if part == "a":
                if gap < w ** (mpf(1) / 3 - eps):
                    raise DomainError("1 - |T(zw)| >= w^(1/3 - eps) is violated")
                v = mpmath.exp(-U / w) * (1 - T) ** (r - mpf(1) / 2) * F.eval(T)
                if kind == SIMPLE:
                    v *= mpmath.exp(-U / 2)
            else:
                if not (w ** (mpf(1) / 3) <= gap <= w ** (mpf(1) / 3 - eps)):
                    raise DomainError("w^(1/3) <= 1 - |T(zw)| <= w^(1/3 - eps) is violated")
                theta = (1 - T) / mpmath.cbrt(w)
                v = (
                    (-1) ** r * mpmath.sqrt(2 * mpmath.pi) * 2 ** (mpf(r) / 3 + mpf(1) / 3)
                    * w ** (mpf(r) / 3 - mpf(1) / 6)
                    * ai_general(r, theta**2 / c**2, bits)
                    * mpmath.exp(theta**3 / 3 - U / w) * F.eval(1)
                )
                if kind == SIMPLE:
                    v *= mpmath.exp(mpf(-1) / 4)
        elif part in ("c", "c_refined"):
            tau = (1 - ezw) / w ** (mpf(2) / 3)
            if abs(tau) > K:
                raise DomainError("|tau| <= K (bounded tau) is violated")
            pref = (
                (-1) ** r * mpmath.sqrt(2 * mpmath.pi) * 2 ** (mpf(r) / 3 + mpf(1) / 3)
                * w ** (mpf(r) / 3 - mpf(1) / 6)
                * mpmath.exp(-1 / (2 * w) + tau / mpmath.cbrt(w))
            )
            if part == "c":
                v = pref * ai_general(r, c * tau, bits) * F.eval(1)
            else:
                if r not in (0, 1):
                    raise DomainError("the refined estimate needs r in {0, 1}")
                f1 = F.eval(1)
                fp1 = F.derivative().eval(1)
                b = ai_bundle_pair(c * tau, bits)
                A, Ap = b
                w13 = mpmath.cbrt(w)
                if r == 0:
                    Kr = f1 * A + w13 * (
                        mpf(5) / 6 * tau**2 * f1 * A - c / 6 * f1 * Ap + c * fp1 * Ap
                    )
                else:
                    Kr = f1 * Ap + w13 * (
                        (f1 + 6 * fp1) / 3 / c * tau * A + mpf(5) / 6 * f1 * tau**2 * Ap
                    )
                v = pref * Kr
            if kind == SIMPLE:
                v *= mpmath.exp(mpf(-1) / 4)
        else:
            raise ValueError(f"unknown part {part!r}")
    with workprec(bits):
        return +v


def ai_bundle_pair(x, bits: int):
    return ai_general(0, x, bits), ai_general(1, x, bits)
