"""Leading-order asymptotic probabilities in the three regimes.

With ``p = lambda/n``, the regimes are subcritical (``lambda < 1``),
critical (``lambda = 1 + mu n^(-1/3)``) and supercritical (``lambda > 1``).
Outside the critical window the probabilities are closed forms in
``lambda`` and in Airy data at ``a_1`` or ``a_1'``.  Inside it they are
the contour integrals of :mod:`randdigraph.airy_integrals`.

Each evaluator returns the leading term only, wrapped in an
:class:`AsymResult` that records the regime used and any caveat worth
reporting (for instance a critical evaluation far from ``mu = 0``).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mpf

from .airy import ai, ai_general, ai_prime, ai_root
from .airy_integrals import elementary_critical, phi_rd, varphi
from .families import FamilySpec, ModelKind, WindowP, probability_exact
from .scalar_core import DomainError, workprec
from .strong_counts import a_r_polynomial

__all__ = [
    "AUTO_WINDOW",
    "AsymResult",
    "Regime",
    "acyclic_asym",
    "asym_probability",
    "constants",
    "convergence_rows",
    "elementary_asym",
    "fit_slope",
    "one_complex_asym",
]

AUTO_WINDOW = 4
"""Automatic regime choice: critical when ``|lambda - 1| n^(1/3) <= AUTO_WINDOW``."""

_BITS = 128
_TOL = mpf(10) ** -15
_WIDE_MU = 8


@dataclass(frozen=True)
class Regime:
    """``tag`` is ``subcritical``, ``critical`` or ``supercritical``."""

    tag: str
    lam: mpf
    mu: mpf

    @classmethod
    def from_np(cls, n: int, p, mode: str = "auto") -> "Regime":
        if n < 1:
            raise ValueError("n must be positive")
        with workprec(_BITS):
            p = mpmath.mpmathify(p) if not isinstance(p, Fraction) else mpf(p.numerator) / p.denominator
            lam = n * p
            mu = (lam - 1) * mpmath.cbrt(n)
        if mode == "auto":
            if abs(mu) <= AUTO_WINDOW:
                mode = "critical"
            else:
                mode = "subcritical" if lam < 1 else "supercritical"
        if mode == "subcritical" and not lam < 1:
            raise DomainError(f"subcritical regime needs lambda < 1, got {mpmath.nstr(lam, 8)}")
        if mode == "supercritical" and not lam > 1:
            raise DomainError(f"supercritical regime needs lambda > 1, got {mpmath.nstr(lam, 8)}")
        if mode not in ("subcritical", "critical", "supercritical"):
            raise ValueError(f"unknown regime {mode!r}")
        return cls(mode, lam, mu)


@dataclass(frozen=True)
class AsymResult:
    value: mpf
    regime: Regime
    warnings: tuple[str, ...] = field(default=())

    def __float__(self) -> float:
        return float(self.value)


# -- constants --------------------------------------------------------------


def _at_bits(fn):
    """Evaluate ``fn`` at no less than ``_BITS`` bits, whatever the caller's context."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with workprec(max(_BITS, mpmath.mp.prec)):
            return fn(*args, **kwargs)

    return wrapper


@lru_cache(maxsize=None)
def _airy_data():
    with workprec(_BITS):
        a1 = ai_root(1, False, _BITS)
        a1p = ai_root(1, True, _BITS)
        return a1, ai_prime(a1, _BITS), a1p, ai(a1p, _BITS)


@lru_cache(maxsize=None)
def _ai_at_a1p(k: int) -> mpf:
    return ai_general(k, _airy_data()[2], _BITS)


def _lam(lam) -> mpf:
    if isinstance(lam, Fraction):
        return mpf(lam.numerator) / lam.denominator
    return mpmath.mpmathify(lam)


@_at_bits
def alpha(lam) -> mpf:
    lam = _lam(lam)
    if lam <= 0:
        raise DomainError("alpha needs lambda > 0")
    return (lam**2 - 1) / (2 * lam) - mpmath.log(lam)


@_at_bits
def beta(lam) -> mpf:
    lam = _lam(lam)
    if lam <= 0:
        raise DomainError("beta needs lambda > 0")
    return (lam - 1) / mpmath.cbrt(2 * lam)


@_at_bits
def gamma2(lam) -> mpf:
    lam = _lam(lam)
    dai = _airy_data()[1]
    return mpf(2) ** (mpf(-2) / 3) / dai * lam ** (mpf(5) / 6) * mpmath.exp((lam - 1) / 6)


@_at_bits
def sigma2(lam) -> mpf:
    lam = _lam(lam)
    _, _, a1p, ai_a1p = _airy_data()
    return -mpmath.sqrt(lam) * mpmath.exp(-(lam - 1) / 6) / (2 * a1p * ai_a1p)


def _check_rd(r: int, d: int) -> None:
    if r < 1 or not 0 <= d <= 2 * r - 1:
        raise DomainError("need r >= 1 and 0 <= d <= 2r - 1")


@_at_bits
def sigma_rd(lam, r: int, d: int) -> mpf:
    _check_rd(r, d)
    lam = _lam(lam)
    _, _, a1p, ai_a1p = _airy_data()
    sign = -1 if (1 + 3 * r - d) % 2 else 1
    return (
        sign
        * mpf(2) ** (mpf(-4) / 3 - r + mpf(d) / 3)
        * (lam - 1)
        * lam ** (mpf(1) / 6 + mpf(d) / 3)
        * mpmath.exp(mpf(1) / 6 - lam / 6)
        * _ai_at_a1p(1 - 3 * r + d)
        / (a1p * ai_a1p) ** 2
    )


def _simple_model(model: str) -> str:
    model = ModelKind.parse(model)
    if model == ModelKind.MD:
        raise DomainError("this constant is defined for the D2 and SD models only")
    return model


@_at_bits
def delta1(lam, model: str) -> mpf:
    lam = _lam(lam)
    if _simple_model(model) == ModelKind.SD:
        return mpmath.exp(lam + lam**2 / 2)
    return mpmath.exp(lam)


@_at_bits
def delta2(lam, model: str) -> mpf:
    lam = _lam(lam)
    if _simple_model(model) == ModelKind.SD:
        return mpmath.exp(-lam**2 / 4 + 5 * lam / 2 - mpf(3) / 4)
    return mpmath.exp(-lam**2 / 4 + 3 * lam / 2 - mpf(1) / 4)


def _simple_tilt(lam) -> mpf:
    return mpmath.exp(-lam**2 / 4 + lam / 3 - mpf(1) / 12)


@_at_bits
def omega_elem(lam) -> mpf:
    lam = _lam(lam)
    _, _, a1p, ai_a1p = _airy_data()
    return -mpmath.sqrt(lam) / (2 * a1p * ai_a1p) * _simple_tilt(lam)


@_at_bits
def omega_r(lam, r: int) -> mpf:
    if r < 1:
        raise DomainError("r must be at least 1")
    lam = _lam(lam)
    _, _, a1p, ai_a1p = _airy_data()
    sign = -1 if (1 - 3 * r) % 2 else 1
    return (
        mpf(2) ** (mpf(-4) / 3 - r)
        * (lam - 1)
        * lam ** (mpf(1) / 6)
        * sign
        * _ai_at_a1p(1 - 3 * r)
        / (a1p * ai_a1p) ** 2
        * _simple_tilt(lam)
    )


@_at_bits
def c_r(lam, model: str, r: int) -> mpf:
    model = _simple_model(model)
    poly = a_r_polynomial(r, "simple" if model == ModelKind.D2 else "strict")
    lam = _lam(lam)
    return poly.value(lam)


_CONSTANTS = {
    "alpha": lambda lam, model, r, d: alpha(lam),
    "beta": lambda lam, model, r, d: beta(lam),
    "gamma2": lambda lam, model, r, d: gamma2(lam),
    "sigma2": lambda lam, model, r, d: sigma2(lam),
    "sigma_rd": lambda lam, model, r, d: sigma_rd(lam, r, d),
    "delta1": lambda lam, model, r, d: delta1(lam, model),
    "delta2": lambda lam, model, r, d: delta2(lam, model),
    "omega_elem": lambda lam, model, r, d: omega_elem(lam),
    "omega_r": lambda lam, model, r, d: omega_r(lam, r),
    "c_r": lambda lam, model, r, d: c_r(lam, model, r),
}


@lru_cache(maxsize=4096)
def _constant_cached(name: str, lam_key: str, model: str, r: int, d: int) -> mpf:
    with workprec(_BITS):
        return _CONSTANTS[name](mpf(lam_key), model, r, d)


def constants(name: str, lam, model: str = "MD", r: int = 1, d: int = 0) -> mpf:
    """Named constant at ``lambda`` (cached per argument tuple)."""
    if name not in _CONSTANTS:
        raise ValueError(f"unknown constant {name!r}; known: {sorted(_CONSTANTS)}")
    with workprec(_BITS):
        key = mpmath.nstr(_lam(lam), 40)
    return _constant_cached(name, key, ModelKind.parse(model), r, d)


# -- evaluators --------------------------------------------------------------


def _critical_warnings(regime: Regime) -> tuple[str, ...]:
    if abs(regime.mu) > _WIDE_MU:
        return (
            f"critical formula used at mu = {mpmath.nstr(regime.mu, 6)}; "
            "it is only justified for mu = o(n^(1/12))",
        )
    return ()


def _supercritical_exp(n: int, lam, prime: bool) -> mpf:
    a1, _, a1p, _ = _airy_data()
    a = a1p if prime else a1
    return mpmath.exp(-alpha(lam) * n + a * beta(lam) * mpmath.cbrt(n))


def acyclic_asym(n: int, p, model: str, regime: str = "auto") -> AsymResult:
    """Leading term of the probability of being acyclic."""
    model = ModelKind.parse(model)
    reg = Regime.from_np(n, p, regime)
    lam, warn = reg.lam, ()
    with workprec(_BITS):
        simple = model != ModelKind.MD
        if reg.tag == "subcritical":
            v = 1 - lam
            if simple:
                v *= delta1(lam, model)
        elif reg.tag == "critical":
            v = varphi(reg.mu, _TOL, _BITS) / mpmath.cbrt(n)
            if simple:
                v *= delta1(1, model)
            warn = _critical_warnings(reg)
        else:
            v = gamma2(lam) / mpmath.cbrt(n) * _supercritical_exp(n, lam, False)
            if simple:
                v *= delta2(lam, model)
    return AsymResult(v, reg, warn)


def elementary_asym(n: int, p, model: str, regime: str = "auto") -> AsymResult:
    """Leading term of the probability of being elementary."""
    model = ModelKind.parse(model)
    reg = Regime.from_np(n, p, regime)
    lam, warn = reg.lam, ()
    with workprec(_BITS):
        if reg.tag == "subcritical":
            v = mpf(1)
        elif reg.tag == "critical":
            v = elementary_critical(reg.mu, _TOL, _BITS)
            warn = _critical_warnings(reg)
        else:
            pre = sigma2(lam) if model == ModelKind.MD else omega_elem(lam)
            v = pre * _supercritical_exp(n, lam, True)
    return AsymResult(v, reg, warn)


def _kernel_asym(n: int, reg: Regime, r: int, d: int) -> mpf:
    lam = reg.lam
    fact = math.factorial(2 * r - d)
    if reg.tag == "subcritical":
        v = mpf(n) ** -r * lam ** (3 * r - d) * (1 - lam) ** (-3 * r + d)
    elif reg.tag == "critical":
        v = mpmath.cbrt(n) ** -d * phi_rd(r, d, reg.mu, _TOL, _BITS)
    else:
        v = mpmath.cbrt(n) ** (1 - d) * sigma_rd(lam, r, d) * _supercritical_exp(n, lam, True)
    return v / fact


def _excess_asym(n: int, reg: Regime, model: str, r: int) -> mpf:
    lam = reg.lam
    if reg.tag == "subcritical":
        return c_r(lam, model, r) * mpf(n) ** -r * lam**r * (1 - lam) ** (-3 * r)
    c1 = c_r(1, model, r)
    if reg.tag == "critical":
        return c1 * phi_rd(r, 0, reg.mu, _TOL, _BITS)
    return c1 * mpmath.cbrt(n) * omega_r(lam, r) * _supercritical_exp(n, lam, True)


def one_complex_asym(
    n: int, p, model: str, r: int = 1, d: int | None = None, regime: str = "auto"
) -> AsymResult:
    """Leading term for exactly one complex strong component.

    MD: a kernel of excess ``r`` and deficiency ``d`` (``d`` required), or
    the bicyclic family when ``d`` is ``None`` and ``r = 1``.
    D2/SD: excess ``r`` (``d`` must be ``None``).
    """
    model = ModelKind.parse(model)
    reg = Regime.from_np(n, p, regime)
    warn = _critical_warnings(reg) if reg.tag == "critical" else ()
    with workprec(_BITS):
        if model == ModelKind.MD:
            if d is None:
                if r != 1:
                    raise DomainError("MD needs a deficiency d unless r = 1 (bicyclic)")
                v = _md_bicyclic(n, reg)
            else:
                _check_rd(r, d)
                v = _kernel_asym(n, reg, r, d)
        else:
            if d is not None:
                raise DomainError("per-kernel asymptotics are provided for MD only")
            if r < 1:
                raise DomainError("r must be at least 1")
            v = _excess_asym(n, reg, model, r)
    return AsymResult(v, reg, warn)


def _md_bicyclic(n: int, reg: Regime) -> mpf:
    # one bicyclic component = kernel (1, 0) or kernel (1, 1) with weight 1/2
    # (the loop-with-two-arcs kernel has a symmetry of order two)
    lam = reg.lam
    if reg.tag == "subcritical":
        return lam**2 / (2 * n * (1 - lam) ** 3)
    if reg.tag == "critical":
        return phi_rd(1, 0, reg.mu, _TOL, _BITS) / 2
    return sigma_rd(lam, 1, 0) / 2 * mpmath.cbrt(n) * _supercritical_exp(n, lam, True)


def asym_probability(family: FamilySpec, model: str, n: int, p, regime: str = "auto") -> AsymResult:
    """Dispatch on the family.  ``p`` may also be a :class:`WindowP`."""
    model = ModelKind.parse(model)
    if isinstance(p, WindowP):
        p = p(max(_BITS, mpmath.mp.prec))
    family.check_model(model)
    if family.tag == "acyclic":
        return acyclic_asym(n, p, model, regime)
    if family.tag == "elementary":
        return elementary_asym(n, p, model, regime)
    if family.tag == "kernel":
        return one_complex_asym(n, p, model, family.r, family.d, regime)
    if family.tag == "excess":
        return one_complex_asym(n, p, model, family.r, None, regime)
    return one_complex_asym(n, p, model, 1, None, regime)


# -- convergence ------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    exact: mpf
    asym: mpf

    @property
    def ratio(self) -> mpf:
        return self.exact / self.asym

    @property
    def log_abs_ratio_minus_one(self) -> float:
        return float(mpmath.log(abs(self.ratio - 1)))


def convergence_rows(family: FamilySpec, model: str, lam, n_list, digits: int = 10) -> list[ConvergenceRow]:
    """Exact and asymptotic probabilities at ``p = lambda/n`` for each ``n``."""
    lam_q = Fraction(str(lam)) if not isinstance(lam, Fraction) else lam
    if lam_q == 1:
        raise DomainError("lambda must be separated from 1")
    regime = "subcritical" if lam_q < 1 else "supercritical"
    rows = []
    for n in n_list:
        p = lam_q / n
        exact = probability_exact(family, model, n, p, digits)
        asym = asym_probability(family, model, n, p, regime).value
        rows.append(ConvergenceRow(n, exact, asym))
    return rows


def fit_slope(rows: list[ConvergenceRow]) -> float:
    """Least-squares slope of ``log|ratio - 1|`` against ``log n``."""
    if len(rows) < 2:
        raise ValueError("need at least two rows")
    xs = [math.log(r.n) for r in rows]
    ys = [r.log_abs_ratio_minus_one for r in rows]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx
