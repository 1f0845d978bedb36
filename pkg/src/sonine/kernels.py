"""Catalog of analytic kernels with exact cell integrals, Laplace transforms and
known Sonine partners.

Scalar kernels implement three vectorized primitives on float arrays:

* ``_value(t)``          the kernel itself,
* ``_integral(a, b)``    the exact integral over ``[a, b]``,
* ``_laplace(p)``        the closed-form Laplace transform.

Matrix kernels (:class:`ScalarTimesMatrix`, :class:`DiagonalOfScalars`) lift
those to ``(m, m)`` blocks.  The public functions at the bottom of the module
(:func:`eval_kernel`, :func:`cell_moment`, ...) are thin, validated wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np
from scipy import integrate, special

from .core import DeltaPlusFunction, as_sym_matrix, is_spd, spd_inverse
from .errors import InvalidArgument, NumericOverflow, OutOfRange, Unsupported


def _check_alpha(alpha: float, name: str = "alpha") -> float:
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"{name} must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_positive(x: float, name: str) -> float:
    if not x > 0.0 or not math.isfinite(x):
        raise InvalidArgument(f"{name} must be positive, got {x}")
    return float(x)


def log_beta(x, y):
    """``log B(x, y)`` through log-gamma; stays finite where ``B`` underflows."""
    return special.gammaln(x) + special.gammaln(y) - special.gammaln(np.add(x, y))


class KernelSpec:
    """Common interface of all catalog kernels."""

    singular_at_zero: ClassVar[bool] = False
    licm: ClassVar[bool] = False
    bernstein: ClassVar[bool] = False
    variant: ClassVar[str] = ""

    @property
    def m(self) -> int:
        raise NotImplementedError

    def values(self, t) -> np.ndarray:
        """Kernel at an array of times, shape ``t.shape + (m, m)``."""
        raise NotImplementedError

    def integrals(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def laplace(self, p: float) -> np.ndarray:
        raise NotImplementedError

    def value_at_zero(self) -> np.ndarray | None:
        """Finite limit at ``t -> 0``, or ``None`` when the kernel blows up."""
        raise NotImplementedError

    def limit_inverse_at_zero(self) -> np.ndarray | None:
        raise NotImplementedError

    def duality_atom(self) -> np.ndarray | None:
        """Coefficient of ``delta`` in the solution of ``A * X = t I``.

        That is ``lim_{p->inf} [p^2 A~(p)]^{-1}``; ``None`` when it is not
        available in closed form.
        """
        raise NotImplementedError


# --------------------------------------------------------------------------
# Scalar kernels
# --------------------------------------------------------------------------


class ScalarKernel(KernelSpec):
    @property
    def m(self) -> int:
        return 1

    def _value(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _integral(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _laplace(self, p: float) -> float:
        raise Unsupported(f"{type(self).__name__} has no closed-form Laplace transform")

    def _at_zero(self) -> float | None:
        return None

    def _slope_at_zero(self) -> float | None:
        return None

    def values(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            v = self._value(t)
        bad = ~np.isfinite(v)
        if np.any(bad):
            where = float(np.atleast_1d(t)[np.argmax(np.atleast_1d(bad))])
            raise NumericOverflow(f"{type(self).__name__} overflows at t={where}", location=where)
        return v[..., None, None]

    def integrals(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        return np.asarray(self._integral(a, b), dtype=float)[..., None, None]

    def laplace(self, p: float) -> np.ndarray:
        return np.array([[self._laplace(float(p))]])

    def value_at_zero(self) -> np.ndarray | None:
        v = self._at_zero()
        return None if v is None else np.array([[v]])

    def limit_inverse_at_zero(self) -> np.ndarray | None:
        if self.singular_at_zero:
            return np.zeros((1, 1))
        v = self._at_zero()
        if v is None or v == 0.0:
            return None
        return np.array([[1.0 / v]])

    def _duality_atom(self) -> float | None:
        if self.licm:
            return 0.0
        v0 = self._at_zero()
        if v0 is not None and v0 > 0.0:
            return 0.0
        s = self._slope_at_zero()
        if v0 == 0.0 and s is not None and s > 0.0:
            return 1.0 / s
        return None

    def duality_atom(self) -> np.ndarray | None:
        b = self._duality_atom()
        return None if b is None else np.array([[b]])


def _power_integral(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    """``b**s - a**s`` for ``0 <= a < b``, accurate for thin cells."""
    safe_a = np.where(a > 0.0, a, 1.0)
    thin = safe_a ** s * np.expm1(s * np.log(np.where(a > 0.0, b / safe_a, 1.0)))
    return np.where(a > 0.0, thin, b ** s)


@dataclass(frozen=True)
class PowerLaw(ScalarKernel):
    """``t**(alpha-1) / Gamma(alpha)``."""

    alpha: float

    variant: ClassVar[str] = "power_law"
    singular_at_zero: ClassVar[bool] = True
    licm: ClassVar[bool] = True

    def __post_init__(self):
        _check_alpha(self.alpha)

    def _value(self, t):
        return t ** (self.alpha - 1.0) / special.gamma(self.alpha)

    def _integral(self, a, b):
        return _power_integral(a, b, self.alpha) / special.gamma(self.alpha + 1.0)

    def _laplace(self, p):
        return p ** (-self.alpha)


@dataclass(frozen=True)
class SoninePartnerOfPowerLaw(ScalarKernel):
    """``t**(-alpha) / Gamma(1-alpha)``, the partner of :class:`PowerLaw`."""

    alpha: float

    variant: ClassVar[str] = "power_law_partner"
    singular_at_zero: ClassVar[bool] = True
    licm: ClassVar[bool] = True

    def __post_init__(self):
        _check_alpha(self.alpha)

    def _value(self, t):
        return t ** (-self.alpha) / special.gamma(1.0 - self.alpha)

    def _integral(self, a, b):
        return _power_integral(a, b, 1.0 - self.alpha) / special.gamma(2.0 - self.alpha)

    def _laplace(self, p):
        return p ** (self.alpha - 1.0)


@dataclass(frozen=True)
class TemperedPowerLaw(ScalarKernel):
    """``t**(alpha-1) exp(-lam t) / Gamma(alpha)``."""

    alpha: float
    lam: float

    variant: ClassVar[str] = "tempered_power_law"
    singular_at_zero: ClassVar[bool] = True
    licm: ClassVar[bool] = True

    def __post_init__(self):
        _check_alpha(self.alpha)
        _check_positive(self.lam, "lam")

    def _value(self, t):
        return t ** (self.alpha - 1.0) * np.exp(-self.lam * t) / special.gamma(self.alpha)

    def _integral(self, a, b):
        al, xa, xb = self.alpha, self.lam * a, self.lam * b
        # difference of the regularized incomplete gamma, from whichever tail is small
        lower = special.gammainc(al, xb) - special.gammainc(al, xa)
        upper = special.gammaincc(al, xa) - special.gammaincc(al, xb)
        return np.where(xa > al, upper, lower) * self.lam ** (-al)

    def _laplace(self, p):
        return (p + self.lam) ** (-self.alpha)


@dataclass(frozen=True)
class TemperedPartner(ScalarKernel):
    """Partner of :class:`TemperedPowerLaw`:
    ``lam**alpha * (1 - Gamma(-alpha, lam t) / Gamma(-alpha))``.

    The upper incomplete gamma with negative parameter is reduced by one step
    of ``Gamma(s+1, x) = s Gamma(s, x) + x**s exp(-x)`` to

        ``lam**alpha * (P(1-alpha, x) + x**(-alpha) exp(-x) / Gamma(1-alpha))``

    with ``x = lam t`` and ``P`` the regularized lower incomplete gamma.
    """

    alpha: float
    lam: float

    variant: ClassVar[str] = "tempered_partner"
    singular_at_zero: ClassVar[bool] = True
    licm: ClassVar[bool] = True

    def __post_init__(self):
        _check_alpha(self.alpha)
        _check_positive(self.lam, "lam")

    def _value(self, t):
        s = 1.0 - self.alpha
        x = self.lam * t
        return self.lam ** self.alpha * (
            special.gammainc(s, x) + x ** (-self.alpha) * np.exp(-x) / special.gamma(s)
        )

    def _antiderivative(self, x):
        # d/dt of this at x = lam t is the kernel; x P(s,x) - s P(s+1,x) + P(s,x)
        s = 1.0 - self.alpha
        return self.lam ** (self.alpha - 1.0) * (
            (x + 1.0) * special.gammainc(s, x) - s * special.gammainc(s + 1.0, x)
        )

    def _integral(self, a, b):
        return self._antiderivative(self.lam * b) - self._antiderivative(self.lam * a)

    def _laplace(self, p):
        return (p + self.lam) ** self.alpha / p


@dataclass(frozen=True)
class Exponential(ScalarKernel):
    """``exp(-lam t)``."""

    lam: float

    variant: ClassVar[str] = "exponential"
    licm: ClassVar[bool] = True

    def __post_init__(self):
        _check_positive(self.lam, "lam")

    def _value(self, t):
        return np.exp(-self.lam * t)

    def _integral(self, a, b):
        return np.exp(-self.lam * a) * -np.expm1(-self.lam * (b - a)) / self.lam

    def _laplace(self, p):
        return 1.0 / (p + self.lam)

    def _at_zero(self):
        return 1.0


def _x_plus_expm1_neg(x: np.ndarray) -> np.ndarray:
    """``x + expm1(-x)`` without cancellation for small ``x``."""
    small = np.abs(x) < 0.1
    xs = np.where(small, x, 0.0)
    # x^2/2 - x^3/6 + x^4/24 - ...
    series = np.zeros_like(xs)
    term = xs * xs / 2.0
    for k in range(3, 20):
        series = series + term
        term = -term * xs / k
    return np.where(small, series, x + np.expm1(-np.where(small, 0.0, x)))


@dataclass(frozen=True)
class OneMinusExp(ScalarKernel):
    """``1 - exp(-lam t)``, a Bernstein function vanishing at 0."""

    lam: float

    variant: ClassVar[str] = "one_minus_exp"
    bernstein: ClassVar[bool] = True

    def __post_init__(self):
        _check_positive(self.lam, "lam")

    def _value(self, t):
        return -np.expm1(-self.lam * t)

    def _integral(self, a, b):
        lam = self.lam
        d = b - a
        # (b - a) - (e^{-lam a} - e^{-lam b}) / lam, split to avoid cancellation
        return d * -np.expm1(-lam * a) + np.exp(-lam * a) * _x_plus_expm1_neg(lam * d) / lam

    def _laplace(self, p):
        return self.lam / (p * (p + self.lam))

    def _at_zero(self):
        return 0.0

    def _slope_at_zero(self):
        return self.lam


@dataclass(frozen=True)
class Constant(ScalarKernel):
    """Constant kernel ``c >= 0``; both CM and Bernstein."""

    c: float

    variant: ClassVar[str] = "constant"
    licm: ClassVar[bool] = True
    bernstein: ClassVar[bool] = True

    def __post_init__(self):
        if not self.c >= 0.0 or not math.isfinite(self.c):
            raise InvalidArgument(f"constant kernel must be finite and >= 0, got {self.c}")

    def _value(self, t):
        return np.full_like(t, self.c, dtype=float)

    def _integral(self, a, b):
        return self.c * (b - a)

    def _laplace(self, p):
        return self.c / p

    def _at_zero(self):
        return self.c

    def _slope_at_zero(self):
        return 0.0


# Bessel kernels.  Both are t**e * g(t) with g entire; g is summed from its
# power series near 0 and recovered from scipy's Bessel routines elsewhere.

_GL10 = np.polynomial.legendre.leggauss(10)
_GL20 = np.polynomial.legendre.leggauss(20)


def _gauss_legendre(f, a: np.ndarray, b: np.ndarray, rule) -> np.ndarray:
    x, w = rule
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[..., None] + half[..., None] * x
    return half * np.sum(w * f(pts), axis=-1)


class _BesselKernel(ScalarKernel):
    singular_at_zero: ClassVar[bool] = True
    _QUAD_RTOL: ClassVar[float] = 1e-10

    def _exponent(self) -> float:
        raise NotImplementedError

    def _series_g(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _g(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        small = t < 1.0
        out = np.empty_like(t)
        out[small] = self._series_g(t[small])
        big = ~small
        out[big] = self._value(t[big]) * t[big] ** (-self._exponent())
        return float(out[0]) if scalar else out

    def _integral(self, a, b):
        a = np.atleast_1d(a).astype(float)
        b = np.atleast_1d(b).astype(float)
        out = np.empty(np.broadcast(a, b).shape)
        a, b = np.broadcast_arrays(a, b)
        e = self._exponent()
        at0 = a == 0.0
        for idx in zip(*np.nonzero(at0)):
            val, _ = integrate.quad(
                self._g, 0.0, b[idx], weight="alg", wvar=(e, 0.0),
                epsabs=0.0, epsrel=1e-12, limit=200,
            )
            out[idx] = val
        rest = ~at0
        if np.any(rest):
            ar, br = a[rest], b[rest]
            coarse = _gauss_legendre(self._value, ar, br, _GL10)
            fine = _gauss_legendre(self._value, ar, br, _GL20)
            scale = _gauss_legendre(lambda t: np.abs(self._value(t)), ar, br, _GL20)
            res = fine
            bad = np.abs(fine - coarse) > self._QUAD_RTOL * np.maximum(scale, 1e-300)
            for k in np.nonzero(bad)[0]:
                res[k], _ = integrate.quad(
                    lambda t: float(self._value(np.array(t))), ar[k], br[k],
                    epsabs=0.0, epsrel=1e-12, limit=400,
                )
            out[rest] = res
        return out


@dataclass(frozen=True)
class BesselK(_BesselKernel):
    """``t**(-lam/2) J_{-lam}(2 sqrt(t))``; changes sign, Laplace transform
    ``exp(-1/p) p**(lam-1)``.  Restricted to ``0 < lam < 1`` where it is
    locally integrable."""

    lam: float

    variant: ClassVar[str] = "bessel_j"

    def __post_init__(self):
        _check_alpha(self.lam, "lam")

    def _exponent(self):
        return -self.lam

    def _value(self, t):
        return t ** (-self.lam / 2.0) * special.jv(-self.lam, 2.0 * np.sqrt(t))

    def _series_g(self, t):
        k = np.arange(40)
        coef = (-1.0) ** k * np.exp(-special.gammaln(k + 1.0) - special.gammaln(k + 1.0 - self.lam))
        return np.polynomial.polynomial.polyval(t, coef)

    def _laplace(self, p):
        return math.exp(-1.0 / p) * p ** (self.lam - 1.0)


@dataclass(frozen=True)
class BesselI(_BesselKernel):
    """``t**((lam-1)/2) I_{lam-1}(2 sqrt(t))``, the partner of :class:`BesselK`;
    Laplace transform ``exp(1/p) p**(-lam)``."""

    lam: float

    variant: ClassVar[str] = "bessel_i"

    def __post_init__(self):
        _check_alpha(self.lam, "lam")

    def _exponent(self):
        return self.lam - 1.0

    def _value(self, t):
        return t ** ((self.lam - 1.0) / 2.0) * special.iv(self.lam - 1.0, 2.0 * np.sqrt(t))

    def _series_g(self, t):
        k = np.arange(40)
        coef = np.exp(-special.gammaln(k + 1.0) - special.gammaln(k + self.lam))
        return np.polynomial.polynomial.polyval(t, coef)

    def _laplace(self, p):
        return math.exp(1.0 / p) * p ** (-self.lam)


@dataclass(frozen=True)
class SeriesKernel(ScalarKernel):
    """``sum_n a_n t**(n+alpha-1)`` for a finite coefficient list."""

    alpha: float
    coefficients: tuple[float, ...]

    variant: ClassVar[str] = "series"

    def __post_init__(self):
        _check_alpha(self.alpha)
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise InvalidArgument("series kernel needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def singular_at_zero(self) -> bool:  # type: ignore[override]
        return self.coefficients[0] != 0.0

    def _value(self, t):
        return t ** (self.alpha - 1.0) * np.polynomial.polynomial.polyval(t, self.coefficients)

    def _integral(self, a, b):
        total = np.zeros(np.broadcast(a, b).shape)
        for n, c in enumerate(self.coefficients):
            if c != 0.0:
                s = n + self.alpha
                total = total + c * _power_integral(a, b, s) / s
        return total

    def _laplace(self, p):
        return sum(
            c * math.exp(special.gammaln(n + self.alpha) - (n + self.alpha) * math.log(p))
            for n, c in enumerate(self.coefficients)
        )

    def _at_zero(self):
        return None if self.singular_at_zero else 0.0


# --------------------------------------------------------------------------
# Matrix kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarTimesMatrix(KernelSpec):
    """``k(t) K0`` with ``K0`` symmetric positive definite."""

    scalar: ScalarKernel
    K0: np.ndarray

    variant: ClassVar[str] = "scalar_times_matrix"

    def __post_init__(self):
        if not isinstance(self.scalar, ScalarKernel):
            raise InvalidArgument("ScalarTimesMatrix needs a scalar kernel")
        K0 = as_sym_matrix(self.K0, "K0")
        if not is_spd(K0):
            raise InvalidArgument("K0 must be symmetric positive definite")
        object.__setattr__(self, "K0", K0)

    @property
    def m(self) -> int:
        return self.K0.shape[0]

    @property
    def singular_at_zero(self) -> bool:  # type: ignore[override]
        return self.scalar.singular_at_zero

    @property
    def licm(self) -> bool:  # type: ignore[override]
        return self.scalar.licm

    @property
    def bernstein(self) -> bool:  # type: ignore[override]
        return self.scalar.bernstein

    def values(self, t):
        return self.scalar.values(t) * self.K0

    def integrals(self, a, b):
        return self.scalar.integrals(a, b) * self.K0

    def laplace(self, p):
        return self.scalar.laplace(p)[0, 0] * self.K0

    def value_at_zero(self):
        v = self.scalar.value_at_zero()
        return None if v is None else v[0, 0] * self.K0

    def limit_inverse_at_zero(self):
        v = self.scalar.limit_inverse_at_zero()
        return None if v is None else v[0, 0] * spd_inverse(self.K0)

    def duality_atom(self):
        b = self.scalar.duality_atom()
        return None if b is None else b[0, 0] * spd_inverse(self.K0)


@dataclass(frozen=True)
class DiagonalOfScalars(KernelSpec):
    """``diag(k_1(t), ..., k_m(t))``."""

    entries: tuple[ScalarKernel, ...]

    variant: ClassVar[str] = "diagonal"

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries or not all(isinstance(e, ScalarKernel) for e in entries):
            raise InvalidArgument("DiagonalOfScalars needs a non-empty list of scalar kernels")
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def singular_at_zero(self) -> bool:  # type: ignore[override]
        return any(e.singular_at_zero for e in self.entries)

    @property
    def licm(self) -> bool:  # type: ignore[override]
        return all(e.licm for e in self.entries)

    @property
    def bernstein(self) -> bool:  # type: ignore[override]
        return all(e.bernstein for e in self.entries)

    def _assemble(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        diag = np.stack([b[..., 0, 0] for b in blocks], axis=-1)
        out = np.zeros(diag.shape + (self.m,))
        idx = np.arange(self.m)
        out[..., idx, idx] = diag
        return out

    def values(self, t):
        return self._assemble([e.values(t) for e in self.entries])

    def integrals(self, a, b):
        return self._assemble([e.integrals(a, b) for e in self.entries])

    def laplace(self, p):
        return self._assemble([e.laplace(p) for e in self.entries])

    def _per_entry(self, name: str) -> np.ndarray | None:
        parts = [getattr(e, name)() for e in self.entries]
        if any(p is None for p in parts):
            return None
        return self._assemble(parts)

    def value_at_zero(self):
        return self._per_entry("value_at_zero")

    def limit_inverse_at_zero(self):
        return self._per_entry("limit_inverse_at_zero")

    def duality_atom(self):
        return self._per_entry("duality_atom")


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------


def eval_kernel(spec: KernelSpec, t: float) -> np.ndarray:
    """Kernel value at a single ``t > 0`` as an ``(m, m)`` matrix."""
    if not t > 0.0:
        raise OutOfRange(f"kernels are evaluated on t > 0, got t={t}")
    return spec.values(np.array([t], dtype=float))[0]


def cell_moment(spec: KernelSpec, a: float, b: float) -> np.ndarray:
    """Exact integral of the kernel over ``[a, b]``."""
    if a < 0.0:
        raise InvalidArgument(f"integration starts at a={a} < 0")
    if not b > a:
        raise InvalidArgument(f"need a < b, got a={a}, b={b}")
    return spec.integrals(np.array([a], dtype=float), np.array([b], dtype=float))[0]


def laplace_closed_form(spec: KernelSpec, p: float) -> np.ndarray:
    if not p > 0.0:
        raise OutOfRange(f"Laplace transforms are evaluated at p > 0, got p={p}")
    return spec.laplace(p)


def limit_inverse_at_zero(spec: KernelSpec) -> np.ndarray | None:
    """``lim_{t->0} A(t)^{-1}``: zero for kernels singular at 0, the inverse of
    the value at 0 for bounded ones, ``None`` when that value is singular."""
    return spec.limit_inverse_at_zero()


def _scalar_partner(k: ScalarKernel) -> tuple[float, ScalarKernel]:
    if isinstance(k, PowerLaw):
        return 0.0, SoninePartnerOfPowerLaw(k.alpha)
    if isinstance(k, SoninePartnerOfPowerLaw):
        return 0.0, PowerLaw(k.alpha)
    if isinstance(k, TemperedPowerLaw):
        return 0.0, TemperedPartner(k.alpha, k.lam)
    if isinstance(k, TemperedPartner):
        return 0.0, TemperedPowerLaw(k.alpha, k.lam)
    if isinstance(k, Exponential):
        # (p + lam) / p = 1 + lam / p
        return 1.0, Constant(k.lam)
    if isinstance(k, Constant) and k.c > 0.0:
        return 1.0 / k.c, Constant(0.0)
    if isinstance(k, BesselK):
        return 0.0, BesselI(k.lam)
    if isinstance(k, BesselI):
        return 0.0, BesselK(k.lam)
    raise Unsupported(
        f"no catalog partner for {k!r}; solve numerically with convolve.solve_sonine"
    )


def sonine_partner(spec: KernelSpec) -> DeltaPlusFunction:
    """Closed-form solution ``X = B delta + F`` of ``A * X = I`` for catalog kernels."""
    if isinstance(spec, ScalarKernel):
        atom, reg = _scalar_partner(spec)
        return DeltaPlusFunction(np.array([[atom]]), reg)
    if isinstance(spec, ScalarTimesMatrix):
        atom, reg = _scalar_partner(spec.scalar)
        inv = spd_inverse(spec.K0)
        return DeltaPlusFunction(atom * inv, ScalarTimesMatrix(reg, inv))
    if isinstance(spec, DiagonalOfScalars):
        parts = [_scalar_partner(e) for e in spec.entries]
        return DeltaPlusFunction(
            np.diag([a for a, _ in parts]), DiagonalOfScalars(tuple(r for _, r in parts))
        )
    raise Unsupported(f"no catalog partner for {spec!r}")


# --------------------------------------------------------------------------
# Power-series partners
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesPair:
    """``k(t) = sum a_n t**(n+alpha-1)`` and its partner ``l(t) = sum b_m t**(m-alpha)``,
    both truncated at order ``M``."""

    alpha: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    M: int

    def pairing_residual(self) -> np.ndarray:
        """``sum_{n+m=r} a_n b_m B(n+alpha, m+1-alpha) - [r == 0]`` for ``r = 0..M``."""
        return pairing_residual(self.alpha, self.a, self.b, self.M)

    @property
    def kernel(self) -> SeriesKernel:
        return SeriesKernel(self.alpha, self.a)

    @property
    def partner(self) -> SeriesKernel:
        return SeriesKernel(1.0 - self.alpha, self.b)


def _beta(x: float, y: float) -> float:
    return math.exp(log_beta(x, y))


def pairing_residual(alpha: float, a: Sequence[float], b: Sequence[float], M: int) -> np.ndarray:
    a = list(a) + [0.0] * max(0, M + 1 - len(a))
    out = np.empty(M + 1)
    for r in range(M + 1):
        s = 0.0
        for n in range(r + 1):
            if a[n] != 0.0 and b[r - n] != 0.0:
                s += a[n] * b[r - n] * _beta(n + alpha, r - n + 1.0 - alpha)
        out[r] = s - (1.0 if r == 0 else 0.0)
    return out


def series_partner(alpha: float, a: Sequence[float], M: int) -> SeriesPair:
    """Coefficients of the Sonine partner of a power-series kernel.

    Matching powers of ``t`` in ``k * l = 1`` with
    ``t**(n+alpha-1) * t**(m-alpha) = B(n+alpha, m+1-alpha) t**(n+m)`` gives a
    triangular recursion for ``b_0, ..., b_M``.
    """
    _check_alpha(alpha)
    if int(M) != M or M < 0:
        raise InvalidArgument(f"truncation order must be a non-negative integer, got {M}")
    M = int(M)
    a = [float(x) for x in a]
    if not a or a[0] == 0.0:
        raise InvalidArgument("leading coefficient a_0 must not vanish")
    a = a + [0.0] * max(0, M + 1 - len(a))
    b = [0.0] * (M + 1)
    b[0] = 1.0 / (a[0] * _beta(alpha, 1.0 - alpha))
    for r in range(1, M + 1):
        s = 0.0
        for n in range(1, r + 1):
            if a[n] != 0.0 and b[r - n] != 0.0:
                s += a[n] * b[r - n] * _beta(n + alpha, r - n + 1.0 - alpha)
        b[r] = -s / (a[0] * _beta(alpha, r + 1.0 - alpha))
    return SeriesPair(alpha=float(alpha), a=tuple(a[: M + 1]), b=tuple(b), M=M)


def tempered_series_coefficients(alpha: float, lam: float, M: int) -> list[float]:
    """Taylor coefficients of ``exp(-lam t) / Gamma(alpha)`` up to order ``M``."""
    return [
        (-lam) ** n * math.exp(-math.lgamma(n + 1.0) - math.lgamma(alpha)) for n in range(M + 1)
    ]
