from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, special

from sonine.errors import InvalidArgument, OutOfRange, Unsupported
from sonine.kernels import (
    BesselI,
    BesselK,
    Constant,
    DiagonalOfScalars,
    Exponential,
    OneMinusExp,
    PowerLaw,
    ScalarTimesMatrix,
    SeriesKernel,
    SoninePartnerOfPowerLaw,
    TemperedPartner,
    TemperedPowerLaw,
    cell_moment,
    eval_kernel,
    laplace_closed_form,
    limit_inverse_at_zero,
    pairing_residual,
    series_partner,
    sonine_partner,
    tempered_series_coefficients,
)

K0 = np.array([[2.0, 1.0], [1.0, 2.0]])

SCALARS = [
    PowerLaw(0.5),
    PowerLaw(0.3),
    SoninePartnerOfPowerLaw(0.7),
    TemperedPowerLaw(0.4, 2.0),
    TemperedPartner(0.5, 1.0),
    Exponential(1.5),
    OneMinusExp(2.0),
    Constant(3.0),
    BesselK(0.5),
    BesselI(0.3),
    SeriesKernel(0.5, (1.0, -0.5, 0.25)),
]


def _scalar(k, t):
    return float(k.values(np.array([t]))[0, 0, 0])


def test_eval_kernel_examples():
    np.testing.assert_allclose(eval_kernel(PowerLaw(0.5), 1.0), [[1 / math.sqrt(math.pi)]], rtol=1e-15)
    np.testing.assert_array_equal(Exponential(1.0).value_at_zero(), [[1.0]])
    np.testing.assert_allclose(
        eval_kernel(ScalarTimesMatrix(PowerLaw(0.5), K0), 1.0), K0 / math.sqrt(math.pi), rtol=1e-15
    )
    with pytest.raises(OutOfRange):
        eval_kernel(PowerLaw(0.5), 0.0)


def test_values_against_textbook_formulas():
    t = np.array([0.1, 0.7, 3.0])
    np.testing.assert_allclose(
        TemperedPowerLaw(0.4, 2.0).values(t)[:, 0, 0],
        t ** -0.6 * np.exp(-2 * t) / special.gamma(0.4), rtol=1e-14,
    )
    np.testing.assert_allclose(OneMinusExp(2.0).values(t)[:, 0, 0], 1 - np.exp(-2 * t), rtol=1e-14)
    # J_{-1/2}(x) = sqrt(2/(pi x)) cos x, so k_{1/2}(t) = cos(2 sqrt t) / sqrt(pi t)
    np.testing.assert_allclose(
        BesselK(0.5).values(t)[:, 0, 0], np.cos(2 * np.sqrt(t)) / np.sqrt(np.pi * t), rtol=1e-12
    )


def test_bessel_k_changes_sign_on_0_10():
    t = np.linspace(0.01, 10, 2000)
    v = BesselK(0.5).values(t)[:, 0, 0]
    assert v.min() < 0 < v.max()
    # first zero at 2 sqrt(t) = pi/2
    assert _scalar(BesselK(0.5), np.pi ** 2 / 16 - 1e-6) > 0 > _scalar(BesselK(0.5), np.pi ** 2 / 16 + 1e-6)


@pytest.mark.parametrize("k", SCALARS, ids=repr)
def test_cell_moments_match_adaptive_quadrature(k):
    f = lambda s: _scalar(k, s)
    for a, b in [(0.0, 0.01), (0.0, 1.0), (0.3, 0.35), (2.0, 5.0)]:
        if k.singular_at_zero and a == 0.0:
            # integrable endpoint singularity: let quad handle it via an algebraic weight split
            ref = integrate.quad(f, a, b, limit=200, epsabs=0, epsrel=1e-12)[0]
        else:
            ref = integrate.quad(f, a, b, epsabs=0, epsrel=1e-13)[0]
        np.testing.assert_allclose(cell_moment(k, a, b)[0, 0], ref, rtol=1e-8, atol=1e-14)


def test_cell_moment_examples():
    np.testing.assert_allclose(cell_moment(PowerLaw(0.5), 0.0, 1.0), [[2 / math.sqrt(math.pi)]], rtol=1e-15)
    np.testing.assert_allclose(cell_moment(Exponential(1.0), 0.0, 50.0), [[1.0]], rtol=1e-15)
    with pytest.raises(InvalidArgument):
        cell_moment(PowerLaw(0.5), 1.0, 1.0)
    with pytest.raises(InvalidArgument):
        cell_moment(PowerLaw(0.5), -1.0, 1.0)


@pytest.mark.parametrize("k", SCALARS, ids=repr)
def test_moment_additivity(k):
    ab = cell_moment(k, 0.2, 0.5)[0, 0]
    bc = cell_moment(k, 0.5, 1.3)[0, 0]
    ac = cell_moment(k, 0.2, 1.3)[0, 0]
    assert abs(ab + bc - ac) <= 1e-12 * max(abs(ac), 1e-300) + 1e-15


def test_laplace_examples():
    np.testing.assert_allclose(laplace_closed_form(PowerLaw(0.5), 1.0), [[1.0]])
    np.testing.assert_allclose(laplace_closed_form(Exponential(1.0), 1.0), [[0.5]])
    np.testing.assert_allclose(laplace_closed_form(BesselK(0.5), 2.0), [[0.4288819425]], rtol=1e-10)
    with pytest.raises(OutOfRange):
        laplace_closed_form(PowerLaw(0.5), 0.0)


@pytest.mark.parametrize("k", [k for k in SCALARS if not isinstance(k, (BesselK, BesselI))], ids=repr)
def test_laplace_against_quadrature(k):
    for p in (0.7, 3.0):
        f = lambda s: math.exp(-p * s) * _scalar(k, s)
        ref = integrate.quad(f, 0, 1, limit=200, epsrel=1e-12)[0] + integrate.quad(f, 1, np.inf, epsrel=1e-12)[0]
        np.testing.assert_allclose(laplace_closed_form(k, p)[0, 0], ref, rtol=1e-7)


def test_bessel_i_transform_by_quadrature():
    # L[t^{(lam-1)/2} I_{lam-1}(2 sqrt t)](p) = e^{1/p} p^{-lam}
    k = BesselI(0.5)
    p = 3.0
    f = lambda s: math.exp(-p * s) * _scalar(k, s)
    ref = integrate.quad(f, 0, 1, limit=200, epsrel=1e-12)[0] + integrate.quad(f, 1, 60, limit=200, epsrel=1e-12)[0]
    np.testing.assert_allclose(ref, math.exp(1 / p) * p ** -0.5, rtol=1e-8)
    np.testing.assert_allclose(laplace_closed_form(k, p)[0, 0], ref, rtol=1e-8)


@pytest.mark.parametrize(
    "k", [PowerLaw(0.5), TemperedPowerLaw(0.4, 2.0), Exponential(1.5), BesselK(0.5),
          ScalarTimesMatrix(PowerLaw(0.3), K0), DiagonalOfScalars((PowerLaw(0.5), Exponential(2.0)))],
    ids=repr,
)
def test_partners_multiply_to_one_over_p(k):
    X = sonine_partner(k)
    for p in (0.3, 1.0, 4.0):
        Xt = X.atom + laplace_closed_form(X.regular, p)
        np.testing.assert_allclose(laplace_closed_form(k, p) @ Xt * p, np.eye(k.m), atol=1e-12)


def test_partner_examples():
    X = sonine_partner(PowerLaw(0.5))
    assert not X.has_atom
    assert X.regular == SoninePartnerOfPowerLaw(0.5)
    np.testing.assert_allclose(_scalar(X.regular, 4.0), 0.5 / math.sqrt(math.pi))
    X = sonine_partner(Exponential(1.0))
    np.testing.assert_array_equal(X.atom, [[1.0]])
    np.testing.assert_allclose(X.regular.values(np.array([0.1, 5.0]))[:, 0, 0], 1.0)
    X = sonine_partner(ScalarTimesMatrix(PowerLaw(0.5), K0))
    assert X.regular.scalar == SoninePartnerOfPowerLaw(0.5)
    np.testing.assert_allclose(X.regular.K0, [[2 / 3, -1 / 3], [-1 / 3, 2 / 3]], rtol=1e-14)
    with pytest.raises(Unsupported):
        sonine_partner(OneMinusExp(1.0))


def test_tempered_pair_convolves_to_one():
    k, l = TemperedPowerLaw(0.5, 1.0), TemperedPartner(0.5, 1.0)
    t = 0.8
    f = lambda s: _scalar(k, s) * _scalar(l, t - s)
    conv = integrate.quad(f, 0, t / 2, limit=200)[0] + integrate.quad(f, t / 2, t, limit=200)[0]
    np.testing.assert_allclose(conv, 1.0, rtol=1e-8)


def test_limit_inverse_at_zero():
    np.testing.assert_array_equal(limit_inverse_at_zero(PowerLaw(0.5)), [[0.0]])
    np.testing.assert_array_equal(limit_inverse_at_zero(Exponential(1.0)), [[1.0]])
    assert limit_inverse_at_zero(OneMinusExp(1.0)) is None
    np.testing.assert_allclose(
        limit_inverse_at_zero(ScalarTimesMatrix(Exponential(2.0), K0)), np.linalg.inv(K0) / 1.0, rtol=1e-14
    )


def test_duality_atoms():
    np.testing.assert_array_equal(OneMinusExp(1.0).duality_atom(), [[1.0]])
    np.testing.assert_allclose(OneMinusExp(4.0).duality_atom(), [[0.25]])
    np.testing.assert_array_equal(PowerLaw(0.5).duality_atom(), [[0.0]])


def test_series_partner_examples():
    a0 = 1 / special.gamma(0.5)
    np.testing.assert_allclose(series_partner(0.5, [a0], 0).b, [1 / math.sqrt(math.pi)], rtol=1e-14)
    b = series_partner(0.3, [1 / special.gamma(0.3), 0, 0], 2).b
    np.testing.assert_allclose(b, [1 / special.gamma(0.7), 0, 0], rtol=1e-13, atol=0)
    with pytest.raises(InvalidArgument):
        series_partner(0.5, [0.0, 1.0], 3)


def test_series_partner_tempered_invariant_and_catalog_agreement():
    a = tempered_series_coefficients(0.5, 1.0, 8)
    np.testing.assert_allclose(a, [(-1) ** n / (math.factorial(n) * math.sqrt(math.pi)) for n in range(9)])
    pair = series_partner(0.5, a, 8)
    # independent oracle: direct double sum with scipy's beta
    for r in range(9):
        s = sum(a[n] * pair.b[r - n] * special.beta(n + 0.5, r - n + 0.5) for n in range(r + 1))
        assert abs(s - (r == 0)) <= 1e-10
    assert np.max(np.abs(pairing_residual(0.5, a, pair.b, 8))) <= 1e-10
    t = np.linspace(0.01, 0.5, 50)
    np.testing.assert_allclose(
        pair.partner.values(t)[:, 0, 0], TemperedPartner(0.5, 1.0).values(t)[:, 0, 0], atol=1e-6
    )


def test_series_partner_large_order_stays_finite():
    pair = series_partner(0.5, tempered_series_coefficients(0.5, 1.0, 200), 200)
    assert np.all(np.isfinite(pair.b))


def test_parameter_validation():
    for bad in (lambda: PowerLaw(0.0), lambda: PowerLaw(1.0), lambda: Exponential(-1.0),
                lambda: BesselK(1.5), lambda: ScalarTimesMatrix(PowerLaw(0.5), [[1, 2], [2, 1]]),
                lambda: Constant(-1.0)):
        with pytest.raises(InvalidArgument):
            bad()


def test_classification_flags():
    assert PowerLaw(0.5).licm and PowerLaw(0.5).singular_at_zero
    assert OneMinusExp(1.0).bernstein and not OneMinusExp(1.0).licm
    assert not BesselK(0.5).licm and not BesselI(0.5).licm
