from __future__ import annotations

import math

import numpy as np
import pytest

from _oracles import max_rel
from sonine.convolve import (
    MomentTable,
    build_moments,
    discrete_convolve,
    solve_duality,
    solve_sonine,
    volterra_solve,
)
from sonine.core import SampledMatrixFunction, make_graded_grid, make_probes, make_uniform_grid
from sonine.errors import InvalidArgument, SingularLeadingMoment, Unsupported
from sonine.kernels import (
    Constant,
    DiagonalOfScalars,
    Exponential,
    OneMinusExp,
    PowerLaw,
    ScalarTimesMatrix,
    TemperedPowerLaw,
)

K0 = np.array([[2.0, 1.0], [1.0, 2.0]])
G15 = math.gamma(1.5)


def test_build_moments_examples():
    mu = build_moments(Exponential(1.0), make_uniform_grid(2.0, 2)).moments[:, 0, 0]
    np.testing.assert_allclose(mu, [1 - math.exp(-1), math.exp(-1) - math.exp(-2)], rtol=1e-15)
    mu = build_moments(PowerLaw(0.5), make_uniform_grid(1.0, 2)).moments[:, 0, 0]
    np.testing.assert_allclose(mu, [0.5 ** 0.5 / G15, (1 - 0.5 ** 0.5) / G15], rtol=1e-14)
    with pytest.raises(Unsupported):
        build_moments(PowerLaw(0.5), make_graded_grid(1.0, 10, 2.0))


def test_build_moments_sampled_kernel():
    g = make_uniform_grid(1.0, 200)
    f = SampledMatrixFunction(g, np.exp(-g.nodes), value_at_zero=1.0)
    mu = build_moments(f, g).moments[:, 0, 0]
    exact = build_moments(Exponential(1.0), g).moments[:, 0, 0]
    np.testing.assert_allclose(mu, exact, rtol=1e-4)
    with pytest.raises(Unsupported, match="KernelSpec"):
        build_moments(SampledMatrixFunction(g, g.nodes ** -0.5), g)


def test_moment_total_is_integral():
    g = make_uniform_grid(1.0, 100)
    np.testing.assert_allclose(build_moments(PowerLaw(0.5), g).total, [[2 / math.sqrt(math.pi)]], rtol=1e-13)


def test_discrete_convolve_examples():
    g = make_uniform_grid(1.0, 1000)
    table = build_moments(Exponential(1.0), g)
    one = SampledMatrixFunction(g, np.ones(g.N))
    np.testing.assert_allclose(discrete_convolve(table, one).values[:, 0, 0], 1 - np.exp(-g.nodes), rtol=1e-12)
    zero = SampledMatrixFunction(g, np.zeros(g.N))
    np.testing.assert_array_equal(discrete_convolve(table, zero).values, 0.0)
    pl = build_moments(PowerLaw(0.5), g)
    np.testing.assert_allclose(discrete_convolve(pl, one).values[-1, 0, 0], 1 / G15, rtol=1e-13)
    with pytest.raises(InvalidArgument):
        discrete_convolve(table, SampledMatrixFunction(make_uniform_grid(1.0, 10), np.ones(10)))


def test_discrete_convolve_exact_for_piecewise_constants():
    # X = 1 on (0, 0.5], 3 on (0.5, 1]; (A*X)(t) = A1(t) + 2 A1(t - 0.5), A1 = int_0^t A
    g = make_uniform_grid(1.0, 10)
    X = SampledMatrixFunction(g, np.where(g.nodes <= 0.5, 1.0, 3.0))
    got = discrete_convolve(build_moments(PowerLaw(0.3), g), X).values[:, 0, 0]
    A1 = lambda t: np.where(t > 0, np.maximum(t, 0) ** 0.3 / math.gamma(1.3), 0.0)
    np.testing.assert_allclose(got, A1(g.nodes) + 2 * A1(g.nodes - 0.5), rtol=1e-13)


def test_volterra_solve_examples():
    g = make_uniform_grid(1.0, 1000)
    R = SampledMatrixFunction(g, 1 - np.exp(-g.nodes))
    X = volterra_solve(build_moments(Exponential(1.0), g), R)
    np.testing.assert_allclose(X.values, 1.0, rtol=1e-10)
    X = volterra_solve(build_moments(PowerLaw(0.5), g), SampledMatrixFunction(g, g.nodes))
    assert abs(X.values[-1, 0, 0] - 1 / G15) / (1 / G15) <= 1e-2


def test_volterra_solve_refuses_zero_leading_moment():
    g = make_uniform_grid(1.0, 10)
    with pytest.raises(SingularLeadingMoment):
        volterra_solve(MomentTable(g, np.zeros((10, 1, 1))), SampledMatrixFunction(g, np.ones(10)))
    mu = np.zeros((10, 2, 2))
    mu[:, 0, 0] = 1.0
    with pytest.raises(SingularLeadingMoment):
        volterra_solve(MomentTable(g, mu), SampledMatrixFunction(g, np.ones((10, 2, 2))))


@pytest.mark.parametrize(
    "A", [PowerLaw(0.5), TemperedPowerLaw(0.3, 2.0), Exponential(1.0), OneMinusExp(1.0),
          ScalarTimesMatrix(PowerLaw(0.5), K0), DiagonalOfScalars((PowerLaw(0.3), Exponential(2.0)))],
    ids=repr,
)
def test_solve_then_convolve_round_trip(A):
    g = make_uniform_grid(1.0, 300)
    table = build_moments(A, g)
    rng = np.random.default_rng(1)
    # a random symmetric R need not give a symmetric X for matrix kernels, so
    # the random part is a scalar profile times the identity
    R = SampledMatrixFunction(g, rng.standard_normal(g.N)[:, None, None] * np.eye(A.m))
    X = volterra_solve(table, R)
    back = discrete_convolve(table, X)
    cond = np.linalg.cond(table.moments[0])
    assert np.max(np.abs(back.values - R.values)) <= 1e-9 * cond


@pytest.mark.parametrize("A", [PowerLaw(0.5), TemperedPowerLaw(0.3, 2.0), Exponential(1.0)], ids=repr)
def test_transposed_scheme_agrees_for_scalar_kernels(A):
    g = make_uniform_grid(1.0, 200)
    table = build_moments(A, g)
    R = SampledMatrixFunction(g, np.sin(3 * g.nodes) + 1)
    np.testing.assert_allclose(
        volterra_solve(table, R).values, volterra_solve(table, R, transpose=True).values, rtol=1e-13
    )


def test_duality_power_law_identity_matrix():
    A = ScalarTimesMatrix(PowerLaw(0.5), np.eye(2))
    g = make_uniform_grid(1.0, 1000)
    X = solve_duality(A, g)
    exact = 2 * np.sqrt(g.nodes / np.pi)[:, None, None] * np.eye(2)
    assert max_rel(X.regular.values, exact)[g.nodes >= 0.05].max() <= 1e-2


def test_duality_matrix_power_law():
    A = ScalarTimesMatrix(PowerLaw(0.5), K0)
    g = make_uniform_grid(1.0, 1000)
    X = solve_duality(A, g)
    exact = 2 * np.sqrt(g.nodes / np.pi)[:, None, None] * np.linalg.inv(K0)
    assert max_rel(X.regular.values, exact)[g.nodes >= 0.05].max() <= 1e-2


def test_duality_bernstein_kernel_extracts_atom():
    X = solve_duality(OneMinusExp(1.0), make_uniform_grid(1.0, 1000))
    np.testing.assert_array_equal(X.atom, [[1.0]])
    np.testing.assert_allclose(X.regular.values, 1.0, atol=1e-6)


def test_duality_licm_output_carries_passing_certificate():
    X = solve_duality(PowerLaw(0.5), make_uniform_grid(1.0, 500))
    assert X.regular.certified


def test_duality_positivity_on_probes():
    for A in (ScalarTimesMatrix(PowerLaw(0.5), K0), DiagonalOfScalars((PowerLaw(0.3), Exponential(2.0)))):
        X = solve_duality(A, make_uniform_grid(1.0, 200))
        assert np.all(make_probes(2).quadratic_forms(X.regular.values) >= 0.0)


def test_sonine_exponential():
    X = solve_sonine(Exponential(1.0), make_uniform_grid(1.0, 1000))
    np.testing.assert_array_equal(X.atom, [[1.0]])
    np.testing.assert_allclose(X.regular.values, 1.0, atol=1e-3)


def test_sonine_constant_kernel():
    X = solve_sonine(Constant(2.0), make_uniform_grid(1.0, 50))
    np.testing.assert_array_equal(X.atom, [[0.5]])
    np.testing.assert_allclose(X.regular.values, 0.0, atol=1e-14)


def test_sonine_unsupported_without_limit():
    with pytest.raises(Unsupported):
        solve_sonine(OneMinusExp(1.0), make_uniform_grid(1.0, 10))


@pytest.mark.xfail(strict=True, reason="documented example tolerance is below the scheme's reach: "
                   "the relative error at node n depends only on n for power laws")
def test_sonine_power_law_documented_tolerance():
    g = make_uniform_grid(1.0, 1000)
    F = solve_sonine(PowerLaw(0.5), g).regular.values[:, 0, 0]
    exact = g.nodes ** -0.5 / math.sqrt(math.pi)
    assert np.max(np.abs(F - exact)[5:] / exact[5:]) <= 2e-2


def test_sonine_power_law_error_is_index_only_near_zero():
    # X_n h^alpha is the same sequence for every h, so the error at a fixed node
    # index cannot shrink with refinement; what converges is fixed physical time
    errs = []
    for N in (500, 1000):
        g = make_uniform_grid(1.0, N)
        F = solve_sonine(PowerLaw(0.5), g).regular.values[:, 0, 0]
        exact = g.nodes ** -0.5 / math.sqrt(math.pi)
        errs.append(np.abs(F - exact)[5:20] / exact[5:20])
    np.testing.assert_allclose(errs[0], errs[1], rtol=1e-10)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_sonine_power_law_converges_on_fixed_window(alpha):
    errs = []
    for N in (500, 1000, 2000):
        g = make_uniform_grid(1.0, N)
        F = solve_sonine(PowerLaw(alpha), g).regular.values[:, 0, 0]
        exact = g.nodes ** -alpha / math.gamma(1 - alpha)
        win = g.nodes >= 0.05
        errs.append(np.max(np.abs(F - exact)[win] / exact[win]))
    assert errs[-1] <= 2e-2
    for a, b in zip(errs, errs[1:]):
        assert 1.6 <= a / b <= 2.4


def test_duality_first_order_convergence():
    errs = []
    for N in (250, 500, 1000, 2000):
        g = make_uniform_grid(1.0, N)
        X = solve_duality(PowerLaw(0.5), g).regular.values[:, 0, 0]
        exact = 2 * np.sqrt(g.nodes / np.pi)
        win = g.nodes >= 0.05
        errs.append(np.max(np.abs(X - exact)[win]))
    for a, b in zip(errs, errs[1:]):
        assert 1.6 <= a / b <= 2.4
