from __future__ import annotations

import numpy as np
import pytest

from sonine.core import (
    DeltaPlusFunction,
    SampledMatrixFunction,
    eval_sampled,
    is_spd,
    make_graded_grid,
    make_probes,
    make_uniform_grid,
    spd_inverse,
)
from sonine.errors import InvalidArgument, OutOfRange, SingularMatrix


def test_uniform_grid_nodes():
    np.testing.assert_array_equal(make_uniform_grid(1.0, 4).nodes, [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_array_equal(make_uniform_grid(2.0, 2).nodes, [1.0, 2.0])


@pytest.mark.parametrize("T, N", [(1.0, 1), (0.0, 4), (-1.0, 4)])
def test_uniform_grid_rejects_bad_input(T, N):
    with pytest.raises(InvalidArgument):
        make_uniform_grid(T, N)


def test_uniform_grid_matches_i_T_over_N_exactly():
    g = make_uniform_grid(3.0, 7)
    np.testing.assert_array_equal(g.nodes, np.arange(1, 8) * 3.0 / 7)
    assert g.nodes[-1] == 3.0


def test_graded_grid():
    np.testing.assert_array_equal(make_graded_grid(1.0, 2, 2.0).nodes, [0.25, 1.0])
    g = make_graded_grid(1.0, 4, 1.0)
    assert g.same_as(make_uniform_grid(1.0, 4))
    np.testing.assert_array_equal(g.nodes, make_uniform_grid(1.0, 4).nodes)
    with pytest.raises(InvalidArgument):
        make_graded_grid(1.0, 4, 0.5)


def test_graded_grid_is_not_uniform():
    g = make_graded_grid(1.0, 10, 2.0)
    assert not g.is_uniform
    assert np.all(np.diff(g.nodes) > 0)
    with pytest.raises(InvalidArgument):
        g.h


def test_spd_inverse_examples():
    np.testing.assert_allclose(spd_inverse(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(
        spd_inverse([[2.0, 1.0], [1.0, 2.0]]), [[2 / 3, -1 / 3], [-1 / 3, 2 / 3]], rtol=1e-14
    )


def test_spd_inverse_singular_names_minor():
    with pytest.raises(SingularMatrix) as err:
        spd_inverse([[1.0, 1.0], [1.0, 1.0]])
    assert err.value.minor == 2
    assert "2" in str(err.value)


def test_spd_inverse_involution():
    rng = np.random.default_rng(0)
    for _ in range(10):
        B = rng.standard_normal((4, 4))
        M = B @ B.T + 4 * np.eye(4)
        assert np.max(np.abs(spd_inverse(spd_inverse(M)) - M)) <= 1e-10


def test_asymmetric_input_rejected():
    with pytest.raises(InvalidArgument):
        spd_inverse([[1.0, 0.5], [0.0, 1.0]])


def test_probes_contain_basis_and_are_unit():
    P = make_probes(3)
    np.testing.assert_array_equal(P.vectors[:3], np.eye(3))
    np.testing.assert_allclose(np.linalg.norm(P.vectors, axis=1), 1.0, atol=1e-12)
    assert len(P) == 11
    assert len(make_probes(1)) == 1


def test_probes_deterministic_per_seed():
    np.testing.assert_array_equal(make_probes(2).vectors, make_probes(2, seed=42).vectors)
    assert not np.array_equal(make_probes(2, seed=1).vectors, make_probes(2, seed=2).vectors)


def test_spd_positive_on_probes():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert is_spd(M)
    assert np.all(make_probes(2).quadratic_forms(M) > 0)


def test_eval_sampled():
    g = make_uniform_grid(1.0, 4)
    vals = np.arange(4.0) + 1.0
    f = SampledMatrixFunction(g, vals)
    np.testing.assert_array_equal(eval_sampled(f, 0.5), [[2.0]])
    np.testing.assert_allclose(eval_sampled(f, 0.625), [[2.5]])
    # below the first node: held, or interpolated to the value at zero
    np.testing.assert_array_equal(eval_sampled(f, 0.1), [[1.0]])
    f0 = SampledMatrixFunction(g, vals, value_at_zero=0.0)
    np.testing.assert_allclose(eval_sampled(f0, 0.125), [[0.5]])
    with pytest.raises(OutOfRange):
        eval_sampled(f, 1.5)
    with pytest.raises(OutOfRange):
        eval_sampled(f, 0.0)


def test_sampled_function_is_immutable_and_symmetric():
    g = make_uniform_grid(1.0, 2)
    f = SampledMatrixFunction(g, np.array([[[1.0, 0.2], [0.2, 1.0]]] * 2))
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 3.0
    with pytest.raises(InvalidArgument):
        SampledMatrixFunction(g, np.array([[[1.0, 0.2], [0.0, 1.0]]] * 2))
    with pytest.raises(InvalidArgument):
        SampledMatrixFunction(g, np.ones(3))


def test_delta_plus_function_atom_must_be_psd():
    g = make_uniform_grid(1.0, 2)
    f = SampledMatrixFunction(g, np.ones(2))
    assert DeltaPlusFunction(1.0, f).has_atom
    assert not DeltaPlusFunction(0.0, f).has_atom
    with pytest.raises(InvalidArgument):
        DeltaPlusFunction(-1.0, f)
    with pytest.raises(InvalidArgument):
        DeltaPlusFunction(np.eye(2), f)
