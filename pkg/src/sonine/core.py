"""Grids, symmetric matrices, sampled matrix functions and the delta-plus-function
representation shared by the rest of the package.

Symmetric matrices are plain ``(m, m)`` float arrays; :func:`as_sym_matrix`
validates and symmetrizes them at the boundaries.  Sampled functions hold one
matrix per grid node in an ``(N, m, m)`` array.  Everything is immutable after
construction (arrays are flagged read-only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.linalg import lapack

from .errors import InvalidArgument, OutOfRange, SingularMatrix

if TYPE_CHECKING:
    from .analysis import CertReport

SYMMETRY_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# Grids
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid:
    """Time nodes ``t_1 < ... < t_N = T`` on ``(0, T]``; ``t = 0`` is never a node."""

    T: float
    N: int
    nodes: np.ndarray
    gamma: float = 1.0

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.shape != (self.N,):
            raise InvalidArgument(f"expected {self.N} nodes, got shape {nodes.shape}")
        if nodes[0] <= 0.0 or np.any(np.diff(nodes) <= 0.0):
            raise InvalidArgument("grid nodes must be strictly increasing and positive")
        object.__setattr__(self, "nodes", nodes)

    @property
    def is_uniform(self) -> bool:
        return self.gamma == 1.0

    @property
    def h(self) -> float:
        """Cell width of a uniform grid."""
        if not self.is_uniform:
            raise InvalidArgument("cell width is only defined for uniform grids")
        return self.T / self.N

    @property
    def edges(self) -> np.ndarray:
        """Cell boundaries ``0 = e_0 < e_1 < ... < e_N = T``."""
        return np.concatenate(([0.0], self.nodes))

    def same_as(self, other: Grid) -> bool:
        return (
            self.N == other.N
            and self.T == other.T
            and self.gamma == other.gamma
            and np.array_equal(self.nodes, other.nodes)
        )

    def to_dict(self) -> dict[str, Any]:
        return {"T": self.T, "N": self.N, "gamma": self.gamma}


def make_uniform_grid(T: float, N: int) -> Grid:
    """Uniform grid with nodes ``t_i = i*T/N``, ``i = 1..N``."""
    if not T > 0 or not math.isfinite(T):
        raise InvalidArgument(f"time horizon must be positive, got T={T}")
    if int(N) != N or N < 2:
        raise InvalidArgument(f"need at least 2 cells, got N={N}")
    N = int(N)
    nodes = np.arange(1, N + 1, dtype=float) * T / N
    nodes[-1] = T
    return Grid(T=float(T), N=N, nodes=nodes, gamma=1.0)


def make_graded_grid(T: float, N: int, gamma: float) -> Grid:
    """Grid graded toward 0 with nodes ``t_i = T*(i/N)**gamma``.

    ``gamma == 1`` returns exactly the uniform grid.
    """
    if not gamma >= 1.0:
        raise InvalidArgument(f"grading exponent must be >= 1, got {gamma}")
    if gamma == 1.0:
        return make_uniform_grid(T, N)
    uniform = make_uniform_grid(T, N)
    nodes = T * (np.arange(1, uniform.N + 1, dtype=float) / uniform.N) ** gamma
    nodes[-1] = T
    return Grid(T=uniform.T, N=uniform.N, nodes=nodes, gamma=float(gamma))


# --------------------------------------------------------------------------
# Symmetric matrices
# --------------------------------------------------------------------------


def as_sym_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a read-only symmetric ``(m, m)`` array.

    Scalars become ``1x1`` matrices.  Asymmetry beyond round-off is rejected;
    anything within round-off is averaged away so downstream code can rely on
    exact symmetry.
    """
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument(f"{name} has non-finite entries")
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise InvalidArgument(f"{name} is not symmetric")
    return _frozen(0.5 * (a + a.T))


def _cholesky(M: np.ndarray) -> np.ndarray:
    c, info = lapack.dpotrf(np.asarray(M, dtype=float), lower=True, clean=True)
    if info > 0:
        raise SingularMatrix(
            f"matrix is not positive definite: leading minor of order {info} is not positive",
            minor=int(info),
        )
    if info < 0:
        raise InvalidArgument(f"invalid matrix passed to factorization (argument {-info})")
    return c


def is_spd(M) -> bool:
    """True when a Cholesky factorization of ``M`` succeeds."""
    try:
        _cholesky(as_sym_matrix(M))
    except SingularMatrix:
        return False
    return True


def spd_inverse(M) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky.

    Raises :class:`SingularMatrix` naming the first leading minor that fails.
    """
    M = as_sym_matrix(M)
    c = _cholesky(M)
    inv, info = lapack.dpotri(c, lower=True)
    if info != 0:
        raise SingularMatrix(f"inversion failed (info={info})", minor=int(info))
    inv = np.tril(inv) + np.tril(inv, -1).T
    return _frozen(inv)


def is_psd(M, rtol: float = 1e-12) -> bool:
    M = as_sym_matrix(M)
    w = np.linalg.eigvalsh(M)
    scale = max(float(np.max(np.abs(M))), 1e-300)
    return bool(w[0] >= -rtol * scale)


# --------------------------------------------------------------------------
# Probe directions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProbeSet:
    """Finite set of unit directions standing in for "every v in R^m"."""

    vectors: np.ndarray

    def __post_init__(self):
        v = _frozen(self.vectors)
        if v.ndim != 2:
            raise InvalidArgument("probe vectors must be a 2-d array")
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > 1e-12):
            raise InvalidArgument("probe vectors must be unit-norm")
        object.__setattr__(self, "vectors", v)

    @property
    def m(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def quadratic_forms(self, mats: np.ndarray) -> np.ndarray:
        """``v^T M v`` for every probe; output shape ``mats.shape[:-2] + (n_probes,)``."""
        return np.einsum("pi,...ij,pj->...p", self.vectors, mats, self.vectors)


def make_probes(m: int, seed: int = 42, n_random: int = 8) -> ProbeSet:
    """Standard basis plus ``n_random`` seeded random unit directions (none for m=1)."""
    if m < 1:
        raise InvalidArgument("rank must be positive")
    vecs = [np.eye(m)]
    if m > 1 and n_random > 0:
        r = np.random.default_rng(seed).standard_normal((n_random, m))
        vecs.append(r / np.linalg.norm(r, axis=1, keepdims=True))
    return ProbeSet(np.vstack(vecs))


# --------------------------------------------------------------------------
# Sampled functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledMatrixFunction:
    """One symmetric matrix per grid node.

    ``value_at_zero`` holds the finite limit at ``t = 0`` when it exists; its
    presence is what marks the function as bounded at zero.  ``certificate``
    optionally carries the certification report the producer ran.
    """

    grid: Grid
    values: np.ndarray
    value_at_zero: np.ndarray | None = None
    certificate: CertReport | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1, 1)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise InvalidArgument(f"values must have shape (N, m, m), got {v.shape}")
        if v.shape[0] != self.grid.N:
            raise InvalidArgument(f"expected {self.grid.N} values, got {v.shape[0]}")
        scale = np.maximum(np.max(np.abs(v), axis=(1, 2)), 1e-300)
        asym = np.max(np.abs(v - np.swapaxes(v, 1, 2)), axis=(1, 2))
        if np.any(asym > SYMMETRY_RTOL * scale):
            raise InvalidArgument("sampled values are not symmetric")
        object.__setattr__(self, "values", _frozen(0.5 * (v + np.swapaxes(v, 1, 2))))
        if self.value_at_zero is not None:
            object.__setattr__(self, "value_at_zero", as_sym_matrix(self.value_at_zero))

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def bounded_at_zero(self) -> bool:
        return self.value_at_zero is not None

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.passed


def eval_sampled(f: SampledMatrixFunction, t: float) -> np.ndarray:
    """Piecewise-linear interpolation of ``f`` at ``t`` in ``(0, T]``.

    Between 0 and the first node the interpolation uses ``value_at_zero`` when
    known and holds the first value otherwise.
    """
    nodes = f.grid.nodes
    if not (0.0 < t <= nodes[-1]):
        raise OutOfRange(f"t={t} outside (0, {nodes[-1]}]")
    i = int(np.searchsorted(nodes, t))
    if nodes[i] == t:
        return f.values[i]
    if i == 0:
        if f.value_at_zero is None:
            return f.values[0]
        t0, v0 = 0.0, f.value_at_zero
    else:
        t0, v0 = nodes[i - 1], f.values[i - 1]
    w = (t - t0) / (nodes[i] - t0)
    return _frozen((1.0 - w) * v0 + w * f.values[i])


@dataclass(frozen=True, eq=False)
class DeltaPlusFunction:
    """``X(t) = atom * delta(t) + regular(t)``.

    ``regular`` is either a :class:`SampledMatrixFunction` or a kernel spec
    from :mod:`sonine.kernels`.
    """

    atom: np.ndarray
    regular: Any

    def __post_init__(self):
        atom = as_sym_matrix(self.atom, "atom")
        if not is_psd(atom):
            raise InvalidArgument("atom must be positive semidefinite")
        object.__setattr__(self, "atom", atom)
        if atom.shape[0] != self.regular.m:
            raise InvalidArgument("atom and regular part have different ranks")

    @property
    def m(self) -> int:
        return self.atom.shape[0]

    @property
    def has_atom(self) -> bool:
        return bool(np.any(self.atom != 0.0))
