"""Product-integration convolution and triangular Volterra solves.

The unknown is piecewise constant on the cells of a uniform grid, with value
``X_j`` on ``(t_{j-1}, t_j]``, and the kernel is integrated exactly over each
cell.  With ``mu_k = int_{kh}^{(k+1)h} A`` this gives

    (A * X)(t_n) = sum_{j=1}^{n} mu_{n-j} X_j,

exact for piecewise-constant ``X`` and valid for kernels with an integrable
singularity at 0.  Solving for ``X_n`` is a forward substitution with the
leading moment ``mu_0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DeltaPlusFunction, Grid, SampledMatrixFunction, eval_sampled, spd_inverse
from .errors import InvalidArgument, SingularLeadingMoment, SingularMatrix, Unsupported
from .kernels import KernelSpec

NEAR_SINGULAR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Cell integrals ``mu_k`` of a kernel on a uniform grid, shape ``(N, m, m)``."""

    grid: Grid
    moments: np.ndarray

    def __post_init__(self):
        mu = np.array(self.moments, dtype=float)
        if mu.ndim != 3 or mu.shape[0] != self.grid.N:
            raise InvalidArgument(f"moments must have shape (N, m, m), got {mu.shape}")
        if not np.all(np.isfinite(mu)):
            raise InvalidArgument("moments must be finite")
        mu.setflags(write=False)
        object.__setattr__(self, "moments", mu)

    @property
    def m(self) -> int:
        return self.moments.shape[1]

    @property
    def total(self) -> np.ndarray:
        """Sum of all moments, left to right; approximates ``int_0^T A``."""
        out = np.zeros((self.m, self.m))
        for mu in self.moments:
            out = out + mu
        return out


def _require_uniform(grid: Grid) -> None:
    if not grid.is_uniform:
        raise Unsupported("product integration needs a uniform grid")


def kernel_moments(A: KernelSpec, grid: Grid) -> np.ndarray:
    edges = np.arange(grid.N + 1, dtype=float) * grid.T / grid.N
    edges[-1] = grid.T
    return A.integrals(edges[:-1], edges[1:])


def build_moments(A: KernelSpec | SampledMatrixFunction, grid: Grid) -> MomentTable:
    """Moment table for a kernel spec (exact) or a sampled kernel (midpoint rule).

    Sampled kernels must be bounded at 0 (carry ``value_at_zero``): a sampled
    singular kernel cannot be integrated to useful accuracy.
    """
    _require_uniform(grid)
    if isinstance(A, KernelSpec):
        return MomentTable(grid, kernel_moments(A, grid))
    if isinstance(A, SampledMatrixFunction):
        if not A.grid.same_as(grid):
            raise InvalidArgument("sampled kernel lives on a different grid")
        if not A.bounded_at_zero:
            raise Unsupported(
                "sampled kernel is not flagged bounded at 0; supply a KernelSpec with exact moments"
            )
        h = grid.h
        mids = (np.arange(grid.N) + 0.5) * h
        return MomentTable(grid, np.stack([eval_sampled(A, t) * h for t in mids]))
    raise InvalidArgument(f"cannot build moments from {type(A).__name__}")


def piecewise_constant_moments(f: SampledMatrixFunction) -> MomentTable:
    """Moments of ``f`` read as piecewise constant, ``h * f_j``.

    This is the exact integral of the solver's own output, whose representation
    is piecewise constant, so it is valid even when ``f`` blows up at 0.
    """
    _require_uniform(f.grid)
    return MomentTable(f.grid, f.values * f.grid.h)


def toeplitz_apply(mu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``y_n = sum_{j<=n} mu_{n-j} x_j`` for ``mu`` of shape ``(N, m, m)`` and ``x``
    of shape ``(N, m)`` or ``(N, m, k)``."""
    N, m, _ = mu.shape
    vec = x.ndim == 2
    xx = x[..., None] if vec else x
    out = np.zeros((N, m, xx.shape[2]))
    for a in range(m):
        for b in range(m):
            if not np.any(mu[:, a, b]):
                continue
            for c in range(xx.shape[2]):
                out[:, a, c] += np.convolve(mu[:, a, b], xx[:, b, c])[:N]
    return out[..., 0] if vec else out


def discrete_convolve(A_moments: MomentTable, X: SampledMatrixFunction) -> SampledMatrixFunction:
    """``(A * X)(t_n)`` for ``X`` read as piecewise constant."""
    if not A_moments.grid.same_as(X.grid):
        raise InvalidArgument("moment table and function live on different grids")
    if A_moments.m != X.m:
        raise InvalidArgument(f"rank mismatch: kernel {A_moments.m}, function {X.m}")
    return SampledMatrixFunction(X.grid, toeplitz_apply(A_moments.moments, X.values))


def leading_inverse(A_moments: MomentTable) -> np.ndarray:
    """Inverse of ``mu_0``; refuses singular or near-singular leading moments."""
    mu0 = A_moments.moments[0]
    scale = float(np.max(np.abs(mu0)))
    if scale == 0.0:
        raise SingularLeadingMoment(
            "leading moment vanishes: the kernel vanishes identically near t = 0"
        )
    eig = np.linalg.eigvalsh(mu0)
    if eig[0] < NEAR_SINGULAR_RTOL * scale:
        raise SingularLeadingMoment(
            f"leading moment is not positive definite (smallest eigenvalue {eig[0]:.3e}, "
            f"norm {scale:.3e}); some direction v has v^T A v vanishing near 0"
        )
    try:
        return spd_inverse(mu0)
    except SingularMatrix as exc:
        raise SingularLeadingMoment(str(exc)) from exc


def _solve(mu: np.ndarray, R: np.ndarray, mu0_inv: np.ndarray, transpose: bool) -> np.ndarray:
    N = R.shape[0]
    X = np.zeros_like(R)
    for n in range(N):
        rhs = R[n]
        if n:
            if transpose:
                rhs = rhs - np.einsum("kab,kbc->ac", X[:n], mu[n:0:-1])
            else:
                rhs = rhs - np.einsum("kab,kbc->ac", mu[n:0:-1], X[:n])
        X[n] = rhs @ mu0_inv if transpose else mu0_inv @ rhs
    return X


def volterra_solve(
    A_moments: MomentTable, R: SampledMatrixFunction, transpose: bool = False
) -> SampledMatrixFunction:
    """Solve ``A * X = R`` at the nodes by forward substitution.

    With ``transpose=True`` solves ``X * A = R`` instead.
    """
    if not A_moments.grid.same_as(R.grid):
        raise InvalidArgument("moment table and right side live on different grids")
    if A_moments.m != R.m:
        raise InvalidArgument(f"rank mismatch: kernel {A_moments.m}, right side {R.m}")
    mu0_inv = leading_inverse(A_moments)
    X = _solve(A_moments.moments, np.array(R.values), mu0_inv, transpose)
    return SampledMatrixFunction(R.grid, X)


def _identity_rhs(grid: Grid, m: int, scale: np.ndarray) -> np.ndarray:
    return scale[:, None, None] * np.eye(m)


def solve_duality(A: KernelSpec, grid: Grid) -> DeltaPlusFunction:
    """Solve ``A * X = t I``.

    For a Bernstein kernel the solution carries a delta atom ``B``; it is taken
    from the closed-form transform limit and moved to the right side, so only
    the regular part is solved on the grid.  For LICM kernels the atom is zero
    and the returned regular part carries a nonnegative/nondecreasing check.
    """
    _require_uniform(grid)
    atom = A.duality_atom()
    if atom is None:
        raise Unsupported(f"no closed-form delta atom for the duality solution of {A!r}")
    R = _identity_rhs(grid, A.m, grid.nodes)
    if np.any(atom != 0.0):
        R = R - A.values(grid.nodes) @ atom
    table = build_moments(A, grid)
    X = volterra_solve(table, SampledMatrixFunction(grid, R))
    if A.licm:
        from .analysis import bernstein_certify
        from .core import make_probes

        report = bernstein_certify(X, n_max=1, grid=grid, probes=make_probes(A.m))
        X = SampledMatrixFunction(grid, X.values, certificate=report)
    return DeltaPlusFunction(atom, X)


def solve_sonine(A: KernelSpec, grid: Grid) -> DeltaPlusFunction:
    """Solve ``A * X = I`` as ``X = A_0 delta + F`` with ``A_0 = lim A(t)^{-1}``."""
    _require_uniform(grid)
    atom = A.limit_inverse_at_zero()
    if atom is None:
        raise Unsupported(
            f"lim_(t->0) A(t)^-1 does not exist for {A!r}; the Sonine theorem does not apply"
        )
    R = _identity_rhs(grid, A.m, np.ones(grid.N))
    if np.any(atom != 0.0):
        R = R - A.values(grid.nodes) @ atom
    table = build_moments(A, grid)
    F = volterra_solve(table, SampledMatrixFunction(grid, R))
    return DeltaPlusFunction(atom, F)
