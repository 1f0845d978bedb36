"""Generalized Caputo derivative ``D_A`` and integral ``J_A`` built from a
singular kernel ``A`` and its Sonine partner ``F`` (``A * F = I``), plus a
relaxation-equation integrator.

    D_A w = A * w'          J_A v = F * v

Discretely, ``w'`` is the backward difference quotient on each cell and both
operators are moment-weighted convolutions (the L1 scheme when ``A`` is a
power law).  ``J_A`` is written as ``F * v``: with ``A * F = I`` this is the
form for which ``J_A D_A w = w - w(0)`` and ``D_A J_A v = v`` hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .convolve import (
    build_moments,
    leading_inverse,
    piecewise_constant_moments,
    solve_sonine,
    toeplitz_apply,
)
from .core import Grid
from .errors import CallbackError, InvalidArgument, Unsupported, UnsupportedKernel
from .kernels import KernelSpec, sonine_partner

BOUNDARY_LAYER = 5


@dataclass(frozen=True, eq=False)
class VectorTrajectory:
    """Vector values at the grid nodes plus the value at ``t = 0``."""

    grid: Grid
    values: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.N:
            raise InvalidArgument(f"expected {self.grid.N} values, got {v.shape[0]}")
        if self.initial is None:
            raise InvalidArgument("trajectory needs its value at t = 0")
        w0 = np.atleast_1d(np.array(self.initial, dtype=float))
        if w0.shape != (v.shape[1],):
            raise InvalidArgument(f"initial value has shape {w0.shape}, expected ({v.shape[1]},)")
        v.setflags(write=False)
        w0.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "initial", w0)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> VectorTrajectory:
        """Sample ``fn`` (vectorized over time, returning ``(len(t), m)`` or ``(len(t),)``)."""
        return cls(grid, fn(grid.nodes), np.atleast_1d(fn(np.array([0.0])))[0])

    def __add__(self, other: VectorTrajectory) -> VectorTrajectory:
        return VectorTrajectory(self.grid, self.values + other.values, self.initial + other.initial)

    def __mul__(self, c: float) -> VectorTrajectory:
        return VectorTrajectory(self.grid, c * self.values, c * self.initial)

    __rmul__ = __mul__


def _require_derivative_kernel(A: KernelSpec) -> None:
    A0 = A.limit_inverse_at_zero()
    if A0 is None or np.any(A0 != 0.0):
        raise UnsupportedKernel(
            f"{A!r} is not singular at 0 (lim A(t)^-1 != 0); the A-derivative needs a "
            "singular kernel and does not apply to Caputo-Fabrizio-type bounded kernels"
        )


def _check_traj(A: KernelSpec, w: VectorTrajectory) -> None:
    if not w.grid.is_uniform:
        raise Unsupported("the A-operators need a uniform grid")
    if w.m != A.m and A.m != 1:
        raise InvalidArgument(f"rank mismatch: kernel {A.m}, trajectory {w.m}")


def _widen(mu: np.ndarray, m: int) -> np.ndarray:
    """A scalar kernel ``k`` acting on ``m`` components means ``k I``."""
    if mu.shape[1] == m:
        return mu
    return mu[:, 0, 0, None, None] * np.eye(m)


def d_A(A: KernelSpec, w: VectorTrajectory) -> VectorTrajectory:
    """Generalized Caputo derivative ``A * w'``.

    For ``A = PowerLaw(1 - beta)`` this is the Caputo derivative of order beta.
    The result's value at 0 is set to 0 (``A`` integrable, ``w'`` bounded).
    """
    _require_derivative_kernel(A)
    _check_traj(A, w)
    h = w.grid.h
    slopes = np.diff(np.vstack([w.initial, w.values]), axis=0) / h
    table = build_moments(A, w.grid)
    out = toeplitz_apply(_widen(table.moments, w.m), slopes)
    return VectorTrajectory(w.grid, out, np.zeros(w.m))


def _partner_moments(A: KernelSpec, grid: Grid) -> np.ndarray:
    try:
        partner = sonine_partner(A)
    except Unsupported:
        partner = solve_sonine(A, grid)
        if partner.has_atom:
            raise UnsupportedKernel(f"Sonine partner of {A!r} has a delta atom; J_A is undefined")
        return piecewise_constant_moments(partner.regular).moments
    if partner.has_atom:
        raise UnsupportedKernel(f"Sonine partner of {A!r} has a delta atom; J_A is undefined")
    return build_moments(partner.regular, grid).moments


def j_A(A: KernelSpec, v: VectorTrajectory) -> VectorTrajectory:
    """A-integral ``F * v`` with ``F`` the Sonine partner of ``A``.

    Uses the closed-form partner when the catalog has one and the numerical
    Sonine solution otherwise.  The output starts from exactly 0.
    """
    _require_derivative_kernel(A)
    _check_traj(A, v)
    mu = _widen(_partner_moments(A, v.grid), v.m)
    return VectorTrajectory(v.grid, toeplitz_apply(mu, v.values), np.zeros(v.m))


@dataclass(frozen=True)
class RoundTripReport:
    sup_residual: float
    residual: np.ndarray
    skip: int

    def to_dict(self) -> dict:
        return {"sup_residual": self.sup_residual, "skip_nodes": self.skip,
                "residual": self.residual.tolist()}


def roundtrip_JD(A: KernelSpec, w: VectorTrajectory) -> RoundTripReport:
    """``J_A D_A w - (w - w(0))`` over all nodes."""
    back = j_A(A, d_A(A, w))
    res = np.max(np.abs(back.values - (w.values - w.initial)), axis=1)
    return RoundTripReport(float(np.max(res)), res, 0)


def roundtrip_DJ(A: KernelSpec, v: VectorTrajectory, skip: int = BOUNDARY_LAYER) -> RoundTripReport:
    """``D_A J_A v - v``, leaving out the first ``skip`` nodes."""
    back = d_A(A, j_A(A, v))
    res = np.max(np.abs(back.values - v.values), axis=1)
    return RoundTripReport(float(np.max(res[skip:])) if skip < len(res) else 0.0, res, skip)


def solve_relaxation(
    A: KernelSpec,
    K: Callable[[np.ndarray, float], np.ndarray],
    sigma0,
    grid: Grid,
) -> VectorTrajectory:
    """Integrate ``D_A sigma = K(sigma, t)`` from ``sigma(0) = sigma0``.

    Each step solves ``sum_{j<=n} mu_{n-j} d_j = K(sigma_{n-1}, t_n)`` for the
    cell slope ``d_n`` (implicit in the memory weight ``mu_0``, explicit in
    ``K``) and sets ``sigma_n = sigma_{n-1} + h d_n``.  ``K`` should be
    Lipschitz in ``sigma``.
    """
    _require_derivative_kernel(A)
    if not grid.is_uniform:
        raise Unsupported("the relaxation integrator needs a uniform grid")
    sigma = np.atleast_1d(np.array(sigma0, dtype=float))
    m = len(sigma)
    if sigma.ndim != 1 or (m != A.m and A.m != 1):
        raise InvalidArgument(f"sigma0 has shape {sigma.shape}, expected ({A.m},)")
    table = build_moments(A, grid)
    mu = _widen(table.moments, m)
    mu0_inv = _widen(leading_inverse(table)[None], m)[0]
    h = grid.h
    N = grid.N
    slopes = np.zeros((N, m))
    out = np.zeros((N, m))
    initial = sigma.copy()
    for n in range(N):
        try:
            force = np.asarray(K(sigma.copy(), float(grid.nodes[n])), dtype=float)
        except Exception as exc:
            raise CallbackError(f"right side failed at step {n + 1}: {exc}", step=n + 1) from exc
        if force.shape != (m,) or not np.all(np.isfinite(force)):
            raise CallbackError(f"right side returned an invalid value at step {n + 1}", step=n + 1)
        memory = np.einsum("kab,kb->a", mu[n:0:-1], slopes[:n]) if n else 0.0
        slopes[n] = mu0_inv @ (force - memory)
        sigma = sigma + h * slopes[n]
        out[n] = sigma
    return VectorTrajectory(grid, out, initial)


RIGHT_SIDES: dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "linear": lambda s, t: -s,
    "demo": lambda s, t: -np.tanh(s),
}
"""Named right sides offered on the command line."""
