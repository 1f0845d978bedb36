"""Laplace-domain counterpart of the time-domain solvers.

The transform side is used for verification only: closed-form transforms of
catalog kernels, the pointwise algebraic solution ``X~(p) = A~(p)^{-1} R~(p)``,
positivity of ``A~(p)`` along probe directions, and monotonicity surrogates of
the Stieltjes / complete-Bernstein structure.  There is deliberately no
numerical inverse transform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import CertReport, _finalize
from .core import DeltaPlusFunction, ProbeSet, SampledMatrixFunction, make_probes, spd_inverse
from .errors import InvalidArgument, OutOfRange, SingularMatrix, SingularTransform, Unsupported
from .kernels import (
    Constant,
    DiagonalOfScalars,
    KernelSpec,
    OneMinusExp,
    ScalarTimesMatrix,
    laplace_closed_form,
)

TAIL_EPS = 1e-10
DEFAULT_CELLS = 4000
GAUSS_POINTS = 8


class Rhs(enum.Enum):
    DUALITY_T = "t"
    SONINE_I = "one"

    def transform(self, p: float) -> float:
        return p ** -2 if self is Rhs.DUALITY_T else 1.0 / p


@dataclass(frozen=True)
class LaplaceEstimate:
    """Truncated transform ``int_0^T_tail e^{-pt} A dt`` and a bound on the
    neglected tail (``None`` when no bound is known)."""

    value: np.ndarray
    tail_bound: float | None
    T_tail: float
    n_cells: int


def default_tail(p: float) -> float:
    """Horizon with ``exp(-p T) <= 1e-10``."""
    return math.log(1.0 / TAIL_EPS) / p


def _tail_bound(A: KernelSpec, p: float, T: float) -> float | None:
    """Bound on ``|| int_T^inf e^{-pt} A dt ||_max`` from monotonicity, when available."""
    scalars = [A]
    factor = 1.0
    if isinstance(A, ScalarTimesMatrix):
        scalars, factor = [A.scalar], float(np.max(np.abs(A.K0)))
    elif isinstance(A, DiagonalOfScalars):
        scalars = list(A.entries)
    bounds = []
    for k in scalars:
        if k.licm:
            # nonincreasing and nonnegative: A(t) <= A(T) beyond T
            sup = float(k.values(np.array([T]))[0, 0, 0])
        elif isinstance(k, OneMinusExp):
            sup = 1.0
        elif isinstance(k, Constant):
            sup = k.c
        else:
            return None
        bounds.append(sup)
    return factor * max(bounds) * math.exp(-p * T) / p


def numeric_laplace(
    A: KernelSpec | SampledMatrixFunction | DeltaPlusFunction,
    p: float,
    T_tail: float | None = None,
    n_cells: int = DEFAULT_CELLS,
) -> LaplaceEstimate:
    """Numerical Laplace transform on ``[0, T_tail]``.

    Kernel specs: cells are graded quadratically toward 0; the first cell uses
    the exact kernel moment, the others Gauss-Legendre quadrature.  Sampled functions are read as piecewise constant
    (their native representation as solver output) and integrated exactly
    against ``exp(-pt)`` over ``[0, T]``; the tail estimate then extrapolates the
    last value as a constant.  A delta atom contributes itself.
    """
    if not p > 0.0:
        raise OutOfRange(f"Laplace transforms are evaluated at p > 0, got p={p}")
    if isinstance(A, DeltaPlusFunction):
        est = numeric_laplace(A.regular, p, T_tail, n_cells)
        return LaplaceEstimate(est.value + A.atom, est.tail_bound, est.T_tail, est.n_cells)
    if isinstance(A, SampledMatrixFunction):
        edges = A.grid.edges
        w = (np.exp(-p * edges[:-1]) - np.exp(-p * edges[1:])) / p
        value = np.einsum("k,kab->ab", w, A.values)
        tail = float(np.max(np.abs(A.values[-1]))) * math.exp(-p * A.grid.T) / p
        return LaplaceEstimate(value, tail, A.grid.T, A.grid.N)
    if isinstance(A, KernelSpec):
        if T_tail is None:
            T_tail = default_tail(p)
        if not T_tail > 0.0:
            raise InvalidArgument("T_tail must be positive")
        # cells graded toward 0 (t ~ i^2) resolve integrable singularities
        edges = T_tail * (np.arange(n_cells + 1) / n_cells) ** 2
        # first cell: exact moment against the (nearly constant) weight;
        # the rest: Gauss-Legendre, where the kernel is smooth
        value = A.integrals(edges[:1], edges[1:2])[0] * math.exp(-p * 0.5 * edges[1])
        x, wq = np.polynomial.legendre.leggauss(GAUSS_POINTS)
        a, b = edges[1:-1, None], edges[2:, None]
        t = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
        w = (0.5 * (b - a) * wq).ravel() * np.exp(-p * t)
        value = value + np.einsum("k,kab->ab", w, A.values(t))
        return LaplaceEstimate(value, _tail_bound(A, p, T_tail), float(T_tail), n_cells)
    raise InvalidArgument(f"cannot transform {type(A).__name__}")


def _checked_inverse(At: np.ndarray, p: float) -> np.ndarray:
    try:
        return spd_inverse(At)
    except SingularMatrix as exc:
        w, v = np.linalg.eigh(0.5 * (At + At.T))
        raise SingularTransform(
            f"A~({p}) is not positive definite: v^T A~ v = {w[0]:.3e} along v = {v[:, 0].tolist()}",
            p=p,
            direction=v[:, 0],
        ) from exc


def transform_solve(A: KernelSpec, rhs: Rhs, p_list: Sequence[float]) -> list[np.ndarray]:
    """``X~(p) = A~(p)^{-1} R~(p)`` with closed-form ``A~``."""
    rhs = Rhs(rhs)
    out = []
    for p in p_list:
        At = laplace_closed_form(A, p)
        out.append(_checked_inverse(At, p) * rhs.transform(p))
    return out


def _transform(A: KernelSpec, p: float) -> np.ndarray:
    try:
        return laplace_closed_form(A, p)
    except Unsupported:
        return numeric_laplace(A, p).value


def check_pd(A: KernelSpec, p_list: Sequence[float], probes: ProbeSet | None = None) -> CertReport:
    """Assert ``v^T A~(p) v > 0`` for every probe and every ``p``.

    ``max_violation`` is ``max(0, -min margin)`` and the verdict requires every
    margin to be strictly positive.  Per-``p`` minimum margins are in ``details``.
    """
    probes = probes or make_probes(A.m)
    details = []
    worst_margin, where = math.inf, None
    for p in p_list:
        q = probes.quadratic_forms(_transform(A, p))
        k = int(np.argmin(q))
        details.append({"p": float(p), "min_margin": float(q[k]), "probe": k})
        if q[k] < worst_margin:
            worst_margin, where = float(q[k]), {"p": float(p), "probe": k, "order": 0}
    passed = worst_margin > 0.0 if len(p_list) else True
    params = {"p_list": [float(p) for p in p_list], "n_probes": len(probes)}
    return CertReport(
        "SPD-transform",
        passed,
        max(0.0, -worst_margin) if len(p_list) else 0.0,
        0.0,
        None if passed else where,
        params,
        details,
    )


def _monotone_violations(p_grid, q, increasing: bool, label: str):
    """Relative violations of monotonicity of ``q[i, probe]`` along ``p_grid``."""
    d = np.diff(q, axis=0)
    if not increasing:
        d = -d
    scale = np.maximum(np.abs(q[:-1]), 1e-300)
    rel = np.maximum(-d, 0.0) / scale
    i, k = np.unravel_index(int(np.argmax(rel)), rel.shape)
    return float(rel[i, k]), {"p": float(p_grid[i]), "probe": int(k), "order": 0, "test": label}


def check_structure(
    A: KernelSpec, p_grid: Sequence[float], probes: ProbeSet | None = None, tol: float = 1e-12
) -> CertReport:
    """Monotonicity surrogates of the Stieltjes / CBF structure along probes.

    LICM kernels (and unclassified ones, which are tested against the LICM
    claim): ``v^T A~ v`` nonincreasing, ``v^T [p A~] v`` nondecreasing, and for
    the duality solution ``v^T [p X~] v = v^T [p A~]^{-1} v`` nonincreasing.
    Bernstein-only kernels: ``v^T [p A~] v`` nonincreasing and
    ``v^T [p^2 A~] v`` nondecreasing, and ``X~ = [p^2 A~]^{-1}`` nonincreasing.
    """
    p = np.asarray(p_grid, dtype=float)
    if p.ndim != 1 or len(p) < 2 or np.any(p <= 0.0) or np.any(np.diff(p) <= 0.0):
        raise InvalidArgument("p_grid must be a strictly increasing list of positive numbers")
    probes = probes or make_probes(A.m)
    At = np.stack([_transform(A, pi) for pi in p])
    bernstein_mode = A.bernstein and not A.licm
    viol = []
    if bernstein_mode:
        Z = p[:, None, None] ** 2 * At
        viol.append(_monotone_violations(p, probes.quadratic_forms(p[:, None, None] * At), False,
                                         "p*A~ nonincreasing"))
        viol.append(_monotone_violations(p, probes.quadratic_forms(Z), True,
                                         "p^2*A~ nondecreasing"))
        label = "X~ nonincreasing"
    else:
        Z = p[:, None, None] * At
        viol.append(_monotone_violations(p, probes.quadratic_forms(At), False, "A~ nonincreasing"))
        viol.append(_monotone_violations(p, probes.quadratic_forms(Z), True, "p*A~ nondecreasing"))
        label = "p*X~ nonincreasing"
    try:
        inv = np.stack([spd_inverse(z) for z in Z])
        viol.append(_monotone_violations(p, probes.quadratic_forms(inv), False, label))
    except SingularMatrix as exc:
        viol.append((math.inf, {"p": None, "probe": None, "order": 0, "test": f"{label}: {exc}"}))
    params = {"p_grid": p.tolist(), "n_probes": len(probes),
              "mode": "Bernstein" if bernstein_mode else "LICM"}
    details = [{"test": loc["test"], "max_violation": v} for v, loc in viol]
    return _finalize("Structure", viol, tol, params, details)


def cross_check(
    A: KernelSpec,
    X_time: SampledMatrixFunction | DeltaPlusFunction,
    rhs: Rhs,
    p_list: Sequence[float],
) -> dict:
    """Compare the transform of a time-domain solution with ``A~^{-1} R~``.

    Returns a report with per-``p`` relative deviations
    ``max|num - ref| / max|ref|`` and their maximum.
    """
    rhs = Rhs(rhs)
    rows = []
    refs = transform_solve(A, rhs, p_list)
    for p, ref in zip(p_list, refs):
        num = numeric_laplace(X_time, p)
        dev = float(np.max(np.abs(num.value - ref)) / max(float(np.max(np.abs(ref))), 1e-300))
        rows.append({
            "p": float(p),
            "numeric": num.value.tolist(),
            "closed_form": ref.tolist(),
            "deviation": dev,
            "tail_estimate": num.tail_bound,
        })
    return {
        "rhs": rhs.value,
        "rows": rows,
        "max_deviation": max((r["deviation"] for r in rows), default=0.0),
    }
