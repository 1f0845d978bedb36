"""Finite certification of the CM / Bernstein classes and residual checks of
solved convolution equations.

Nothing here proves class membership.  The checks are necessary conditions
evaluated on a finite set of times and probe directions, and every report
records the range it covered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .convolve import build_moments, toeplitz_apply
from .core import DeltaPlusFunction, Grid, ProbeSet, SampledMatrixFunction
from .errors import InvalidArgument
from .kernels import KernelSpec

PROPERTIES = (
    "CM",
    "LICM",
    "Bernstein",
    "SPD-transform",
    "Sonine-residual",
    "Duality-residual",
    "Structure",
)

DEFAULT_TOL = 1e-9
DEFAULT_N_MAX = 6
TINY = 1e-300


@dataclass
class CertReport:
    """Outcome of one certification.

    ``location`` is populated on failure with the time (or ``p``), probe index
    and difference order of the violation.  ``max_violation`` is measured in the
    units documented by the producing function.
    """

    property: str
    passed: bool
    max_violation: float
    tol: float
    location: dict[str, Any] | None = None
    parameters: dict[str, Any] = field(default_factory=dict)
    details: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        if self.property not in PROPERTIES:
            raise InvalidArgument(f"unknown property {self.property!r}")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "property": self.property,
            "verdict": self.verdict,
            "max_violation": float(self.max_violation),
            "tol": float(self.tol),
            "location": self.location,
            "parameters": self.parameters,
            "details": self.details,
        }


def _finalize(prop: str, violations: list[tuple[float, dict]], tol: float, params: dict,
              details: list | None = None) -> CertReport:
    worst = max((v for v, _ in violations), default=0.0)
    passed = worst <= tol
    location = None
    if not passed:
        # report the lowest failing order, worst point within it
        failing = [(v, loc) for v, loc in violations if v > tol]
        first_order = min(loc.get("order", 0) for _, loc in failing)
        v, location = max(
            ((v, loc) for v, loc in failing if loc.get("order", 0) == first_order),
            key=lambda item: item[0],
        )
    return CertReport(prop, passed, float(worst), float(tol), location, params, details or [])


# --------------------------------------------------------------------------
# Sampling quadratic forms on a stencil
# --------------------------------------------------------------------------


def _stencil_forms(f, n_max: int, grid: Grid, probes: ProbeSet, h_d: float | None):
    """Quadratic forms ``v^T f(t_i + k h_d) v`` for ``k = 0..n_max``.

    Returns ``(t, q, step)`` with ``q`` of shape ``(n_points, n_max+1, n_probes)``.
    Kernel specs are evaluated off-grid with the stencil step ``h_d``
    (default ``T/512``); sampled functions use node values with the stride
    closest to ``h_d``.
    """
    if n_max < 0:
        raise InvalidArgument("n_max must be non-negative")
    if probes.m != f.m:
        raise InvalidArgument(f"probe dimension {probes.m} does not match rank {f.m}")
    if h_d is None:
        h_d = grid.T / 512.0
    if isinstance(f, KernelSpec):
        t = grid.nodes
        pts = t[:, None] + h_d * np.arange(n_max + 1)
        vals = f.values(pts)
        return t, probes.quadratic_forms(vals), h_d
    if isinstance(f, SampledMatrixFunction):
        nodes = f.grid.nodes
        if f.grid.is_uniform:
            stride = max(1, int(round(h_d / f.grid.h)))
        else:
            stride = 1
        count = f.grid.N - n_max * stride
        if count < 1:
            raise InvalidArgument(
                f"need more than {n_max * stride} nodes for difference order {n_max}, "
                f"have {f.grid.N}"
            )
        idx = np.arange(count)[:, None] + stride * np.arange(n_max + 1)
        return nodes[:count], probes.quadratic_forms(f.values[idx]), stride * (
            f.grid.h if f.grid.is_uniform else float("nan")
        )
    raise InvalidArgument(f"cannot certify {type(f).__name__}")


def _alternating_violations(t, q, n_max, scale, offset=0):
    """Relative violations of ``(-1)^n Delta^n q >= 0`` for orders ``0..n_max``."""
    out = []
    diff = q
    for n in range(n_max + 1):
        signed = (-1.0) ** n * diff[:, 0, :]
        rel = np.maximum(-signed, 0.0) / scale
        i, p = np.unravel_index(int(np.argmax(rel)), rel.shape)
        out.append((float(rel[i, p]), {"t": float(t[i]), "probe": int(p), "order": n + offset}))
        diff = np.diff(diff, axis=1)
    return out


def _check_admissible(t, n_max):
    if len(t) < n_max + 1:
        raise InvalidArgument(f"need at least {n_max + 1} admissible nodes, have {len(t)}")


def cm_certify(
    f,
    n_max: int = DEFAULT_N_MAX,
    grid: Grid | None = None,
    probes: ProbeSet | None = None,
    tol: float = DEFAULT_TOL,
    h_d: float | None = None,
) -> CertReport:
    """Check ``(-1)^n Delta^n [v^T f v](t) >= -tol * |v^T f(t) v|`` for ``n <= n_max``.

    Forward differences with a positive step approximate ``h^n D^n``, so the
    alternating signs match the definition of complete monotonicity.
    ``max_violation`` is the largest violation relative to the local magnitude.
    """
    grid, probes = _defaults(f, grid, probes)
    t, q, step = _stencil_forms(f, n_max, grid, probes, h_d)
    _check_admissible(t, n_max)
    scale = np.maximum(np.abs(q[:, 0, :]), TINY)
    viol = _alternating_violations(t, q, n_max, scale)
    params = _params(grid, probes, n_max, step)
    return _finalize("CM", viol, tol, params)


def licm_certify(f, n_max: int = DEFAULT_N_MAX, grid: Grid | None = None,
                 probes: ProbeSet | None = None, tol: float = DEFAULT_TOL,
                 h_d: float | None = None) -> CertReport:
    """CM check plus local integrability (finite integral over ``(0, T]``)."""
    report = cm_certify(f, n_max, grid, probes, tol, h_d)
    integrable = True
    if isinstance(f, KernelSpec):
        grid_ = report.parameters["grid"]
        total = f.integrals(np.array([0.0]), np.array([grid_["T"]]))[0]
        integrable = bool(np.all(np.isfinite(total)))
    report.property = "LICM"
    report.parameters["integrable"] = integrable
    if not integrable:
        report.passed = False
        report.location = {"t": 0.0, "probe": None, "order": -1}
    return report


def bernstein_certify(
    f,
    n_max: int = DEFAULT_N_MAX,
    grid: Grid | None = None,
    probes: ProbeSet | None = None,
    tol: float = DEFAULT_TOL,
    h_d: float | None = None,
) -> CertReport:
    """Check ``f >= 0``, ``Delta f >= 0`` and complete monotonicity of ``Delta f``
    up to order ``n_max - 1``.

    All violations are measured relative to the local magnitude ``|f|``.  In
    the reported location, ``order`` counts differences of ``f`` itself.
    """
    grid, probes = _defaults(f, grid, probes)
    n_max = max(n_max, 1)
    t, q, step = _stencil_forms(f, n_max, grid, probes, h_d)
    _check_admissible(t, n_max)
    scale_f = np.maximum(np.abs(q[:, 0, :]), TINY)
    rel0 = np.maximum(-q[:, 0, :], 0.0) / scale_f
    i, p = np.unravel_index(int(np.argmax(rel0)), rel0.shape)
    viol = [(float(rel0[i, p]), {"t": float(t[i]), "probe": int(p), "order": 0})]
    dq = np.diff(q, axis=1)
    # Delta f >= 0, then (-1)^n Delta^n (Delta f) >= 0 for n >= 1
    viol += _alternating_violations(t, dq, n_max - 1, scale_f, offset=1)
    params = _params(grid, probes, n_max, step)
    return _finalize("Bernstein", viol, tol, params)


def _defaults(f, grid, probes):
    if grid is None:
        if isinstance(f, SampledMatrixFunction):
            grid = f.grid
        else:
            raise InvalidArgument("a grid is required to certify a kernel spec")
    if probes is None:
        from .core import make_probes

        probes = make_probes(f.m)
    return grid, probes


def _params(grid, probes, n_max, step):
    return {
        "grid": grid.to_dict(),
        "t_range": [float(grid.nodes[0]), float(grid.nodes[-1])],
        "n_probes": len(probes),
        "n_max": n_max,
        "step": float(step),
    }


# --------------------------------------------------------------------------
# Residuals of solved equations
# --------------------------------------------------------------------------


def _regular_cell_values(X, grid: Grid) -> np.ndarray:
    """Piecewise-constant cell values of a regular part on ``grid``.

    Sampled functions are used as they are; kernel specs are replaced by their
    exact cell averages, the projection matching the product-integration rule.
    """
    if isinstance(X, SampledMatrixFunction):
        if not X.grid.same_as(grid):
            raise InvalidArgument("solution lives on a different grid")
        return np.array(X.values)
    if isinstance(X, KernelSpec):
        edges = grid.edges
        return X.integrals(edges[:-1], edges[1:]) / np.diff(edges)[:, None, None]
    raise InvalidArgument(f"unsupported regular part {type(X).__name__}")


def _residual(A: KernelSpec, X, grid: Grid, target: np.ndarray, prop: str, tol: float,
              skip: int) -> CertReport:
    if isinstance(X, DeltaPlusFunction):
        atom, regular = X.atom, X.regular
    else:
        atom, regular = np.zeros((A.m, A.m)), X
    if regular.m != A.m:
        raise InvalidArgument(f"rank mismatch: kernel {A.m}, solution {regular.m}")
    table = build_moments(A, grid)
    vals = _regular_cell_values(regular, grid)
    conv = toeplitz_apply(table.moments, vals)
    if np.any(atom != 0.0):
        conv = conv + A.values(grid.nodes) @ atom
    res = np.max(np.abs(conv - target), axis=(1, 2))
    res[:skip] = 0.0
    n = int(np.argmax(res))
    worst = float(res[n])
    loc = {"t": float(grid.nodes[n]), "node": n + 1, "order": 0}
    params = {"grid": grid.to_dict(), "skip_nodes": skip}
    details = [{"t": float(t), "residual": float(r)} for t, r in zip(grid.nodes, res)]
    report = _finalize(prop, [(worst, loc)], tol, params, details)
    return report


def sonine_residual(A: KernelSpec, X, grid: Grid, tol: float = 5e-3, skip: int = 0) -> CertReport:
    """``max_n || (A * F)(t_n) + A(t_n) B - I ||_max`` for ``X = B delta + F``.

    The first ``skip`` nodes are left out of the maximum.
    """
    target = np.broadcast_to(np.eye(A.m), (grid.N, A.m, A.m))
    return _residual(A, X, grid, target, "Sonine-residual", tol, skip)


def duality_residual(A: KernelSpec, X, grid: Grid, tol: float = 5e-3, skip: int = 0) -> CertReport:
    """Same as :func:`sonine_residual` with target ``t I``."""
    target = grid.nodes[:, None, None] * np.eye(A.m)
    return _residual(A, X, grid, target, "Duality-residual", tol, skip)
