"""Command line: ``sonine <command> --kernel k.json [flags]``.

Commands
    pair     kernel and Sonine partner on a grid (CSV + atom sidecar)
    solve    solve A * X = t I (``--rhs t``) or A * X = I (``--rhs one``)
    verify   run certification checks; exit 0 iff all pass, 1 otherwise
    deriv    generalized Caputo derivative of a trajectory CSV
    integ    A-integral of a trajectory CSV
    relax    integrate D_A sigma = K(sigma)
    laplace  closed-form and numerical transforms at --p-list

Exit codes: 0 success, 1 checks failed, 2 bad input, 3 unsupported kernel or
operation, 4 numerical failure.  Outputs contain no timestamps, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, calculus, convolve, io, laplace
from .core import (
    DeltaPlusFunction,
    Grid,
    SampledMatrixFunction,
    make_graded_grid,
    make_probes,
    make_uniform_grid,
)
from .errors import InvalidArgument, SonineError, Unsupported
from .kernels import KernelSpec, laplace_closed_form, sonine_partner

CHECKS = ("cm", "licm", "bernstein", "pd", "structure", "sonine", "duality")
DEFAULT_P_LIST = "0.01,0.0316,0.1,0.316,1,3.16,10,31.6,100"


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidArgument(f"{flag} expects comma-separated numbers, got {text!r}") from None


def _seed() -> int:
    raw = os.environ.get("SONINE_SEED", "42")
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgument(f"SONINE_SEED must be an integer, got {raw!r}") from None


def _grid(args, kernel: KernelSpec | None = None, uniform_only: bool = True) -> Grid:
    gamma = args.grid_gamma
    if gamma is None:
        # graded toward 0 for singular kernels when the consumer allows it
        gamma = 2.0 if (not uniform_only and kernel is not None and kernel.singular_at_zero) else 1.0
    if uniform_only and gamma != 1.0:
        raise Unsupported("this command solves on uniform grids only; use --grid-gamma 1")
    return make_graded_grid(args.grid_t, args.grid_n, gamma)


def _kernel_doc(kernel: KernelSpec) -> str:
    return repr(kernel)


def _require_out(args) -> Path:
    if not args.out:
        raise InvalidArgument("--out is required")
    return Path(args.out)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_pair(args) -> int:
    kernel = io.load_kernel(args.kernel)
    out = _require_out(args)
    try:
        partner = sonine_partner(kernel)
        grid = _grid(args, kernel, uniform_only=False)
        F = partner.regular.values(grid.nodes)
        method = "closed form"
    except Unsupported:
        grid = _grid(args, kernel)
        partner = convolve.solve_sonine(kernel, grid)
        F = partner.regular.values
        method = "numerical"
    A = kernel.values(grid.nodes)
    m = kernel.m
    io.write_table(
        out,
        ["t"] + io.matrix_header(m, "A") + io.matrix_header(m, "F"),
        [grid.nodes] + io.flatten_matrices(A) + io.flatten_matrices(F),
    )
    io.write_json(io.sidecar_path(out), {
        "kernel": _kernel_doc(kernel),
        "grid": grid.to_dict(),
        "atom": partner.atom,
        "partner": method,
    })
    return 0


def cmd_solve(args) -> int:
    kernel = io.load_kernel(args.kernel)
    out = _require_out(args)
    grid = _grid(args, kernel)
    rhs = laplace.Rhs(args.rhs)
    if rhs is laplace.Rhs.DUALITY_T:
        X = convolve.solve_duality(kernel, grid)
        report = analysis.duality_residual(kernel, X, grid, tol=args.tol or 5e-3)
    else:
        X = convolve.solve_sonine(kernel, grid)
        report = analysis.sonine_residual(kernel, X, grid, tol=args.tol or 5e-3)
    io.write_matrix_csv(out, grid.nodes, X.regular.values)
    doc = {
        "kernel": _kernel_doc(kernel),
        "grid": grid.to_dict(),
        "rhs": rhs.value,
        "atom": X.atom,
        "residual": {k: v for k, v in report.to_dict().items() if k != "details"},
    }
    cert = X.regular.certificate
    if cert is not None:
        doc["certificate"] = {k: v for k, v in cert.to_dict().items() if k != "details"}
    io.write_json(io.sidecar_path(out), doc)
    return 0


def _load_solution(path: str) -> tuple[Grid, DeltaPlusFunction, str | None]:
    t, values = io.read_matrix_csv(path)
    side = io.sidecar_path(path)
    meta = io.read_json(side) if side.exists() else {}
    grid_doc = meta.get("grid")
    if grid_doc:
        grid = make_graded_grid(float(grid_doc["T"]), int(grid_doc["N"]), float(grid_doc["gamma"]))
        if not np.allclose(grid.nodes, t, rtol=1e-12, atol=0.0):
            raise InvalidArgument(f"{path}: time column does not match the grid in {side}")
    else:
        grid = make_uniform_grid(float(t[-1]), len(t))
        if not np.allclose(grid.nodes, t, rtol=1e-12, atol=0.0):
            raise InvalidArgument(f"{path}: time column is not a uniform grid t_i = i T / N")
    m = values.shape[1]
    atom = np.array(meta.get("atom", np.zeros((m, m))), dtype=float).reshape(m, m)
    X = DeltaPlusFunction(atom, SampledMatrixFunction(grid, values))
    return grid, X, meta.get("rhs")


def _default_checks(kernel: KernelSpec, rhs: str | None, has_data: bool) -> list[str]:
    if has_data:
        return ["duality" if rhs == "t" else "sonine"]
    first = "licm" if kernel.licm else ("bernstein" if kernel.bernstein else "cm")
    return [first, "pd", "structure"]


def cmd_verify(args) -> int:
    kernel = io.load_kernel(args.kernel)
    out = _require_out(args)
    probes = make_probes(kernel.m, seed=_seed())
    data = None
    if args.data:
        data = _load_solution(args.data)
    checks = args.checks.split(",") if args.checks else _default_checks(
        kernel, data[2] if data else None, data is not None
    )
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise InvalidArgument(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
    p_list = _floats(DEFAULT_P_LIST if args.p_list is None else args.p_list, "--p-list")
    reports = []
    for name in checks:
        kw = {} if args.tol is None else {"tol": args.tol}
        if name in ("cm", "licm", "bernstein"):
            fn = {"cm": analysis.cm_certify, "licm": analysis.licm_certify,
                  "bernstein": analysis.bernstein_certify}[name]
            if data is not None and name != "licm":
                grid, X, _ = data
                reports.append(fn(X.regular, grid=grid, probes=probes, **kw))
            else:
                reports.append(fn(kernel, grid=_grid(args, kernel, uniform_only=False),
                                  probes=probes, **kw))
        elif name == "pd":
            reports.append(laplace.check_pd(kernel, p_list, probes=probes))
        elif name == "structure":
            reports.append(laplace.check_structure(kernel, p_list, probes=probes, **kw))
        else:
            if data is not None:
                grid, X, _ = data
            else:
                grid = _grid(args, kernel)
                X = (convolve.solve_duality if name == "duality" else convolve.solve_sonine)(kernel, grid)
            fn = analysis.duality_residual if name == "duality" else analysis.sonine_residual
            reports.append(fn(kernel, X, grid, **kw))
    passed = all(r.passed for r in reports)
    io.write_json(out, {
        "kernel": _kernel_doc(kernel),
        "verdict": "pass" if passed else "fail",
        "reports": [r.to_dict() for r in reports],
    })
    for r in reports:
        print(f"{r.property}: {r.verdict} (max violation {r.max_violation:.3e}, tol {r.tol:.1e})")
    return 0 if passed else 1


def _load_trajectory(path: str, m: int, need_initial: bool) -> calculus.VectorTrajectory:
    header, rows = io.read_table(path)
    if header[0] != "t" or len(header) != m + 1:
        raise io.ParseError(f"{path}: header must be t followed by {m} component columns", 1, 1)
    t = rows[:, 0]
    if t[0] == 0.0:
        initial, t, vals = rows[0, 1:], t[1:], rows[1:, 1:]
    elif need_initial:
        raise InvalidArgument(f"{path}: the first row must hold the value at t = 0")
    else:
        initial, vals = np.zeros(m), rows[:, 1:]
    if len(t) < 2:
        raise InvalidArgument(f"{path}: need at least two samples after t = 0")
    grid = make_uniform_grid(float(t[-1]), len(t))
    if not np.allclose(grid.nodes, t, rtol=1e-12, atol=0.0):
        raise Unsupported(f"{path}: time column must be uniform, t_i = i T / N")
    return calculus.VectorTrajectory(grid, vals, initial)


def _write_trajectory(path: Path, traj: calculus.VectorTrajectory) -> None:
    t = np.concatenate(([0.0], traj.grid.nodes))
    vals = np.vstack([traj.initial, traj.values])
    header = ["t"] + [f"x{i + 1}" for i in range(traj.m)]
    io.write_table(path, header, [t] + [vals[:, i] for i in range(traj.m)])


def _cmd_operator(args, op) -> int:
    kernel = io.load_kernel(args.kernel)
    out = _require_out(args)
    if not args.data:
        raise InvalidArgument("--data <trajectory csv> is required")
    traj = _load_trajectory(args.data, kernel.m, need_initial=op is calculus.d_A)
    _write_trajectory(out, op(kernel, traj))
    return 0


def cmd_deriv(args) -> int:
    return _cmd_operator(args, calculus.d_A)


def cmd_integ(args) -> int:
    return _cmd_operator(args, calculus.j_A)


def cmd_relax(args) -> int:
    kernel = io.load_kernel(args.kernel)
    out = _require_out(args)
    grid = _grid(args, kernel)
    sigma0 = _floats(args.sigma0, "--sigma0")
    K = calculus.RIGHT_SIDES[args.rhs_name]
    traj = calculus.solve_relaxation(kernel, K, sigma0, grid)
    _write_trajectory(out, traj)
    return 0


def cmd_laplace(args) -> int:
    kernel = io.load_kernel(args.kernel)
    out = _require_out(args)
    p_list = _floats(DEFAULT_P_LIST if args.p_list is None else args.p_list, "--p-list")
    if not p_list:
        raise InvalidArgument("--p-list is empty")
    numeric, closed, rows = [], [], []
    for p in p_list:
        est = laplace.numeric_laplace(kernel, p)
        numeric.append(est.value)
        try:
            ref = laplace_closed_form(kernel, p)
        except Unsupported:
            ref = None
        closed.append(ref)
        row = {"p": p, "tail_bound": est.tail_bound, "T_tail": est.T_tail}
        if ref is not None:
            row["relative_deviation"] = float(np.max(np.abs(est.value - ref)) / np.max(np.abs(ref)))
        rows.append(row)
    m = kernel.m
    num = np.stack(numeric)
    columns = [np.array(p_list)] + io.flatten_matrices(num)
    header = ["p"] + io.matrix_header(m, "N")
    if all(c is not None for c in closed):
        columns += io.flatten_matrices(np.stack(closed))
        header += io.matrix_header(m, "C")
    io.write_table(out, header, columns)
    io.write_json(io.sidecar_path(out), {"kernel": _kernel_doc(kernel), "rows": rows})
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sonine", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, grid=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--kernel", required=True, help="kernel description (JSON)")
        p.add_argument("--out", help="output file")
        if grid:
            p.add_argument("--grid-n", type=int, default=1000)
            p.add_argument("--grid-t", type=float, default=1.0)
            p.add_argument("--grid-gamma", type=float, default=None)
        p.set_defaults(func=fn)
        return p

    add("pair", cmd_pair, "kernel and its Sonine partner on a grid")
    p = add("solve", cmd_solve, "solve A * X = R")
    p.add_argument("--rhs", choices=("t", "one"), default="t")
    p.add_argument("--tol", type=float, default=None)
    p = add("verify", cmd_verify, "certify kernel properties or a solution file")
    p.add_argument("--checks", default=None, help=f"comma list of {','.join(CHECKS)}")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--p-list", default=None)
    p.add_argument("--data", default=None, help="solution CSV written by 'solve'")
    for name, fn in (("deriv", cmd_deriv), ("integ", cmd_integ)):
        p = add(name, fn, f"apply {'D_A' if name == 'deriv' else 'J_A'} to a trajectory CSV",
                grid=False)
        p.add_argument("--data", default=None, help="trajectory CSV: t,x1..xm with a t=0 row")
    p = add("relax", cmd_relax, "integrate D_A sigma = K(sigma)")
    p.add_argument("--sigma0", default="1")
    p.add_argument("--rhs-name", choices=tuple(calculus.RIGHT_SIDES), default="linear")
    p = add("laplace", cmd_laplace, "numerical and closed-form transforms", grid=False)
    p.add_argument("--p-list", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SonineError as exc:
        print(f"sonine {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"sonine {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
