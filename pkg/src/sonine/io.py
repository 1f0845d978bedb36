"""Kernel description files and CSV/JSON data files used by the command line.

Kernel files are JSON objects::

    {"variant": "power_law", "params": {"alpha": 0.5}}
    {"variant": "power_law", "params": {"alpha": 0.5}, "K0": [[2, 1], [1, 2]]}
    {"variant": "diagonal", "params": {"entries": [{...}, {...}]}}

A top-level ``K0`` turns a scalar kernel into ``k(t) K0``.  Matrix-valued data
are written as CSV with header ``t,M11,M12,...,Mmm`` (row-major, 17 significant
digits, so doubles round-trip exactly); delta atoms go to a JSON sidecar next
to the CSV under the key ``"atom"``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

from .core import Grid
from .errors import InvalidArgument, ParseError
from .kernels import (
    BesselI,
    BesselK,
    Constant,
    DiagonalOfScalars,
    Exponential,
    KernelSpec,
    OneMinusExp,
    PowerLaw,
    ScalarKernel,
    ScalarTimesMatrix,
    SeriesKernel,
    SoninePartnerOfPowerLaw,
    TemperedPartner,
    TemperedPowerLaw,
)

FLOAT_FMT = "%.17g"

_SCALARS: dict[str, tuple[type, tuple[str, ...]]] = {
    "power_law": (PowerLaw, ("alpha",)),
    "power_law_partner": (SoninePartnerOfPowerLaw, ("alpha",)),
    "tempered_power_law": (TemperedPowerLaw, ("alpha", "lam")),
    "tempered_partner": (TemperedPartner, ("alpha", "lam")),
    "exponential": (Exponential, ("lam",)),
    "one_minus_exp": (OneMinusExp, ("lam",)),
    "constant": (Constant, ("c",)),
    "bessel_j": (BesselK, ("lam",)),
    "bessel_i": (BesselI, ("lam",)),
    "series": (SeriesKernel, ("alpha", "coefficients")),
}
VARIANTS = tuple(sorted(_SCALARS)) + ("diagonal", "scalar_times_matrix")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where} must be a number, got {value!r}")
    return float(value)


def _matrix(value: Any, where: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where} must be a square matrix of numbers") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(f"{where} must be a square matrix, got shape {arr.shape}")
    return arr


def _params(doc: dict, names: tuple[str, ...], where: str) -> dict[str, Any]:
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ParseError(f"{where}.params must be an object")
    if "lambda" in params and "lam" not in params:
        params = {**params, "lam": params["lambda"]}
    out = {}
    for name in names:
        if name not in params:
            raise ParseError(f"{where}.params is missing {name!r}")
        if name == "coefficients":
            coeffs = params[name]
            if not isinstance(coeffs, list) or not coeffs:
                raise ParseError(f"{where}.params.coefficients must be a non-empty list")
            out[name] = tuple(_number(c, f"{where}.params.coefficients") for c in coeffs)
        else:
            out[name] = _number(params[name], f"{where}.params.{name}")
    return out


def kernel_from_dict(doc: Any, where: str = "kernel") -> KernelSpec:
    """Build a :class:`KernelSpec` from a parsed kernel document."""
    if not isinstance(doc, dict):
        raise ParseError(f"{where} must be a JSON object")
    variant = doc.get("variant")
    if variant in _SCALARS:
        cls, names = _SCALARS[variant]
        kernel: KernelSpec = cls(**_params(doc, names, where))
    elif variant == "diagonal":
        entries = doc.get("params", {}).get("entries")
        if not isinstance(entries, list) or not entries:
            raise ParseError(f"{where}.params.entries must be a non-empty list of kernels")
        kernel = DiagonalOfScalars(
            tuple(kernel_from_dict(e, f"{where}.params.entries[{i}]") for i, e in enumerate(entries))
        )
    elif variant == "scalar_times_matrix":
        scalar = kernel_from_dict(doc.get("params", {}).get("scalar"), f"{where}.params.scalar")
        if "K0" not in doc.get("params", {}):
            raise ParseError(f"{where}.params is missing 'K0'")
        return ScalarTimesMatrix(scalar, _matrix(doc["params"]["K0"], f"{where}.params.K0"))
    else:
        raise ParseError(f"{where}.variant must be one of {', '.join(VARIANTS)}; got {variant!r}")
    if "K0" in doc:
        if not isinstance(kernel, ScalarKernel):
            raise InvalidArgument(f"{where}: K0 can only scale a scalar kernel")
        kernel = ScalarTimesMatrix(kernel, _matrix(doc["K0"], f"{where}.K0"))
    return kernel


def parse_kernel(text: str) -> KernelSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    return kernel_from_dict(doc)


def load_kernel(path: str | Path) -> KernelSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read kernel file {path}: {exc.strerror}") from exc
    return parse_kernel(text)


# --------------------------------------------------------------------------
# CSV / JSON output
# --------------------------------------------------------------------------


def matrix_header(m: int, prefix: str = "M") -> list[str]:
    return [f"{prefix}{i + 1}{j + 1}" for i in range(m) for j in range(m)]


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def write_table(path: str | Path, header: list[str], columns: list[np.ndarray]) -> None:
    """Write equal-length columns as CSV with full-precision floats."""
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def flatten_matrices(values: np.ndarray) -> list[np.ndarray]:
    """``(N, m, m)`` -> list of ``m*m`` columns in row-major order."""
    N, m, _ = values.shape
    flat = values.reshape(N, m * m)
    return [flat[:, k] for k in range(m * m)]


def write_matrix_csv(path: str | Path, t: np.ndarray, values: np.ndarray, label: str = "t") -> None:
    write_table(path, [label] + matrix_header(values.shape[1]), [t] + flatten_matrices(values))


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


# --------------------------------------------------------------------------
# CSV input
# --------------------------------------------------------------------------


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header row; returns ``(header, rows)``."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ParseError(f"{path} is empty", 1, 1) from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        f"{path}: expected {len(header)} fields, got {len(row)}", lineno, 1
                    )
                vals = []
                col = 1
                for field in row:
                    try:
                        vals.append(float(field))
                    except ValueError:
                        raise ParseError(f"{path}: not a number: {field!r}", lineno, col) from None
                    col += len(field) + 1
                rows.append(vals)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise ParseError(f"{path} has no data rows", 2, 1)
    return header, np.array(rows)


def read_matrix_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``t,M11..Mmm``; returns ``(t, values (N, m, m))``."""
    header, rows = read_table(path)
    k = len(header) - 1
    m = int(round(np.sqrt(k)))
    if k < 1 or m * m != k or header[1:] != matrix_header(m):
        raise ParseError(f"{path}: header must be t,M11,...,Mmm", 1, 1)
    return rows[:, 0], rows[:, 1:].reshape(-1, m, m)


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc


def grid_matches(grid: Grid, t: np.ndarray) -> bool:
    return t.shape == grid.nodes.shape and np.array_equal(t, grid.nodes)
