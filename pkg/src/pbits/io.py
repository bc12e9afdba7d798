"""JSON serialization of density matrices and ccq ensembles.

Matrices are stored as ``{"dims", "labels", "tol", "data"}`` with ``data`` a
flat row-major list of ``[re, im]`` pairs. Python's float repr round-trips
64-bit values exactly, so load(dump(x)) is bit-identical.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .linalg import DEFAULT_TOL, DensityMatrix, SystemLayout
from .security import CcqEnsemble


class FormatError(ValueError):
    pass


def matrix_to_obj(m: np.ndarray, layout: SystemLayout, tol: float = DEFAULT_TOL) -> dict[str, Any]:
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return {
        "dims": list(layout.dims),
        "labels": list(layout.labels),
        "tol": float(tol),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_obj(obj: Any) -> tuple[np.ndarray, SystemLayout, float]:
    if not isinstance(obj, dict):
        raise FormatError("matrix entry must be a JSON object")
    missing = {"dims", "labels", "data"} - obj.keys()
    if missing:
        raise FormatError(f"matrix entry is missing {sorted(missing)}")
    try:
        layout = SystemLayout(tuple(int(x) for x in obj["dims"]), tuple(str(x) for x in obj["labels"]))
        data = np.asarray(obj["data"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed matrix entry: {exc}") from exc
    n = layout.dim
    if data.shape != (n * n, 2):
        raise FormatError(f"data has shape {data.shape}, expected ({n * n}, 2)")
    m = (data[:, 0] + 1j * data[:, 1]).reshape(n, n)
    return m, layout, float(obj.get("tol", DEFAULT_TOL))


def density_to_obj(rho: DensityMatrix) -> dict[str, Any]:
    return matrix_to_obj(rho.matrix, rho.layout, rho.tol)


def density_from_obj(obj: Any) -> DensityMatrix:
    m, layout, tol = matrix_from_obj(obj)
    return DensityMatrix(m, layout, tol)


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def save_density(rho: DensityMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(density_to_obj(rho)))


def load_density(path: str | Path) -> DensityMatrix:
    return density_from_obj(_read_json(path))


def ccq_to_obj(c: CcqEnsemble) -> dict[str, Any]:
    e = c.eve_dim
    eve_layout = SystemLayout((e,), ("E",))
    return {
        "d": c.d,
        "p": [[i, j, float(c.p[i, j])] for i in range(c.d) for j in range(c.d)],
        "eve": [[i, j, matrix_to_obj(c.eve[(i, j)], eve_layout, c.tol)] for i, j in c.outcomes()],
    }


def ccq_from_obj(obj: Any) -> CcqEnsemble:
    if not isinstance(obj, dict) or not {"d", "p", "eve"} <= obj.keys():
        raise FormatError("ccq file needs keys d, p, eve")
    d = int(obj["d"])
    p = np.zeros((d, d))
    try:
        for i, j, v in obj["p"]:
            p[int(i), int(j)] = float(v)
        eve, tol = {}, DEFAULT_TOL
        for i, j, m in obj["eve"]:
            mat, _, tol = matrix_from_obj(m)
            eve[(int(i), int(j))] = mat
    except (TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"malformed ccq entry: {exc}") from exc
    return CcqEnsemble(p, eve, tol)


def save_ccq(c: CcqEnsemble, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ccq_to_obj(c)))


def load_ccq(path: str | Path) -> CcqEnsemble:
    return ccq_from_obj(_read_json(path))
