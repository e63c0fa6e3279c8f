"""File formats: point-cloud CSV, JSON documents for every result type,
plot-ready CSVs, and the JSON schemas the documents are validated against.

Floats are written with ``repr`` so every value round-trips exactly.
Non-finite floats become JSON ``null``.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .calibrate import CalibrationReport
from .detector import BoundaryResult
from .errors import BoundaryKitError, DimensionMismatch, InvalidParams
from .geomcore import PointCloud
from .patches import PatchComplex
from .tangent import TangentField


class FormatError(BoundaryKitError):
    """Malformed or unreadable input file."""


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _vec(v):
    return [_num(x) for x in np.asarray(v, dtype=float).ravel()]


def _mat(M):
    return [_vec(row) for row in np.atleast_2d(np.asarray(M, dtype=float))]


# --------------------------------------------------------------------------
# point clouds


def write_cloud_csv(path, cloud: PointCloud | np.ndarray) -> None:
    X = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(X.shape[1])])
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def read_cloud_csv(path, intrinsic_dim: int) -> PointCloud:
    """Load a cloud written by ``write_cloud_csv``; D comes from the header."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read point cloud {path}: {exc.strerror}") from exc
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != [f"x{k}" for k in range(len(header))] or not header:
        raise FormatError(f"{path}: header must be x0,...,x{{D-1}}")
    D = len(header)
    data = [r for r in rows[1:] if r]
    if not data:
        raise FormatError(f"{path}: no points")
    for k, r in enumerate(data, start=1):
        if len(r) != D:
            raise DimensionMismatch(f"{path}: data row {k} has {len(r)} values, expected {D}")
    try:
        X = np.array([[float(v) for v in r] for r in data])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return PointCloud(X, int(intrinsic_dim))


# --------------------------------------------------------------------------
# JSON documents


def tangent_field_doc(tf: TangentField) -> list:
    return [
        {"index": i, "basis": _mat(f.basis), "eigenvalues": _vec(tf.eigenvalues[i]) if len(tf.eigenvalues) else []}
        for i, f in enumerate(tf.frames)
    ]


def boundary_result_doc(res: BoundaryResult) -> dict:
    frames = []
    for i in res.detected:
        f = res.boundary_frames.get(int(i))
        frames.append({"index": int(i), "basis": None if f is None else _mat(f.basis)})
    return {
        "detected": [int(i) for i in res.detected],
        "normals": [{"index": int(i), "eta": _vec(res.normals[int(i)])} for i in res.detected],
        "witnesses": [
            {"index": int(i), "witnesses": [int(j) for j in res.witnesses[int(i)]], "normals": _mat(res.witness_normals[int(i)])}
            for i in res.detected
        ],
        "boundary_frames": frames,
        "probe_radii": _vec(res.probe_radii),
        "degenerate": [int(i) for i in res.degenerate],
        "params": None if res.params is None else {k: _num(v) for k, v in res.params.to_dict().items()},
    }


def patch_complex_doc(cx: PatchComplex) -> dict:
    return {
        "eps_int": cx.eps_int,
        "eps_bd": cx.eps_bd,
        "inner": [
            {"index": int(i), "center": _vec(c), "basis": _mat(b)}
            for i, c, b in zip(cx.inner_index, cx.inner_centers, cx.inner_bases)
        ],
        "boundary": [
            {"index": int(i), "center": _vec(c), "basis": _mat(b), "normal": _vec(w)}
            for i, c, b, w in zip(cx.boundary_index, cx.boundary_centers, cx.boundary_bases, cx.boundary_normals)
        ],
    }


def calibration_doc(rep: CalibrationReport) -> dict:
    return rep.to_dict()


def hausdorff_doc(report: dict) -> dict:
    out = {k: _num(report[k]) for k in ("sup_M_to_Mhat", "sup_Mhat_to_M", "d_H", "truth_resolution") if k in report}
    out["params"] = report.get("params", {})
    return out


def synth_sidecar(manifold, n: int, seed: int) -> dict:
    return {**manifold.metadata(), "n": int(n), "seed": int(seed)}


# --------------------------------------------------------------------------
# plot-ready CSVs


def write_boundary_csv(path, res: BoundaryResult, D: int) -> None:
    is_bd = np.zeros(res.n, dtype=bool)
    is_bd[res.detected] = True
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "is_boundary", "rho_i"] + [f"eta_{k}" for k in range(D)])
        for i in range(res.n):
            eta = res.normals.get(i)
            cells = [repr(float(v)) for v in eta] if eta is not None else [""] * D
            w.writerow([i, int(is_bd[i]), repr(float(res.probe_radii[i]))] + cells)


def write_calibration_csvs(prefix, rep: CalibrationReport) -> tuple[Path, Path]:
    """(pair distance, distortion ratio) and (rank, sorted radius) tables."""
    prefix = Path(prefix)
    p1 = prefix.with_name(prefix.name + "_distortion.csv")
    p2 = prefix.with_name(prefix.name + "_radii.csv")
    dist, ratio = rep.distortion_pairs
    with open(p1, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_distance", "ratio"])
        for a, b in zip(dist, ratio):
            w.writerow([repr(float(a)), repr(float(b))])
    with open(p2, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "rho"])
        for k, v in enumerate(rep.sorted_radii):
            w.writerow([k + 1, repr(float(v))])
    return p1, p2


def write_rows_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow(["" if r.get(c) is None else (repr(float(r[c])) if isinstance(r[c], float) else r[c]) for c in columns])


def read_rows_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------------------
# schemas

_NUM = {"type": ["number", "null"]}
_VEC = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _VEC}
_IDX = {"type": "integer", "minimum": 0}

SCHEMAS = {
    "tangent_field": {
        "type": "array",
        "items": {
            "type": "object",
            "required": ["index", "basis", "eigenvalues"],
            "properties": {"index": _IDX, "basis": _MAT, "eigenvalues": _VEC},
        },
    },
    "boundary_result": {
        "type": "object",
        "required": ["detected", "normals", "boundary_frames", "probe_radii"],
        "properties": {
            "detected": {"type": "array", "items": _IDX},
            "normals": {
                "type": "array",
                "items": {"type": "object", "required": ["index", "eta"], "properties": {"index": _IDX, "eta": _VEC}},
            },
            "witnesses": {"type": "array"},
            "boundary_frames": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["index", "basis"],
                    "properties": {"index": _IDX, "basis": {"anyOf": [_MAT, {"type": "null"}]}},
                },
            },
            "probe_radii": _VEC,
            "params": {"type": ["object", "null"]},
        },
    },
    "patch_complex": {
        "type": "object",
        "required": ["eps_int", "eps_bd", "inner", "boundary"],
        "properties": {
            "eps_int": {"type": "number", "exclusiveMinimum": 0},
            "eps_bd": {"type": "number", "exclusiveMinimum": 0},
            "inner": {"type": "array"},
            "boundary": {"type": "array"},
        },
    },
    "calibration": {
        "type": "object",
        "required": ["h", "k_used", "R0", "distortion_delta", "rho", "jump", "r"],
        "properties": {
            "h": {"type": "number", "exclusiveMinimum": 0},
            "k_used": {"type": "integer", "minimum": 1},
            "R0": {"type": "number", "exclusiveMinimum": 0},
            "distortion_delta": {"type": "number"},
            "rho": _NUM,
            "jump": {"type": "object", "required": ["index", "gap", "rule"]},
            "r": {"type": "number", "minimum": 0},
            "r_scale": {"type": "number", "minimum": 0},
        },
    },
    "hausdorff": {
        "type": "object",
        "required": ["sup_M_to_Mhat", "sup_Mhat_to_M", "truth_resolution", "params"],
        "properties": {"sup_M_to_Mhat": _NUM, "sup_Mhat_to_M": _NUM, "truth_resolution": _NUM},
    },
    "synth": {
        "type": "object",
        "required": ["kind", "intrinsic_dim", "ambient_dim", "reach", "boundary_reach", "params", "n", "seed"],
    },
    "metrics": {"type": "object"},
    "rates": {
        "type": "object",
        "required": ["kind", "n_list", "seeds", "slopes"],
        "properties": {"slopes": {"type": "object", "additionalProperties": _NUM}},
    },
}


def validate(kind: str, doc) -> None:
    if kind not in SCHEMAS:
        raise InvalidParams(f"no schema named {kind!r}")
    jsonschema.validate(doc, SCHEMAS[kind])


def write_json(path, doc, kind: str | None = None) -> None:
    """Validate (when ``kind`` is given) and write deterministically."""
    if kind is not None:
        validate(kind, doc)
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
