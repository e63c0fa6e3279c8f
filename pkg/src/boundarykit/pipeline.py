"""End-to-end runs: auto-calibration, detection, patch estimation and the
rate sweep used by the command line and the acceptance experiments.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import calibrate as cal
from .detector import BoundaryResult, DetectionParams, OwnProbes, detect, probe_own_cells
from .errors import InvalidParams
from .geomcore import PointCloud, nearest_distances
from .patches import PatchComplex, build, hausdorff_to_truth
from .synth import make_manifold
from .tangent import TangentField, estimate_all_tangents

log = logging.getLogger(__name__)

DEFAULT_JUMP_RULE = "first-above-factor"
BOUNDARY_GRID = 720  # total boundary grid size for coverage checks
EPS_BD_FACTOR = 2.0  # default eps_bd = EPS_BD_FACTOR * eps_int


@dataclass
class DetectionRun:
    report: cal.CalibrationReport
    tangents: TangentField
    result: BoundaryResult


def calibrate_cloud(
    cloud: PointCloud,
    k: int | None = None,
    delta: float = cal.DEFAULT_DELTA,
    jump_rule: str = DEFAULT_JUMP_RULE,
    factor: float = cal.DEFAULT_JUMP_FACTOR,
    h: float | None = None,
    R0: float | None = None,
    rho: float | None = None,
    manifold=None,
    threads: int | None = None,
):
    """Fill in unset parameters in dependency order: h, tangents, R0, probe
    radii (r = 0, clip 4 R0), rho.

    Returns ``(report, tangents, probes)``. With ``manifold`` given, the
    report also carries the witness-radius scale r_eff.
    """
    d = cloud.intrinsic_dim
    k_used = cal.default_k(cloud.n, d) if k is None else int(k)
    if h is None:
        h = cal.bandwidth_h(cloud, k_used)
    tangents = estimate_all_tangents(cloud, h, threads=threads)
    if R0 is None:
        R0 = cal.scale_R0(cloud, tangents, delta)
    probes = probe_own_cells(cloud, tangents, R0, threads=threads)
    radii = probes.radii
    jump = None
    if rho is None:
        jump = cal.find_jump(radii, jump_rule, factor, scale=h) if cloud.n >= 2 else None
        rho = cal.threshold_rho(radii, 4 * R0, jump_rule, factor, scale=h) if cloud.n >= 2 else math.inf
        rho = min(rho, 2 * R0) if not math.isinf(rho) else rho
    r_scale = 0.0
    if manifold is not None:
        r_scale = cal.r_effective(cloud.n, d, R0, manifold.min_reach, manifold.volume)
    report = cal.CalibrationReport(
        h=float(h),
        k_used=k_used,
        R0=float(R0),
        distortion_delta=float(delta),
        rho=float(rho),
        jump_index=None if jump is None else jump.index,
        jump_gap=None if jump is None else jump.gap,
        jump_rule=jump_rule,
        r=0.0,
        r_scale=r_scale,
        sorted_radii=np.sort(radii),
    )
    return report, tangents, probes


def _empty_result(cloud: PointCloud, probes: OwnProbes, params: DetectionParams | None) -> BoundaryResult:
    return BoundaryResult(
        detected=np.zeros(0, dtype=int),
        witnesses={},
        witness_normals={},
        normals={},
        boundary_frames={},
        probe_radii=probes.radii,
        probe_bounded=probes.bounded,
        params=params,
    )


def run_detection(cloud: PointCloud, r: float = 0.0, manifold=None, threads: int | None = None, **calib) -> DetectionRun:
    """Calibrate unset parameters, then detect boundary observations.

    An infinite rho (no jump in the radii) means no cell is large enough:
    the detected set is empty.
    """
    report, tangents, probes = calibrate_cloud(cloud, manifold=manifold, threads=threads, **calib)
    report.r = float(r)
    if math.isinf(report.rho):
        return DetectionRun(report, tangents, _empty_result(cloud, probes, None))
    params = DetectionParams(R0=report.R0, r=float(r), rho=report.rho, h=report.h)
    result = detect(cloud, tangents, params, threads=threads, own_probes=probes)
    return DetectionRun(report, tangents, result)


def default_eps(cloud: PointCloud, h: float | None = None) -> tuple[float, float]:
    """Default patch radii: eps_int is the largest (d+1)-nearest-neighbour
    distance (a covering-radius proxy), eps_bd = EPS_BD_FACTOR * eps_int."""
    eps_int = cal.bandwidth_h(cloud, min(cloud.n, cloud.intrinsic_dim + 1))
    if not eps_int > 0:
        eps_int = h if h else 1.0
    return eps_int, EPS_BD_FACTOR * eps_int


def estimate(
    cloud: PointCloud,
    run: DetectionRun,
    eps_int: float | None = None,
    eps_bd: float | None = None,
    adaptive: bool = True,
) -> PatchComplex:
    e_int, e_bd = default_eps(cloud, run.report.h)
    eps_int = e_int if eps_int is None else eps_int
    eps_bd = e_bd if eps_bd is None else eps_bd
    return build(cloud, run.tangents, run.result, eps_int, eps_bd, adaptive=adaptive)


def boundary_metrics(cloud: PointCloud, result: BoundaryResult, manifold, grid: int = BOUNDARY_GRID) -> dict:
    """Cover error (sup over a boundary grid of the distance to the detected
    set) and excess (sup over detected points of the distance to the
    boundary). Empty boundary or empty detected set give None/inf."""
    out = {"n_detected": int(len(result.detected))}
    if not manifold.has_boundary:
        out["dH_boundary_cover"] = None
        out["dH_boundary_excess"] = None
        return out
    G = _boundary_grid(manifold, grid)
    Y = cloud.points[result.detected]
    out["dH_boundary_cover"] = float(nearest_distances(G, Y).max()) if len(Y) else math.inf
    out["dH_boundary_excess"] = float(np.max(manifold.distance_to_boundary(Y))) if len(Y) else 0.0
    return out


def _boundary_grid(manifold, total: int) -> np.ndarray:
    # annulus-like manifolds return m points per component; aim for `total` overall
    G = manifold.boundary_grid(total)
    if len(G) > total:
        per = max(1, total * total // len(G))
        G = manifold.boundary_grid(per)
    return G


def log_log_slope(n_values, values) -> float | None:
    """Least-squares slope of log(value) against log(n); None with fewer than
    three distinct n or any nonpositive / nonfinite value."""
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(np.unique(n_values)) < 3:
        return None
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        return None
    return float(np.polyfit(np.log(n_values), np.log(values), 1)[0])


def rates(
    kind: str,
    n_list,
    seeds,
    manifold_params: dict | None = None,
    with_manifold: bool = False,
    threads: int | None = None,
    **calib,
):
    """Repeat detection (and optionally estimation) over n_list x seeds.

    Returns ``(rows, slopes)``: one dict per run and the fitted log-log slope
    of each metric column against n (seed-averaged per n).
    """
    if not len(n_list):
        raise InvalidParams("n_list must not be empty")
    manifold = make_manifold(kind, **(manifold_params or {}))
    rows = []
    for n in n_list:
        for seed in seeds:
            cloud = manifold.sample_uniform(int(n), int(seed))
            run = run_detection(cloud, manifold=manifold, threads=threads, **calib)
            row = {"n": int(n), "seed": int(seed)}
            row.update(boundary_metrics(cloud, run.result, manifold))
            row.update({"h": run.report.h, "R0": run.report.R0, "rho": run.report.rho, "r_eff": run.report.r_scale})
            if with_manifold:
                cx = estimate(cloud, run)
                row["dH_manifold"] = hausdorff_to_truth(cx, manifold, seed=int(seed))["d_H"]
            rows.append(row)
    slopes = {}
    ns = sorted({r["n"] for r in rows})
    for col in ("dH_boundary_cover", "dH_boundary_excess", "dH_manifold"):
        if not rows or col not in rows[0] or rows[0][col] is None:
            continue
        means = [np.mean([r[col] for r in rows if r["n"] == n]) for n in ns]
        slopes[col] = log_log_slope(ns, means)
    return rows, slopes
