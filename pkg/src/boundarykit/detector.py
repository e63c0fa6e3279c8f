"""Boundary observations, outward normal estimates, boundary tangent frames
and farthest-point sparsification.

A point X_i is a boundary observation when, for some witness X_j within
distance r of it, the Voronoi cell of X_i in the tangential projection
(onto the estimated frame at X_j) of the R0-ball around X_j reaches at
least rho away from X_i. Each such witness contributes a unit normal: the
direction from the projected X_i to the farthest vertex of that cell,
lifted back to R^D. The point's normal estimate is the plain mean of its
witness normals and is deliberately left unnormalised.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateNormal, DegenerateNormalWarning, EmptySet, InvalidParams, ParamsOutOfRange
from .geomcore import Frame, PointCloud, orthonormalize
from .numerics import DEFAULT_POLICY, NumericPolicy, resolve_threads
from .tangent import TangentField, _sign_fix
from .voronoi import cell_probe, project_local_cloud

log = logging.getLogger(__name__)

CLIP_FACTOR = 4.0


@dataclass(frozen=True)
class DetectionParams:
    R0: float
    r: float
    rho: float
    h: float

    def __post_init__(self):
        if not self.R0 > 0:
            raise ParamsOutOfRange("R0 must be positive")
        if not self.r >= 0:
            raise ParamsOutOfRange("r must be nonnegative")
        if self.r > self.R0:
            raise ParamsOutOfRange("r must not exceed R0 (witnesses must see X_i in their R0-ball)")
        if not 0 < self.rho <= 2 * self.R0:
            raise ParamsOutOfRange(f"rho must lie in (0, 2 R0] = (0, {2 * self.R0:g}], got {self.rho:g}")
        if not self.h > 0:
            raise ParamsOutOfRange("h must be positive")

    @property
    def clip(self) -> float:
        return CLIP_FACTOR * self.R0

    # helper values from the detection guarantees (read-only)
    @property
    def rho_minus(self) -> float:
        return self.R0 / 4

    @property
    def rho_plus(self) -> float:
        return self.R0 / 2

    @property
    def r_plus(self) -> float:
        return self.R0 / 12

    def to_dict(self) -> dict:
        return {"R0": self.R0, "r": self.r, "rho": self.rho, "h": self.h, "clip": self.clip}


@dataclass
class BoundaryResult:
    detected: np.ndarray
    witnesses: dict
    witness_normals: dict
    normals: dict
    boundary_frames: dict
    probe_radii: np.ndarray
    probe_bounded: np.ndarray
    params: DetectionParams
    degenerate: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.probe_radii)

    def normal_matrix(self, D: int) -> np.ndarray:
        """(len(detected), D) array of mean normals in detected order."""
        if len(self.detected) == 0:
            return np.zeros((0, D))
        return np.array([self.normals[i] for i in self.detected])


def boundary_tangent(frame: Frame, normal, policy: NumericPolicy = DEFAULT_POLICY) -> Frame | None:
    """Orthogonal complement, inside the frame, of the projected normal.

    For a one-dimensional frame the complement is the zero subspace and
    None is returned.
    """
    w = frame.coords(np.asarray(normal, dtype=float))
    nw = np.linalg.norm(w)
    if nw <= policy.degenerate_normal:
        raise DegenerateNormal("normal is orthogonal to the frame")
    k = frame.k
    if k == 1:
        return None
    u = w / nw
    vals, vecs = np.linalg.eigh(np.eye(k) - np.outer(u, u))
    coeffs = _sign_fix(vecs[:, ::-1][:, : k - 1].T, policy.sign_threshold)
    return orthonormalize(frame.lift(coeffs))


def _probe_witness(cloud, tangents, params, j, policy):
    """All (i, radius, bounded, lifted normal) with X_i in B(X_j, r), probed in the frame at X_j."""
    frame = tangents.frames[j]
    sites, idx = project_local_cloud(cloud, j, frame, params.R0)
    dist = cloud.distances_from(j)[idx]
    out = []
    for pos in np.flatnonzero(dist <= params.r):
        probe = cell_probe(sites, int(pos), params.clip, policy)
        normal = frame.lift(probe.direction) if probe.direction is not None else None
        out.append((int(idx[pos]), probe.radius, probe.bounded, normal))
    return out


@dataclass(frozen=True)
class OwnProbes:
    """Probe of every X_i in its own frame (witness j = i) at scale R0."""

    R0: float
    radii: np.ndarray
    bounded: np.ndarray
    normals: list


def probe_own_cells(
    cloud: PointCloud,
    tangents: TangentField,
    R0: float,
    threads: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> OwnProbes:
    """Radius, boundedness and lifted direction of each X_i's projected cell
    in its own frame (clip 4 R0). These are the r = 0 probes."""
    params = DetectionParams(R0=R0, r=0.0, rho=2 * R0, h=1.0)
    per = _run_witnesses(cloud, tangents, params, threads, policy)
    radii = np.array([p[0][1] for p in per])
    bounded = np.array([p[0][2] for p in per], dtype=bool)
    return OwnProbes(float(R0), radii, bounded, [p[0][3] for p in per])


def own_cell_radii(cloud, tangents, R0, threads=None, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Radius of each X_i's projected cell in its own frame (clip 4 R0)."""
    return probe_own_cells(cloud, tangents, R0, threads, policy).radii


def _run_witnesses(cloud, tangents, params, threads, policy):
    n = cloud.n
    if len(tangents.frames) != n:
        raise InvalidParams("tangent field and cloud have different sizes")

    def work(chunk):
        return [_probe_witness(cloud, tangents, params, int(j), policy) for j in chunk]

    workers = resolve_threads(threads)
    chunks = np.array_split(np.arange(n), max(1, min(n, 4 * workers)))
    if workers == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    return [w for part in parts for w in part]


def detect(
    cloud: PointCloud,
    tangents: TangentField,
    params: DetectionParams,
    threads: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
    own_probes: OwnProbes | None = None,
) -> BoundaryResult:
    """Boundary observations of ``cloud`` with their normal estimates.

    ``probe_radii[i]`` is the radius of X_i's cell in its own frame
    (witness j = i), used by the rho heuristic; with r = 0 that is the only
    probe. Precomputed ``own_probes`` at the same R0 (from calibration) are
    reused when r = 0.
    """
    n = cloud.n
    if own_probes is not None and params.r == 0.0 and own_probes.R0 == params.R0 and len(own_probes.radii) == n:
        per_witness = [
            [(j, own_probes.radii[j], own_probes.bounded[j], own_probes.normals[j])] for j in range(n)
        ]
    else:
        per_witness = _run_witnesses(cloud, tangents, params, threads, policy)

    probe_radii = np.zeros(n)
    probe_bounded = np.ones(n, dtype=bool)
    witnesses: dict = {}
    witness_normals: dict = {}
    for j, probes in enumerate(per_witness):
        for i, radius, bounded, normal in probes:
            if i == j:
                probe_radii[i] = radius
                probe_bounded[i] = bounded
            if radius >= params.rho - policy.rho_compare and normal is not None:
                witnesses.setdefault(i, []).append(j)
                witness_normals.setdefault(i, []).append(normal)

    detected = np.array(sorted(witnesses), dtype=int)
    normals, frames, degenerate = {}, {}, []
    for i in detected:
        W = np.array(witness_normals[i])
        witness_normals[i] = W
        eta = W.mean(axis=0)
        normals[i] = eta
        try:
            frames[i] = boundary_tangent(tangents.frames[i], eta, policy)
        except DegenerateNormal:
            frames[i] = None
            degenerate.append(int(i))
    if degenerate:
        msg = f"{len(degenerate)} boundary observations have a vanishing mean normal"
        log.warning(msg)
        warnings.warn(msg, DegenerateNormalWarning, stacklevel=2)
    return BoundaryResult(
        detected=detected,
        witnesses={int(i): witnesses[i] for i in detected},
        witness_normals={int(i): witness_normals[i] for i in detected},
        normals={int(i): normals[i] for i in detected},
        boundary_frames={int(i): frames[i] for i in detected},
        probe_radii=probe_radii,
        probe_bounded=probe_bounded,
        params=params,
        degenerate=degenerate,
    )


def sparsify(points, eps: float) -> np.ndarray:
    """Greedy farthest-point sampling from index 0.

    Stops once every remaining point is within ``eps`` of the selection, so
    the selection is an eps-covering made of points more than eps apart.
    Returned indices are in selection order.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        raise EmptySet("cannot sparsify an empty point set")
    if not eps > 0:
        raise InvalidParams("eps must be positive")
    chosen = [0]
    d = np.linalg.norm(P - P[0], axis=1)
    while True:
        k = int(np.argmax(d))
        if d[k] <= eps:
            break
        chosen.append(k)
        d = np.minimum(d, np.linalg.norm(P - P[k], axis=1))
    return np.array(chosen, dtype=int)


def boundary_structure(result: BoundaryResult, cloud: PointCloud, eps: float):
    """Sparsified boundary sample and its boundary frames: the inputs a
    tangential Delaunay reconstruction of the boundary would consume."""
    if len(result.detected) == 0:
        return np.zeros(0, dtype=int), []
    sel = sparsify(cloud.points[result.detected], eps)
    idx = result.detected[sel]
    return idx, [result.boundary_frames[int(i)] for i in idx]


def normal_errors(result: BoundaryResult, cloud: PointCloud, manifold) -> np.ndarray:
    """|eta_true - eta_i / |eta_i|| for every detected point with a usable normal."""
    errs = []
    for i in result.detected:
        eta = result.normals[int(i)]
        norm = np.linalg.norm(eta)
        if norm <= DEFAULT_POLICY.degenerate_normal:
            continue
        true = manifold.exact_outward_normal(cloud.points[i])
        errs.append(float(np.linalg.norm(true - eta / norm)))
    return np.array(errs)
