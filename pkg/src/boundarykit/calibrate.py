"""Data-driven choice of the PCA bandwidth h, localization scale R0 and
detection width rho.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidK, InvalidParams, LowContrast, NoAdmissibleScale, TooFewRadii
from .geomcore import PointCloud
from .tangent import TangentField

JUMP_RULES = ("max", "first-above-factor")
DEFAULT_DELTA = 0.3
DEFAULT_JUMP_FACTOR = 1.0


def default_k(n: int, d: int) -> int:
    """ceil(d log n), clamped to [d + 1, n]."""
    return int(min(n, max(d + 1, math.ceil(d * math.log(n)))))


def knn_radii(cloud: PointCloud, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest point, itself counted first."""
    if not 1 <= k <= cloud.n:
        raise InvalidK(f"k must lie in [1, {cloud.n}], got {k}")
    out = np.empty(cloud.n)
    for i in range(cloud.n):
        row = cloud.distances_from(i)
        out[i] = np.partition(row, k - 1)[k - 1]
    return out


def bandwidth_h(cloud: PointCloud, k: int | None = None) -> float:
    """Smallest h such that every ball B(X_i, h) holds at least k sample points."""
    if k is None:
        k = default_k(cloud.n, cloud.intrinsic_dim)
    return float(knn_radii(cloud, int(k)).max())


def _distortion_rows(cloud: PointCloud, tangents: TangentField, i: int):
    X = cloud.points
    diff = X - X[i]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    proj = np.linalg.norm(tangents.frames[i].coords(diff), axis=1)
    mask = dist > 0
    return dist[mask], proj[mask] / dist[mask]


def scale_R0(cloud: PointCloud, tangents: TangentField, delta: float = DEFAULT_DELTA) -> float:
    """Largest pair distance R below which every (ordered) pair keeps its
    tangential-projection ratio within delta of 1.

    The ratio for the pair (i, j) uses the frame at X_i. If no pair violates
    the tolerance, R0 is the largest pairwise distance; otherwise it is the
    largest pair distance strictly below the closest violating pair.
    """
    if not 0 < delta < 1:
        raise InvalidParams("distortion tolerance delta must lie in (0, 1)")
    n = cloud.n
    first_violation = math.inf
    for i in range(n):
        dist, ratio = _distortion_rows(cloud, tangents, i)
        bad = np.abs(ratio - 1.0) > delta
        if bad.any():
            first_violation = min(first_violation, float(dist[bad].min()))
    best = 0.0
    for i in range(n):
        dist, _ = _distortion_rows(cloud, tangents, i)
        ok = dist[dist < first_violation]
        if len(ok):
            best = max(best, float(ok.max()))
    if best == 0.0:
        raise NoAdmissibleScale(
            f"the closest pair already violates the distortion tolerance delta={delta:g}"
        )
    return best


def distortion_curve(cloud: PointCloud, tangents: TangentField, max_pairs: int = 20000, seed: int = 0):
    """(pair distance, projection ratio) samples for plotting, sorted by distance."""
    rng = np.random.default_rng(seed)
    n = cloud.n
    rows = rng.choice(n, size=min(n, max(1, max_pairs // max(1, n - 1) + 1)), replace=False)
    D, Rt = [], []
    for i in np.sort(rows):
        dist, ratio = _distortion_rows(cloud, tangents, int(i))
        D.append(dist)
        Rt.append(ratio)
    D, Rt = np.concatenate(D), np.concatenate(Rt)
    if len(D) > max_pairs:
        keep = rng.choice(len(D), size=max_pairs, replace=False)
        D, Rt = D[keep], Rt[keep]
    order = np.argsort(D, kind="stable")
    return D[order], Rt[order]


@dataclass(frozen=True)
class Jump:
    index: int  # jump sits between sorted[index] and sorted[index + 1]
    gap: float
    low: float
    high: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.low + self.high)


def find_jump(radii, rule: str = "max", factor: float = DEFAULT_JUMP_FACTOR, scale: float | None = None) -> Jump | None:
    """Locate the jump in the sorted radii.

    ``max``: the largest consecutive gap (earliest on ties).
    ``first-above-factor``: the first consecutive pair that crosses
    ``factor * scale``, i.e. the smallest sorted radius at or above that
    level together with its predecessor. ``scale`` is the reference size of
    interior cells (the pipeline passes the PCA bandwidth h). Returns None
    when no radius reaches the level, and also when every radius does (no
    interior regime to separate from).
    """
    r = np.sort(np.asarray(radii, dtype=float))
    if len(r) < 2 or not np.all(np.isfinite(r)):
        raise TooFewRadii("need at least two finite radii")
    gaps = np.diff(r)
    if rule == "max":
        i = int(np.argmax(gaps))
    elif rule == "first-above-factor":
        if scale is None or not scale > 0 or not factor > 0:
            raise InvalidParams("the first-above-factor rule needs a positive reference scale and factor")
        k = int(np.searchsorted(r, factor * scale, side="left"))
        if k == 0 or k == len(r):
            return None
        i = k - 1
    else:
        raise InvalidParams(f"unknown jump rule {rule!r}; choose from {JUMP_RULES}")
    return Jump(index=i, gap=float(gaps[i]), low=float(r[i]), high=float(r[i + 1]))


def threshold_rho(
    radii,
    clip: float | None = None,
    rule: str = "max",
    factor: float = DEFAULT_JUMP_FACTOR,
    scale: float | None = None,
) -> float:
    """Detection width rho: the midpoint of the jump in the sorted probe radii.

    Clipped radii (equal to the clip box size) take part like any other;
    ``clip`` is accepted for the record only. When the radii show no
    contrast a LowContrast warning is issued: the max rule then returns the
    common value, the factor rule returns +inf (nothing is rho-large).
    """
    jump = find_jump(radii, rule, factor, scale)
    if jump is None:
        warnings.warn("no jump crosses the reference level in the sorted radii", LowContrast, stacklevel=2)
        return math.inf
    if jump.gap == 0.0:
        warnings.warn("all probe radii are equal; rho is degenerate", LowContrast, stacklevel=2)
    return jump.midpoint


def r_effective(n: int, d: int, R0: float, reach: float, volume: float) -> float:
    """Witness radius scale r_- of the detection guarantees, evaluated with
    unit constant and the uniform density 1 / volume:

        sqrt(reach * R0) * (volume * log n / (n * R0^d)) ** (1 / (d + 1)).

    The runtime uses r = 0; this value only sets the scale of the
    theoretical error bounds (2 r^2 / tau, 3 r, 20 r / sqrt(R0 tau)).
    """
    if n < 2 or not (R0 > 0 and reach > 0 and volume > 0):
        raise InvalidParams("r_effective needs n >= 2 and positive R0, reach, volume")
    return math.sqrt(reach * R0) * (volume * math.log(n) / (n * R0**d)) ** (1.0 / (d + 1))


@dataclass
class CalibrationReport:
    h: float
    k_used: int
    R0: float
    distortion_delta: float
    rho: float
    jump_index: int | None
    jump_gap: float | None
    jump_rule: str
    r: float = 0.0
    r_scale: float = 0.0
    sorted_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    distortion_pairs: tuple = field(default_factory=lambda: (np.zeros(0), np.zeros(0)))

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "k_used": self.k_used,
            "R0": self.R0,
            "distortion_delta": self.distortion_delta,
            "rho": None if math.isinf(self.rho) else self.rho,
            "jump": {"index": self.jump_index, "gap": self.jump_gap, "rule": self.jump_rule},
            "r": self.r,
            "r_scale": self.r_scale,
        }
