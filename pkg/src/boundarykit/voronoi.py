"""Radius and prominent direction of one site's Voronoi cell among
d-dimensional projected sites.

The cell of ``p`` is the polytope

    { O : 2 (q - p) . O <= |q|^2 - |p|^2  for every other site q }

intersected with the axis-aligned box of half-width ``clip`` around ``p``.
Its radius (largest distance to ``p``) is attained at a vertex, so the
probe enumerates vertices as feasible solutions of d-subsets of the
facet hyperplanes.

Enumerating every d-subset of all m bisectors is hopeless once m reaches
the thousands (full-dimensional data puts the whole cloud inside one
localization ball), so the hyperplane pool is grown by cutting planes:
start from the box and the nearest sites, enumerate vertices, then add
the nearest sites whose bisector cuts off some current vertex. When no
site cuts any vertex, the polytope is the exact cell. Hyperplanes that
are tight at no vertex are redundant and dropped from the pool.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, DimensionTooHigh, EmptyInput, InvalidParams
from .geomcore import Frame, PointCloud, neighbors_within
from .numerics import DEFAULT_POLICY, NumericPolicy

MAX_DIM = 6


@dataclass(frozen=True)
class VoronoiProbe:
    radius: float
    direction: np.ndarray | None
    bounded: bool
    witness: np.ndarray


@lru_cache(maxsize=256)
def _subsets(c: int, d: int) -> np.ndarray:
    return np.array(list(combinations(range(c), d)), dtype=np.intp).reshape(-1, d)


def _vertices(A: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    """Feasible vertices of {x : A x <= b}; rows of A have unit norm."""
    d = A.shape[1]
    idx = _subsets(A.shape[0], d)
    M = A[idx]
    rhs = b[idx]
    if d == 1:
        a = M[:, 0, 0]
        ok = np.abs(a) > 1e-12
        V = (rhs[ok, 0] / a[ok])[:, None]
    else:
        # singular subsets (parallel or dependent bisectors) are skipped
        ok = np.abs(np.linalg.det(M)) > 1e-12
        V = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    feasible = np.all(A @ V.T <= b[:, None] + tol, axis=0)
    return V[feasible]


def cell_probe(
    sites,
    p_index: int,
    clip: float,
    policy: NumericPolicy = DEFAULT_POLICY,
    seed_sites: int | None = None,
    batch: int | None = None,
) -> VoronoiProbe:
    """Probe the clipped Voronoi cell of ``sites[p_index]``.

    Parameters
    ----------
    sites : array of shape (m, d)
        Site coordinates. A 1-D array is read as m scalar sites.
    p_index : int
        Which site's cell to probe.
    clip : float
        Half-width of the box around the site that replaces unbounded cells.
    seed_sites, batch : int, optional
        Size of the initial hyperplane pool and the number of cutting sites
        added per round. They only affect speed, never the result.

    Returns
    -------
    VoronoiProbe
        ``radius`` is the largest distance from the site to its cell,
        ``witness`` the farthest vertex (ties go to the lexicographically
        smallest), ``direction`` the unit vector towards it, and
        ``bounded`` is False when a farthest vertex sits on the clip box.
    """
    S = np.asarray(sites, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    if S.ndim != 2 or S.shape[0] < 1:
        raise EmptyInput("cell_probe needs at least one site")
    m, d = S.shape
    if d > MAX_DIM:
        raise DimensionTooHigh(f"vertex enumeration supports d <= {MAX_DIM}, got {d}")
    if not 0 <= p_index < m:
        raise IndexError(f"p_index {p_index} outside [0, {m})")
    if not clip > 0:
        raise InvalidParams("clip must be positive")

    p = S[p_index]
    Q = np.delete(S, p_index, axis=0) - p
    dist = np.sqrt(np.einsum("ij,ij->i", Q, Q))
    keep = dist > policy.dedupe
    Q, dist = Q[keep], dist[keep]
    order = np.argsort(dist, kind="stable")
    Q, dist = Q[order], dist[order]
    # bisector of q in coordinates centred at p: (q/|q|) . O <= |q| / 2
    site_A = Q / dist[:, None] if len(dist) else np.zeros((0, d))
    site_b = dist / 2.0

    box_A = np.vstack([np.eye(d), -np.eye(d)])
    box_b = np.full(2 * d, float(clip))

    tol = policy.rel * max(1.0, float(clip))
    if seed_sites is None:
        seed_sites = 3 * 2**d
    if batch is None:
        batch = 2 * d
    active = np.arange(min(seed_sites, len(dist)))

    while True:
        A = np.vstack([box_A, site_A[active]])
        b = np.concatenate([box_b, site_b[active]])
        V = _vertices(A, b, tol)
        if len(site_b):
            slack = site_A @ V.T - site_b[:, None]
            cutting = np.flatnonzero(slack.max(axis=1) > tol)
        else:
            cutting = np.zeros(0, dtype=np.intp)
        if len(cutting) == 0:
            break
        if len(active):
            tight = np.abs(site_A[active] @ V.T - site_b[active][:, None]) <= 10 * tol
            active = active[tight.any(axis=1)]
        active = np.union1d(active, cutting[:batch])

    norms = np.sqrt(np.einsum("ij,ij->i", V, V))
    radius = float(norms.max())
    ties = V[norms >= radius - policy.abs * max(1.0, float(clip))]
    best = ties[np.lexsort(ties.T[::-1])[0]]
    on_box = np.any(np.abs(ties) >= clip - tol, axis=1)
    r_best = float(np.linalg.norm(best))
    direction = best / r_best if r_best > 0 else None
    return VoronoiProbe(
        radius=radius,
        direction=direction,
        bounded=not bool(on_box.any()),
        witness=p + best,
    )


def project_local_cloud(cloud: PointCloud, j: int, frame: Frame, R0: float):
    """Tangential coordinates of the R0-neighbourhood of X_j, centred at X_j.

    Returns ``(sites, index_map)`` where ``sites[k]`` is the projection of
    ``X[index_map[k]] - X_j`` onto ``frame`` (so the entry for j itself is
    the origin).
    """
    if frame.k != cloud.intrinsic_dim:
        raise DimensionMismatch(f"frame dimension {frame.k} != intrinsic dimension {cloud.intrinsic_dim}")
    if frame.ambient_dim != cloud.ambient_dim:
        raise DimensionMismatch("frame and cloud live in different ambient spaces")
    idx = neighbors_within(cloud, j, R0)
    offsets = cloud.points[idx] - cloud.points[j]
    return frame.coords(offsets), idx
