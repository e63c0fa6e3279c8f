"""Geometric substrate: point clouds, orthonormal frames, projections,
principal angles, Hausdorff distance and brute-force neighbor queries.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySet,
    IndexOutOfRange,
    InvalidParams,
    RankDeficient,
)
from .numerics import DEFAULT_POLICY, NumericPolicy

# Above this size the full distance matrix is not cached.
DISTANCE_MATRIX_LIMIT = 20000


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PointCloud:
    """n points in R^D, sampled from a d-dimensional manifold.

    Points are stored as a read-only ``(n, D)`` float array; results
    elsewhere in the library refer to points by row index.
    """

    points: np.ndarray
    intrinsic_dim: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidParams("a point cloud needs at least one point with D >= 1 coordinates")
        if not np.all(np.isfinite(pts)):
            raise InvalidParams("point coordinates must be finite")
        d = int(self.intrinsic_dim)
        if not 1 <= d <= pts.shape[1]:
            raise InvalidParams(f"intrinsic_dim must lie in [1, {pts.shape[1]}], got {d}")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "intrinsic_dim", d)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def distances_from(self, i: int) -> np.ndarray:
        """Euclidean distances from point ``i`` to every point."""
        _check_index(self, i)
        dm = self._cache.get("dist")
        if dm is not None:
            return dm[i]
        return _row_distances(self.points, self.points[i])

    def distance_matrix(self) -> np.ndarray:
        """Full pairwise distance matrix, built once and cached read-only.

        Only available for ``n <= DISTANCE_MATRIX_LIMIT``.
        """
        dm = self._cache.get("dist")
        if dm is None:
            if self.n > DISTANCE_MATRIX_LIMIT:
                raise InvalidParams(f"distance matrix disabled above n={DISTANCE_MATRIX_LIMIT}")
            dm = np.empty((self.n, self.n))
            for i in range(self.n):
                dm[i] = _row_distances(self.points, self.points[i])
            dm.flags.writeable = False
            self._cache["dist"] = dm
        return dm


def _row_distances(points: np.ndarray, p: np.ndarray) -> np.ndarray:
    diff = points - p
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _check_index(cloud: PointCloud, i: int) -> None:
    if not 0 <= int(i) < cloud.n:
        raise IndexOutOfRange(f"index {i} outside [0, {cloud.n})")


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal basis of a k-dimensional linear subspace of R^D.

    ``basis`` has shape ``(k, D)``; rows are the basis vectors.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.shape[0] < 1 or b.shape[0] > b.shape[1]:
            raise InvalidParams(f"frame must have 1 <= k <= D, got basis shape {b.shape}")
        object.__setattr__(self, "basis", _readonly(b))

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Tangential coefficients of ``v`` (one vector or rows of vectors)."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.ambient_dim:
            raise DimensionMismatch(f"vector dimension {v.shape[-1]} != frame dimension {self.ambient_dim}")
        return v @ self.basis.T

    def lift(self, t: np.ndarray) -> np.ndarray:
        """Map in-frame coefficients back to R^D."""
        return np.asarray(t, dtype=float) @ self.basis

    def project(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``v`` onto the span, in ambient coordinates."""
        return self.lift(self.coords(v))

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def rotated(self, Q: np.ndarray) -> "Frame":
        """Frame spanning ``Q`` applied to this span."""
        return Frame(self.basis @ np.asarray(Q, dtype=float).T)


@dataclass(frozen=True)
class Decomposition:
    tangential: np.ndarray
    normal_norm: float


def orthonormalize(vectors, policy: NumericPolicy = DEFAULT_POLICY) -> Frame:
    """Gram-Schmidt orthonormal frame spanning ``vectors`` (order and
    orientation of the leading vectors preserved).

    Raises RankDeficient when the smallest singular value is below
    ``policy.orthonormal`` times the largest.
    """
    A = np.atleast_2d(np.asarray(vectors, dtype=float))
    if A.shape[0] > A.shape[1]:
        raise RankDeficient(f"{A.shape[0]} vectors cannot be independent in R^{A.shape[1]}")
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0 or s[-1] <= policy.orthonormal * s[0]:
        raise RankDeficient("vectors are linearly dependent within tolerance")
    Q, R = np.linalg.qr(A.T)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Frame((Q * signs).T)


def decompose(frame: Frame, v) -> Decomposition:
    """Split ``v`` into tangential coefficients and the norm of its normal part."""
    v = np.asarray(v, dtype=float)
    t = frame.coords(v)
    residual = v - frame.lift(t)
    return Decomposition(tangential=t, normal_norm=float(np.linalg.norm(residual)))


def principal_angle(F1: Frame, F2: Frame) -> float:
    """Operator norm of the difference of the two orthogonal projectors."""
    if F1.ambient_dim != F2.ambient_dim:
        raise DimensionMismatch(f"frames live in R^{F1.ambient_dim} and R^{F2.ambient_dim}")
    diff = F1.projector() - F2.projector()
    eig = np.linalg.eigvalsh(diff)
    return float(min(1.0, np.max(np.abs(eig))))


def hausdorff(A, B, chunk: int | None = None) -> float:
    """Hausdorff distance between two finite point sets."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise EmptySet("hausdorff distance needs two nonempty sets")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch("point sets have different ambient dimensions")
    return max(directed_hausdorff(A, B, chunk), directed_hausdorff(B, A, chunk))


def directed_hausdorff(A: np.ndarray, B: np.ndarray, chunk: int | None = None) -> float:
    """max over a in A of the distance from a to B."""
    return float(np.max(nearest_distances(A, B, chunk)))


def nearest_distances(A: np.ndarray, B: np.ndarray, chunk: int | None = None) -> np.ndarray:
    """For each row of A, the distance to the nearest row of B.

    Differences are formed explicitly (no |a|^2 + |b|^2 - 2ab expansion) so
    coincident points give exactly zero.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if chunk is None:
        chunk = max(1, (1 << 22) // (B.shape[0] * B.shape[1]))
    out = np.empty(A.shape[0])
    for s in range(0, A.shape[0], chunk):
        diff = A[s : s + chunk, None, :] - B[None, :, :]
        out[s : s + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).min(axis=1))
    return out


def neighbors_within(cloud: PointCloud, center_index: int, radius: float) -> np.ndarray:
    """Indices j with |X_j - X_center| <= radius, ascending, center included."""
    _check_index(cloud, center_index)
    if radius < 0:
        raise InvalidParams("radius must be nonnegative")
    dist = cloud.distances_from(center_index)
    idx = np.flatnonzero(dist <= radius)
    if center_index not in idx:  # radius 0 with exact self-distance always holds, kept for safety
        idx = np.union1d(idx, [center_index])
    return idx
