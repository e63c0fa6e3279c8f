"""Local PCA tangent-space estimation.

The local covariance at X_i sums the outer products of the offsets to the
points inside the closed ball B(X_i, h), but divides by n - 1 (the whole
sample minus one), not by the neighbour count. The scale does not change
the eigenvectors, but it is what the covariance is defined as, and
tests pin it down.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, InsufficientNeighbors, InvalidParams
from .geomcore import Frame, PointCloud, neighbors_within
from .numerics import DEFAULT_POLICY, NumericPolicy, resolve_threads


@dataclass(frozen=True)
class TangentField:
    frames: list
    bandwidth: float
    neighbor_counts: np.ndarray
    eigenvalues: np.ndarray

    def __len__(self):
        return len(self.frames)


def local_covariance(cloud: PointCloud, i: int, h: float) -> np.ndarray:
    if not h > 0:
        raise InvalidParams("bandwidth h must be positive")
    if cloud.n < 2:
        raise InvalidParams("local covariance needs n >= 2")
    idx = neighbors_within(cloud, i, h)
    idx = idx[idx != i]
    Y = cloud.points[idx] - cloud.points[i]
    return (Y.T @ Y) / (cloud.n - 1)


def _sign_fix(vecs: np.ndarray, threshold: float) -> np.ndarray:
    # rows; make the first component above threshold positive
    out = vecs.copy()
    for r in range(out.shape[0]):
        nz = np.flatnonzero(np.abs(out[r]) > threshold)
        if len(nz) and out[r, nz[0]] < 0:
            out[r] = -out[r]
    return out


def estimate_tangent(
    cloud: PointCloud,
    i: int,
    h: float,
    d: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
    return_eigenvalues: bool = False,
):
    """Span of the top-d eigenvectors of the local covariance at X_i.

    With ``return_eigenvalues`` the result is ``(frame, eigenvalues
    descending, neighbour count)``.

    Raises InsufficientNeighbors when fewer than d other points lie in
    B(X_i, h) and DegenerateSpectrum when the top-d eigenspace is not
    well defined (lambda_d ~ 0 relative to lambda_1, or lambda_d tied with
    lambda_{d+1}).
    """
    d = cloud.intrinsic_dim if d is None else int(d)
    if cloud.n < 2:
        raise InsufficientNeighbors(f"point {i}: cloud has a single point", index=i)
    idx = neighbors_within(cloud, i, h)
    if len(idx) - 1 < d:
        raise InsufficientNeighbors(
            f"point {i}: {len(idx) - 1} neighbours within h={h:g}, need {d}", index=i
        )
    others = idx[idx != i]
    Y = cloud.points[others] - cloud.points[i]
    cov = (Y.T @ Y) / (cloud.n - 1)
    w, U = np.linalg.eigh(cov)
    w, U = w[::-1], U[:, ::-1]
    lam1 = w[0]
    if lam1 <= 0 or w[d - 1] <= policy.eigen_gap * lam1:
        raise DegenerateSpectrum(f"point {i}: neighbours span fewer than {d} directions", index=i)
    if d < len(w) and w[d - 1] - w[d] <= policy.eigen_gap * lam1:
        raise DegenerateSpectrum(f"point {i}: eigenvalues {d} and {d + 1} coincide", index=i)
    frame = Frame(_sign_fix(U[:, :d].T, policy.sign_threshold))
    if return_eigenvalues:
        return frame, w, len(others)
    return frame


def estimate_all_tangents(
    cloud: PointCloud,
    h: float,
    d: int | None = None,
    threads: int | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> TangentField:
    """Estimated tangent frame at every sample point.

    Work is split into contiguous index chunks across ``threads`` workers;
    the result does not depend on the number of workers.
    """
    d = cloud.intrinsic_dim if d is None else int(d)
    n = cloud.n
    if n < 2:
        raise InsufficientNeighbors("point 0: cloud has a single point", index=0)

    def work(chunk):
        out = []
        for i in chunk:
            out.append(estimate_tangent(cloud, i, h, d, policy, return_eigenvalues=True))
        return out

    workers = resolve_threads(threads)
    chunks = np.array_split(np.arange(n), max(1, min(n, 4 * workers)))
    if workers == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    results = [r for part in parts for r in part]
    return TangentField(
        frames=[r[0] for r in results],
        bandwidth=float(h),
        neighbor_counts=np.array([r[2] for r in results]),
        eigenvalues=np.array([r[1] for r in results]),
    )


def exact_tangent_field(frames, h: float = 0.0) -> TangentField:
    """Wrap externally known frames (e.g. ground truth) as a TangentField."""
    frames = list(frames)
    D = frames[0].ambient_dim if frames else 0
    return TangentField(
        frames=frames,
        bandwidth=float(h),
        neighbor_counts=np.zeros(len(frames), dtype=int),
        eigenvalues=np.zeros((len(frames), D)),
    )
