"""Boundary-adaptive union-of-patches manifold estimator.

Interior sample points carry flat d-balls of radius eps_int in their
estimated tangent planes. Boundary observations carry flat half-balls of
radius eps_bd, cut by the hyperplane orthogonal to the estimated outward
normal. The estimator is never meshed: every evaluation goes through exact
point-to-patch distances.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .detector import BoundaryResult
from .errors import (
    DegenerateNormal,
    DimensionMismatch,
    EmptyCloud,
    EmptyComplex,
    InvalidParams,
    PatchScaleWarning,
)
from .geomcore import Frame, PointCloud, nearest_distances
from .numerics import DEFAULT_POLICY
from .synth import rng_from_seed
from .tangent import TangentField

log = logging.getLogger(__name__)

_CHUNK_FLOATS = 1 << 22


@dataclass(frozen=True)
class PatchComplex:
    """Inner balls and boundary half-balls.

    ``inner_bases`` and ``boundary_bases`` have shape (m, d, D) with
    orthonormal rows; ``boundary_normals`` are the (unnormalised) mean
    normals of the boundary observations.
    """

    inner_centers: np.ndarray
    inner_bases: np.ndarray
    boundary_centers: np.ndarray
    boundary_bases: np.ndarray
    boundary_normals: np.ndarray
    eps_int: float
    eps_bd: float
    inner_index: np.ndarray
    boundary_index: np.ndarray

    @property
    def n_inner(self) -> int:
        return len(self.inner_centers)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_centers)

    @property
    def ambient_dim(self) -> int:
        return self.inner_centers.shape[1]

    @property
    def intrinsic_dim(self) -> int:
        return self.inner_bases.shape[1]

    def boundary_directions(self) -> np.ndarray:
        """In-frame unit outward directions w / |w| of the boundary patches, shape (m, d)."""
        if self.n_boundary == 0:
            return np.zeros((0, self.intrinsic_dim))
        w = np.einsum("mkD,mD->mk", self.boundary_bases, self.boundary_normals)
        return w / np.linalg.norm(w, axis=1, keepdims=True)

    def params(self) -> dict:
        return {"eps_int": self.eps_int, "eps_bd": self.eps_bd}


def _stack(frames, d, D):
    if not frames:
        return np.zeros((0, d, D))
    return np.array([f.basis for f in frames])


def build(
    cloud: PointCloud,
    tangents: TangentField,
    boundary: BoundaryResult | None,
    eps_int: float,
    eps_bd: float,
    adaptive: bool = True,
) -> PatchComplex:
    """Assemble the estimator.

    With ``adaptive=False`` (or no boundary result) every sample point gets
    an inner patch, which is the boundaryless estimator used as a baseline.
    """
    if cloud.n == 0:
        raise EmptyCloud("cannot build patches on an empty cloud")
    if not (eps_int > 0 and eps_bd > 0):
        raise InvalidParams("eps_int and eps_bd must be positive")
    if eps_int > eps_bd / 6:
        warnings.warn(
            f"eps_int={eps_int:g} exceeds eps_bd/6={eps_bd / 6:g}", PatchScaleWarning, stacklevel=2
        )
    X = cloud.points
    d, D = cloud.intrinsic_dim, cloud.ambient_dim
    bd_idx = []
    if adaptive and boundary is not None:
        for i in boundary.detected:
            i = int(i)
            eta = boundary.normals[i]
            w = tangents.frames[i].coords(eta)
            if np.linalg.norm(eta) <= DEFAULT_POLICY.degenerate_normal or np.linalg.norm(w) <= DEFAULT_POLICY.degenerate_normal:
                log.warning("dropping boundary patch at %d: degenerate normal", i)
                continue
            bd_idx.append(i)
    bd_idx = np.array(bd_idx, dtype=int)
    if len(bd_idx):
        gap = nearest_distances(X, X[bd_idx])
        inner_idx = np.flatnonzero(gap >= eps_bd / 2)
    else:
        inner_idx = np.arange(cloud.n)
    if len(bd_idx) and boundary is not None:
        normals = np.array([boundary.normals[int(i)] for i in bd_idx])
    else:
        normals = np.zeros((0, D))
    return PatchComplex(
        inner_centers=X[inner_idx].copy(),
        inner_bases=_stack([tangents.frames[i] for i in inner_idx], d, D),
        boundary_centers=X[bd_idx].copy() if len(bd_idx) else np.zeros((0, D)),
        boundary_bases=_stack([tangents.frames[i] for i in bd_idx], d, D),
        boundary_normals=normals,
        eps_int=float(eps_int),
        eps_bd=float(eps_bd),
        inner_index=inner_idx,
        boundary_index=bd_idx,
    )


def _check_dims(z, frame: Frame, center):
    z = np.asarray(z, dtype=float)
    center = np.asarray(center, dtype=float)
    if z.shape[-1] != frame.ambient_dim or center.shape != (frame.ambient_dim,):
        raise DimensionMismatch("query, center and frame must share the ambient dimension")
    return z, center


def distance_to_inner_patch(z, center, frame: Frame, eps: float):
    """Distance from z (a point or rows) to the flat ball center + B_frame(0, eps)."""
    z, center = _check_dims(z, frame, center)
    v = z - center
    t = frame.coords(v)
    tn = np.linalg.norm(t, axis=-1)
    nu2 = np.sum((v - frame.lift(t)) ** 2, axis=-1)
    return np.sqrt(nu2 + np.maximum(tn - eps, 0.0) ** 2)


def _halfball_excess(t, u, eps):
    """|t - P(t)| where P projects onto {|x| <= eps, <x, u> <= 0}; u unit, rows of t."""
    s = t @ u if u.ndim == 1 else np.einsum("...k,...k->...", t, u)
    th = t - np.maximum(s, 0.0)[..., None] * u
    nh = np.linalg.norm(th, axis=-1)
    scale = np.where(nh > eps, eps / np.where(nh > 0, nh, 1.0), 1.0)
    p = th * scale[..., None]
    return np.linalg.norm(t - p, axis=-1)


def distance_to_boundary_patch(z, center, frame: Frame, normal, eps: float):
    """Distance from z to the flat half-ball {center + u : |u| <= eps, u in frame, <u, normal> <= 0}.

    The in-frame component is first projected onto the halfspace and then
    clamped radially; since the ball is centred on the halfspace wall this
    two-step map is the exact projection onto the half-ball.
    """
    z, center = _check_dims(z, frame, center)
    w = frame.coords(np.asarray(normal, dtype=float))
    nw = np.linalg.norm(w)
    if nw <= DEFAULT_POLICY.degenerate_normal:
        raise DegenerateNormal("patch normal is orthogonal to the patch frame")
    u = w / nw
    v = z - center
    t = frame.coords(v)
    nu2 = np.sum((v - frame.lift(t)) ** 2, axis=-1)
    return np.sqrt(nu2 + _halfball_excess(t, u, eps) ** 2)


def _pair_distances(Z, qi, centers, bases, eps, dirs, pi):
    V = Z[qi] - centers[pi]
    B = bases[pi]
    T = np.einsum("pD,pkD->pk", V, B)
    N = V - np.einsum("pk,pkD->pD", T, B)
    nu2 = np.einsum("pD,pD->p", N, N)
    if dirs is None:
        ex = np.maximum(np.linalg.norm(T, axis=1) - eps, 0.0)
    else:
        ex = _halfball_excess(T, dirs[pi], eps)
    return np.sqrt(nu2 + ex**2)


def _family_min(Z, centers, bases, eps, dirs, bound):
    """Minimum distance from each row of Z to one family of patches.

    A patch whose centre is farther than bound + eps from z cannot beat
    ``bound``, so only centres inside that ball are examined.
    """
    tree = cKDTree(centers)
    lists = tree.query_ball_point(Z, bound + eps)
    counts = np.fromiter((len(l) for l in lists), dtype=np.int64, count=len(lists))
    out = np.full(len(Z), np.inf)
    if counts.sum() == 0:
        return out
    qi_all = np.repeat(np.arange(len(Z)), counts)
    pi_all = np.fromiter((p for l in lists for p in l), dtype=np.int64, count=int(counts.sum()))
    step = max(1, _CHUNK_FLOATS // (4 * centers.shape[1]))
    for a in range(0, len(qi_all), step):
        qi, pi = qi_all[a : a + step], pi_all[a : a + step]
        np.minimum.at(out, qi, _pair_distances(Z, qi, centers, bases, eps, dirs, pi))
    return out


def distance_to_complex(Z, complex: PatchComplex) -> np.ndarray | float:
    """Distance from each query point to the union of all patches."""
    if complex.n_inner + complex.n_boundary == 0:
        raise EmptyComplex("the patch complex has no patches")
    Z = np.asarray(Z, dtype=float)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    if Z.shape[1] != complex.ambient_dim:
        raise DimensionMismatch("query dimension does not match the complex")
    families = []
    if complex.n_inner:
        families.append((complex.inner_centers, complex.inner_bases, complex.eps_int, None))
    if complex.n_boundary:
        families.append((complex.boundary_centers, complex.boundary_bases, complex.eps_bd, complex.boundary_directions()))
    # upper bound from the nearest few centres of every family
    bound = np.full(len(Z), np.inf)
    for centers, bases, eps, dirs in families:
        k = min(8, len(centers))
        _, nn = cKDTree(centers).query(Z, k=k)
        nn = nn.reshape(len(Z), k)
        qi = np.repeat(np.arange(len(Z)), k)
        dist = _pair_distances(Z, qi, centers, bases, eps, dirs, nn.ravel()).reshape(len(Z), k)
        bound = np.minimum(bound, dist.min(axis=1))
    out = bound.copy()
    for centers, bases, eps, dirs in families:
        out = np.minimum(out, _family_min(Z, centers, bases, eps, dirs, bound))
    return float(out[0]) if single else out


def _ball_coords(rng, count, d, eps):
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (eps * rng.random(count) ** (1.0 / d))[:, None]


def sample_complex(complex: PatchComplex, per_patch: int, seed: int) -> np.ndarray:
    """``per_patch`` uniform points inside every patch, lifted to R^D.

    Half-ball samples are ball samples reflected through the wall when they
    land on the wrong side, which keeps them uniform.
    """
    if per_patch < 0:
        raise InvalidParams("per_patch must be nonnegative")
    D, d = complex.ambient_dim, complex.intrinsic_dim
    total = per_patch * (complex.n_inner + complex.n_boundary)
    if total == 0:
        return np.zeros((0, D))
    rng = rng_from_seed(seed)
    out = []
    if complex.n_inner:
        t = _ball_coords(rng, per_patch * complex.n_inner, d, complex.eps_int)
        t = t.reshape(complex.n_inner, per_patch, d)
        out.append((complex.inner_centers[:, None, :] + np.einsum("mpk,mkD->mpD", t, complex.inner_bases)).reshape(-1, D))
    if complex.n_boundary:
        u = complex.boundary_directions()
        t = _ball_coords(rng, per_patch * complex.n_boundary, d, complex.eps_bd)
        t = t.reshape(complex.n_boundary, per_patch, d)
        s = np.einsum("mpk,mk->mp", t, u)
        t = t - 2.0 * np.maximum(s, 0.0)[..., None] * u[:, None, :]
        out.append(
            (complex.boundary_centers[:, None, :] + np.einsum("mpk,mkD->mpD", t, complex.boundary_bases)).reshape(-1, D)
        )
    return np.concatenate(out, axis=0)


def truth_sample(manifold, m_truth: int, seed: int) -> np.ndarray:
    """Uniform sample of M, plus a boundary grid when M has a boundary (the
    sup over M is usually attained on the boundary, which a uniform sample
    rarely hits)."""
    P = manifold.sample_uniform(m_truth, seed).points
    if manifold.has_boundary:
        m_b = max(8, int(math.ceil(math.sqrt(m_truth))))
        P = np.vstack([P, manifold.boundary_grid(m_b)])
    return P


def hausdorff_to_truth(complex: PatchComplex, manifold, m_truth: int = 20000, per_patch: int = 8, seed: int = 0) -> dict:
    """Both one-sided Hausdorff distances between the estimator and M.

    ``truth_resolution`` is the largest nearest-neighbour gap of the truth
    sample; one-sided values below it are not resolved by the evaluation.
    """
    if complex.n_inner + complex.n_boundary == 0:
        raise EmptyComplex("the patch complex has no patches")
    P = truth_sample(manifold, m_truth, seed)
    to_hat = distance_to_complex(P, complex)
    S = sample_complex(complex, per_patch, seed + 1)
    S = np.vstack([S, complex.inner_centers, complex.boundary_centers])
    to_m = manifold.distance_to(S)
    nn = _nn_gap(P)
    return {
        "sup_M_to_Mhat": float(np.max(to_hat)),
        "sup_Mhat_to_M": float(np.max(to_m)),
        "d_H": float(max(np.max(to_hat), np.max(to_m))),
        "truth_resolution": nn,
        "params": {**complex.params(), "m_truth": int(len(P)), "per_patch": int(per_patch), "seed": int(seed)},
    }


def _nn_gap(P: np.ndarray) -> float:
    dist, _ = cKDTree(P).query(P, k=2)
    return float(dist[:, 1].max())
