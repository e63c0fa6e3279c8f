"""Ground-truth manifolds with uniform samplers and exact geometry oracles.

Each manifold knows how to draw i.i.d. uniform samples (w.r.t. its
d-dimensional area measure), the Euclidean distance from any ambient point
to itself and to its boundary, exact tangent frames and outward-pointing
unit normals, and its reach constants.

Shapes without closed-form nearest points (spiral, Moebius strip, the
bumped variants) use a fixed parameter grid followed by a least-squares
refinement started from the best few grid nodes.

All randomness goes through a Philox (counter-based) generator so streams
are identical across platforms.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares, minimize_scalar

from .errors import BumpAdmissibilityWarning, InvalidParams, OutsideDomain
from .geomcore import Frame, PointCloud, orthonormalize

KINDS = (
    "segment",
    "circle",
    "sphere",
    "spiral",
    "annulus",
    "half_sphere",
    "moebius",
    "bumped_sphere",
    "bumped_ball",
)

GRID_NODES = 4096
ON_MANIFOLD_TOL = 1e-6

# Reach constants without a closed form, from the minimum of Federer's ratio
# |y - x|^2 / (2 d(y - x, T_x M)) over dense parameter pairs, rounded down.
# Measured: spiral 0.99162 (bottleneck between turns; curvature radius is
# 10/9), Moebius 2.1149 (largest principal curvature), Moebius boundary
# curve 1.0000. Re-checked in tests/test_synth.py.
SPIRAL_REACH = 0.99
MOEBIUS_REACH = 2.1
MOEBIUS_BOUNDARY_REACH = 0.99


def rng_from_seed(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


# --------------------------------------------------------------------------
# Bump map


def bump(x) -> np.ndarray:
    """phi(x) = exp(-|x|^2 / (1 - |x|^2)) inside the unit ball, 0 outside."""
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-s[inside] / (1.0 - s[inside]))
    return out


def bump_gradient(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    out = np.zeros_like(x)
    inside = s < 1.0
    si = s[inside]
    coef = -2.0 * np.exp(-si / (1.0 - si)) / (1.0 - si) ** 2
    out[inside] = coef[..., None] * x[inside]
    return out


@dataclass(frozen=True)
class BumpMap:
    """Phi(x) = x + eta * phi((x - x0) / delta) * e1."""

    eta: float
    delta: float
    x0: np.ndarray
    e1: np.ndarray

    def __post_init__(self):
        if not self.delta > 0:
            raise InvalidParams("bump width delta must be positive")
        e1 = np.asarray(self.e1, dtype=float)
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "e1", e1 / np.linalg.norm(e1))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x + self.eta * bump((x - self.x0) / self.delta)[..., None] * self.e1

    def jacobian(self, x) -> np.ndarray:
        """dPhi at a single point, as a D x D matrix."""
        g = bump_gradient((np.asarray(x, dtype=float) - self.x0) / self.delta)
        return np.eye(len(self.x0)) + (self.eta / self.delta) * np.outer(self.e1, g)

    def check_admissible(self, reach: float) -> bool:
        """Reach-stability conditions |I - dPhi| <= 1/10 and
        |d^2 Phi| <= 1 / (2 reach), via the bump's derivative bounds."""
        ok = 5 * self.eta / (2 * self.delta) <= 0.1 and 23 * self.eta / self.delta**2 <= 1 / (2 * reach)
        if not ok:
            warnings.warn(
                f"bump eta={self.eta:g}, delta={self.delta:g} violates reach-stability bounds",
                BumpAdmissibilityWarning,
                stacklevel=2,
            )
        return ok


def fd_gradient_norms(f, points, step: float = 1e-5) -> np.ndarray:
    """Central-difference estimate of |d f| at each point (f scalar-valued)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    D = P.shape[1]
    G = np.empty_like(P)
    for k in range(D):
        e = np.zeros(D)
        e[k] = step
        G[:, k] = (f(P + e) - f(P - e)) / (2 * step)
    return np.linalg.norm(G, axis=1)


def fd_hessian_norms(f, points, step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of a scalar f, operator norm per point."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    D = P.shape[1]
    H = np.empty((P.shape[0], D, D))
    f0 = f(P)
    for a in range(D):
        ea = np.zeros(D)
        ea[a] = step
        H[:, a, a] = (f(P + ea) - 2 * f0 + f(P - ea)) / step**2
        for b in range(a + 1, D):
            eb = np.zeros(D)
            eb[b] = step
            val = (f(P + ea + eb) - f(P + ea - eb) - f(P - ea + eb) + f(P - ea - eb)) / (4 * step**2)
            H[:, a, b] = H[:, b, a] = val
    return np.max(np.abs(np.linalg.eigvalsh(H)), axis=1)


def fd_map_deviation_norm(bmap: BumpMap, points, step: float = 1e-6) -> np.ndarray:
    """Finite-difference |dPhi - I|_op at each point."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    D = P.shape[1]
    J = np.empty((P.shape[0], D, D))
    for k in range(D):
        e = np.zeros(D)
        e[k] = step
        J[:, :, k] = (bmap(P + e) - bmap(P - e)) / (2 * step)
    return np.linalg.norm(J - np.eye(D), ord=2, axis=(1, 2))


# --------------------------------------------------------------------------
# Manifolds


@dataclass(frozen=True)
class SyntheticManifold:
    kind: str = field(init=False, default="")
    intrinsic_dim: int = field(init=False, default=0)
    ambient_dim: int = field(init=False, default=0)
    has_boundary: bool = field(init=False, default=False)

    @property
    def reach(self) -> float:
        raise NotImplementedError

    @property
    def boundary_reach(self) -> float:
        return math.inf

    @property
    def volume(self) -> float:
        """d-dimensional volume of M."""
        raise NotImplementedError

    @property
    def min_reach(self) -> float:
        return min(self.reach, self.boundary_reach)

    def params(self) -> dict:
        return {}

    def sample_uniform(self, n: int, seed=0) -> PointCloud:
        if n < 1:
            raise InvalidParams("sample size must be >= 1")
        pts = self._sample(int(n), rng_from_seed(seed))
        return PointCloud(pts, self.intrinsic_dim)

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def distance_to(self, z) -> np.ndarray | float:
        """Euclidean distance from z (one point or rows) to the manifold."""
        Z = np.asarray(z, dtype=float)
        out = self._distance_rows(np.atleast_2d(Z))
        return float(out[0]) if Z.ndim == 1 else out

    def _distance_rows(self, Z: np.ndarray) -> np.ndarray:
        return np.array([self._distance_one(z) for z in Z])

    def _distance_one(self, z: np.ndarray) -> float:
        return float(self._distance_rows(np.asarray(z, dtype=float)[None, :])[0])

    def distance_to_boundary(self, x) -> np.ndarray | float:
        """Euclidean distance from points of M to the boundary of M."""
        X = np.asarray(x, dtype=float)
        rows = np.atleast_2d(X)
        off = self._distance_rows(rows)
        if np.any(off > ON_MANIFOLD_TOL):
            raise OutsideDomain(f"point lies {off.max():.3g} away from the manifold")
        if not self.has_boundary:
            out = np.full(len(rows), math.inf)
        else:
            out = self._boundary_distance_rows(rows)
        return float(out[0]) if X.ndim == 1 else out

    def _boundary_distance_rows(self, X: np.ndarray) -> np.ndarray:
        return np.array([self._boundary_distance_one(x) for x in X])

    def _boundary_distance_one(self, x: np.ndarray) -> float:
        return float(self._boundary_distance_rows(np.asarray(x, dtype=float)[None, :])[0])

    def _check_on(self, x: np.ndarray) -> None:
        off = self._distance_one(x)
        if off > ON_MANIFOLD_TOL:
            raise OutsideDomain(f"point lies {off:.3g} away from the manifold")

    def exact_tangent(self, x) -> Frame:
        x = np.asarray(x, dtype=float)
        self._check_on(x)
        return self._tangent(x)

    def exact_tangents(self, X) -> list:
        return [self.exact_tangent(x) for x in np.atleast_2d(X)]

    def _tangent(self, x: np.ndarray) -> Frame:
        raise NotImplementedError

    def exact_outward_normal(self, x) -> np.ndarray:
        """Outward unit normal at the boundary point nearest to x (x in M)."""
        if not self.has_boundary:
            raise OutsideDomain(f"{self.kind} has empty boundary")
        x = np.asarray(x, dtype=float)
        self._check_on(x)
        return self._outward_normal(x)

    def _outward_normal(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boundary_grid(self, m: int) -> np.ndarray:
        """m points spread along the boundary (for coverage checks)."""
        raise OutsideDomain(f"{self.kind} has empty boundary")

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "intrinsic_dim": self.intrinsic_dim,
            "ambient_dim": self.ambient_dim,
            "has_boundary": self.has_boundary,
            "reach": _jsonable(self.reach),
            "boundary_reach": _jsonable(self.boundary_reach),
            "volume": self.volume,
            "params": self.params(),
        }


def _jsonable(v: float):
    return None if math.isinf(v) else float(v)


def _pad(X: np.ndarray, D: int) -> np.ndarray:
    if X.shape[1] == D:
        return X
    out = np.zeros((X.shape[0], D))
    out[:, : X.shape[1]] = X
    return out


def _complement_frame(u: np.ndarray, k: int) -> Frame:
    """Orthonormal basis of the orthogonal complement of unit u (k = D - 1)."""
    D = len(u)
    P = np.eye(D) - np.outer(u, u)
    w, U = np.linalg.eigh(P)
    return orthonormalize(U[:, ::-1][:, :k].T)


# ---- segment


@dataclass(frozen=True)
class Segment(SyntheticManifold):
    length: float = 1.0
    D: int = 2

    def __post_init__(self):
        if not self.length > 0 or self.D < 1:
            raise InvalidParams("segment needs length > 0 and D >= 1")
        object.__setattr__(self, "kind", "segment")
        object.__setattr__(self, "intrinsic_dim", 1)
        object.__setattr__(self, "ambient_dim", self.D)
        object.__setattr__(self, "has_boundary", True)

    @property
    def volume(self):
        return self.length

    @property
    def reach(self):
        return math.inf

    @property
    def boundary_reach(self):
        return self.length / 2

    def params(self):
        return {"length": self.length, "D": self.D}

    def _sample(self, n, rng):
        t = rng.random(n) * self.length
        return _pad(t[:, None], self.D)

    def _distance_rows(self, Z):
        t = np.clip(Z[:, 0], 0, self.length)
        near = _pad(t[:, None], self.D)
        return np.linalg.norm(Z - near, axis=1)

    def _boundary_distance_rows(self, X):
        return np.minimum(np.abs(X[:, 0]), np.abs(self.length - X[:, 0]))

    def _tangent(self, x):
        return Frame(np.eye(self.D)[:1])

    def _outward_normal(self, x):
        e = np.eye(self.D)[0]
        return -e if x[0] < self.length / 2 else e

    def boundary_grid(self, m):
        return _pad(np.array([[0.0], [self.length]]), self.D)


# ---- circle and sphere


@dataclass(frozen=True)
class Sphere(SyntheticManifold):
    """Round d-sphere of given radius centred at 0 in R^{d+1} (zero padded to D)."""

    radius: float = 1.0
    d: int = 2
    D: int | None = None

    def __post_init__(self):
        D = self.d + 1 if self.D is None else self.D
        if not self.radius > 0 or self.d < 1 or D < self.d + 1:
            raise InvalidParams("sphere needs radius > 0, d >= 1 and D >= d + 1")
        object.__setattr__(self, "kind", "circle" if self.d == 1 else "sphere")
        object.__setattr__(self, "intrinsic_dim", self.d)
        object.__setattr__(self, "ambient_dim", D)

    @property
    def volume(self):
        k = self.d + 1
        return 2 * math.pi ** (k / 2) / math.gamma(k / 2) * self.radius**self.d

    @property
    def reach(self):
        return self.radius

    def params(self):
        out = {"radius": self.radius, "d": self.d}
        if self.D is not None:
            out["D"] = self.D
        return out

    def _sample(self, n, rng):
        g = rng.standard_normal((n, self.d + 1))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return _pad(self.radius * g, self.ambient_dim)

    def _distance_rows(self, Z):
        k = self.d + 1
        inplane = np.linalg.norm(Z[:, :k], axis=1)
        off = np.linalg.norm(Z[:, k:], axis=1)
        return np.hypot(inplane - self.radius, off)

    def _tangent(self, x):
        k = self.d + 1
        u = x[:k] / np.linalg.norm(x[:k])
        F = _complement_frame(u, self.d)
        return Frame(_pad(F.basis, self.ambient_dim))


# ---- half-sphere


@dataclass(frozen=True)
class HalfSphere(SyntheticManifold):
    """Unit half-sphere {|x| = 1, x_0 >= 0} in R^3; boundary is the circle x_0 = 0."""

    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", "half_sphere")
        object.__setattr__(self, "intrinsic_dim", 2)
        object.__setattr__(self, "ambient_dim", 3)
        object.__setattr__(self, "has_boundary", True)

    @property
    def volume(self):
        return 2 * math.pi * self.radius**2

    @property
    def reach(self):
        return self.radius

    @property
    def boundary_reach(self):
        return self.radius

    def params(self):
        return {"radius": self.radius}

    def _sample(self, n, rng):
        g = rng.standard_normal((n, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        g[:, 0] = np.abs(g[:, 0])
        return self.radius * g

    def _distance_rows(self, Z):
        R = self.radius
        rho = np.linalg.norm(Z[:, 1:], axis=1)
        full = np.abs(np.linalg.norm(Z, axis=1) - R)
        rim = np.hypot(Z[:, 0], rho - R)
        return np.where(Z[:, 0] >= 0, full, rim)

    def _boundary_distance_rows(self, X):
        rho = np.linalg.norm(X[:, 1:], axis=1)
        return np.hypot(X[:, 0], rho - self.radius)

    def _tangent(self, x):
        F = _complement_frame(x / np.linalg.norm(x), 2)
        return F

    def _outward_normal(self, x):
        return np.array([-1.0, 0.0, 0.0])

    def boundary_grid(self, m):
        t = 2 * np.pi * np.arange(m) / m
        return self.radius * np.column_stack([np.zeros(m), np.cos(t), np.sin(t)])


# ---- annulus


@dataclass(frozen=True)
class Annulus(SyntheticManifold):
    """Planar annulus B(0, r_out) minus the open ball B(0, r_in)."""

    r_in: float = 0.4
    r_out: float = 1.0

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise InvalidParams("annulus needs 0 < r_in < r_out")
        object.__setattr__(self, "kind", "annulus")
        object.__setattr__(self, "intrinsic_dim", 2)
        object.__setattr__(self, "ambient_dim", 2)
        object.__setattr__(self, "has_boundary", True)

    @property
    def volume(self):
        return math.pi * (self.r_out**2 - self.r_in**2)

    @property
    def reach(self):
        return self.r_in

    @property
    def boundary_reach(self):
        return self.r_in

    def params(self):
        return {"r_in": self.r_in, "r_out": self.r_out}

    def _sample(self, n, rng):
        u = rng.random(n)
        t = 2 * np.pi * rng.random(n)
        r = np.sqrt(self.r_in**2 + (self.r_out**2 - self.r_in**2) * u)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])

    def _distance_rows(self, Z):
        r = np.linalg.norm(Z, axis=1)
        return np.maximum.reduce([np.zeros_like(r), r - self.r_out, self.r_in - r])

    def _boundary_distance_rows(self, X):
        r = np.linalg.norm(X, axis=1)
        return np.minimum(self.r_out - r, r - self.r_in)

    def _tangent(self, x):
        return Frame(np.eye(2))

    def _outward_normal(self, x):
        r = np.linalg.norm(x)
        u = x / r
        return u if r - self.r_in > self.r_out - r else -u

    def boundary_grid(self, m):
        """m points on each boundary circle."""
        t = 2 * np.pi * np.arange(m) / m
        c = np.column_stack([np.cos(t), np.sin(t)])
        return np.vstack([self.r_out * c, self.r_in * c])


# ---- spiral


@dataclass(frozen=True)
class Spiral(SyntheticManifold):
    """Helix theta -> (cos theta, sin theta, theta / 3), theta in [0, 5 pi]."""

    turns_end: float = 5 * np.pi
    pitch: float = 1.0 / 3.0

    def __post_init__(self):
        object.__setattr__(self, "kind", "spiral")
        object.__setattr__(self, "intrinsic_dim", 1)
        object.__setattr__(self, "ambient_dim", 3)
        object.__setattr__(self, "has_boundary", True)

    @property
    def volume(self):
        return self.turns_end * math.sqrt(1 + self.pitch**2)

    @property
    def reach(self):
        return SPIRAL_REACH

    @property
    def boundary_reach(self):
        return float(np.linalg.norm(self.curve(0.0) - self.curve(self.turns_end))) / 2

    def curve(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.cos(t), np.sin(t), self.pitch * t], axis=-1)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([-np.sin(t), np.cos(t), np.full_like(t, self.pitch)], axis=-1)

    def _sample(self, n, rng):
        # constant speed, so uniform theta is uniform arc length
        return self.curve(rng.random(n) * self.turns_end)

    def nearest_parameter(self, z: np.ndarray) -> float:
        grid = np.linspace(0.0, self.turns_end, GRID_NODES)
        d2 = np.sum((self.curve(grid) - z) ** 2, axis=1)
        step = grid[1] - grid[0]
        best_t, best = None, math.inf
        for g in grid[np.argsort(d2)[:3]]:
            lo, hi = max(0.0, g - step), min(self.turns_end, g + step)
            res = minimize_scalar(
                lambda t: float(np.sum((self.curve(t) - z) ** 2)),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < best:
                best_t, best = float(res.x), float(res.fun)
        # the bounded search never lands exactly on an end of the curve
        for end in (0.0, self.turns_end):
            val = float(np.sum((self.curve(end) - z) ** 2))
            if val <= best:
                best_t, best = end, val
        return best_t

    def _distance_one(self, z):
        t = self.nearest_parameter(z)
        return float(np.linalg.norm(self.curve(t) - z))

    def _boundary_distance_rows(self, X):
        a, b = self.curve(0.0), self.curve(self.turns_end)
        return np.minimum(np.linalg.norm(X - a, axis=1), np.linalg.norm(X - b, axis=1))

    def _tangent(self, x):
        t = self.nearest_parameter(x)
        return orthonormalize(self.velocity(t)[None, :])

    def _outward_normal(self, x):
        a, b = self.curve(0.0), self.curve(self.turns_end)
        if np.linalg.norm(x - a) <= np.linalg.norm(x - b):
            v = -self.velocity(0.0)
        else:
            v = self.velocity(self.turns_end)
        return v / np.linalg.norm(v)

    def boundary_grid(self, m):
        return np.vstack([self.curve(0.0), self.curve(self.turns_end)])


# ---- Moebius strip


@dataclass(frozen=True)
class Moebius(SyntheticManifold):
    """(u, t) -> ((u cos(t/2) + 3) cos t, (u cos(t/2) + 3) sin t, u sin(t/2)),
    u in [-1, 1], t in [0, 2 pi]."""

    def __post_init__(self):
        object.__setattr__(self, "kind", "moebius")
        object.__setattr__(self, "intrinsic_dim", 2)
        object.__setattr__(self, "ambient_dim", 3)
        object.__setattr__(self, "has_boundary", True)

    @property
    def volume(self):
        # Gauss-Legendre in u; the integrand is smooth and periodic in t
        u, wu = np.polynomial.legendre.leggauss(32)
        t = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        J = self.area_element(u[:, None], t[None, :])
        return float(wu @ J.mean(axis=1)) * 2 * np.pi

    @property
    def reach(self):
        return MOEBIUS_REACH

    @property
    def boundary_reach(self):
        return MOEBIUS_BOUNDARY_REACH

    @staticmethod
    def embed(u, t):
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        w = u * np.cos(t / 2) + 3
        return np.stack([w * np.cos(t), w * np.sin(t), u * np.sin(t / 2)], axis=-1)

    @staticmethod
    def d_u(u, t):
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        c = np.cos(t / 2)
        return np.stack([c * np.cos(t), c * np.sin(t), np.sin(t / 2)], axis=-1)

    @staticmethod
    def d_t(u, t):
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        c, s = np.cos(t / 2), np.sin(t / 2)
        w = u * c + 3
        return np.stack(
            [-(u / 2) * s * np.cos(t) - w * np.sin(t), -(u / 2) * s * np.sin(t) + w * np.cos(t), (u / 2) * c],
            axis=-1,
        )

    @staticmethod
    def area_element(u, t):
        # d_u has unit norm and is orthogonal to d_t
        return np.sqrt(np.asarray(u) ** 2 / 4 + (np.asarray(u) * np.cos(np.asarray(t) / 2) + 3) ** 2)

    def _sample(self, n, rng):
        jmax = math.sqrt(0.25 + 16.0)
        out = []
        have = 0
        while have < n:
            m = 2 * (n - have) + 16
            u = rng.uniform(-1, 1, m)
            t = rng.uniform(0, 2 * np.pi, m)
            keep = rng.random(m) * jmax <= self.area_element(u, t)
            pts = self.embed(u[keep], t[keep])
            out.append(pts)
            have += len(pts)
        return np.vstack(out)[:n]

    def nearest_parameters(self, z: np.ndarray):
        k = int(round(math.sqrt(GRID_NODES)))
        U, T = np.meshgrid(np.linspace(-1, 1, k), np.linspace(0, 2 * np.pi, k, endpoint=False))
        U, T = U.ravel(), T.ravel()
        d2 = np.sum((self.embed(U, T) - z) ** 2, axis=1)
        best, best_p = math.inf, None
        for g in np.argsort(d2)[:4]:
            res = least_squares(
                lambda p: self.embed(p[0], p[1]) - z,
                x0=[U[g], T[g]],
                jac=lambda p: np.column_stack([self.d_u(p[0], p[1]), self.d_t(p[0], p[1])]),
                bounds=([-1, -np.inf], [1, np.inf]),
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
            )
            val = float(np.linalg.norm(res.fun))
            if val < best:
                best, best_p = val, res.x
        return best_p, best

    def _distance_one(self, z):
        return self.nearest_parameters(z)[1]

    def boundary_curve(self, s):
        # u = 1 for s in [0, 4 pi) traces the whole (connected) boundary
        return self.embed(1.0, s)

    def nearest_boundary_parameter(self, x):
        grid = np.linspace(0, 4 * np.pi, GRID_NODES, endpoint=False)
        d2 = np.sum((self.boundary_curve(grid) - x) ** 2, axis=1)
        step = grid[1] - grid[0]
        best, best_s = math.inf, None
        for g in grid[np.argsort(d2)[:3]]:
            res = minimize_scalar(
                lambda s: float(np.sum((self.boundary_curve(s) - x) ** 2)),
                bounds=(g - step, g + step),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < best:
                best, best_s = float(res.fun), float(res.x)
        return best_s, math.sqrt(max(best, 0.0))

    def _boundary_distance_one(self, x):
        return self.nearest_boundary_parameter(x)[1]

    def _tangent(self, x):
        (u, t), _ = self.nearest_parameters(x)
        return orthonormalize([self.d_u(u, t), self.d_t(u, t)])

    def _outward_normal(self, x):
        s, _ = self.nearest_boundary_parameter(x)
        return self.d_u(1.0, s)

    def boundary_grid(self, m):
        return self.boundary_curve(4 * np.pi * np.arange(m) / m)


# ---- bumped sphere and bumped ball


@dataclass(frozen=True)
class BumpedSphere(SyntheticManifold):
    """Image of the sphere of radius R (d in {1, 2}, D = d + 1) under the bump
    map centred at x0 = R e1, pushing along e1."""

    radius: float = 1.0
    eta: float = 0.005
    delta: float = 0.5
    d: int = 2

    def __post_init__(self):
        if self.d not in (1, 2):
            raise InvalidParams("bumped_sphere supports d in {1, 2}")
        if not self.delta > 0 or not self.radius > 0:
            raise InvalidParams("bumped_sphere needs radius > 0 and delta > 0")
        if self.delta >= 2 * self.radius:
            raise InvalidParams("bump width must be below the sphere diameter")
        object.__setattr__(self, "kind", "bumped_sphere")
        object.__setattr__(self, "intrinsic_dim", self.d)
        object.__setattr__(self, "ambient_dim", self.d + 1)

    @property
    def bump_map(self) -> BumpMap:
        D = self.d + 1
        e1 = np.eye(D)[0]
        return BumpMap(self.eta, self.delta, self.radius * e1, e1)

    @property
    def volume(self):
        # area of the unbumped sphere; the bump changes it by O(eta^2)
        return Sphere(self.radius, self.d).volume

    @property
    def reach(self):
        # reach stability: Phi(M) keeps reach >= tau / 2 under admissible bumps
        return self.radius / 2

    def params(self):
        return {"radius": self.radius, "eta": self.eta, "delta": self.delta, "d": self.d}

    @property
    def _cap_angle(self):
        return 2 * math.asin(self.delta / (2 * self.radius))

    def _base_point(self, p):
        # angular coordinates around the e1 axis
        R = self.radius
        if self.d == 1:
            a = p[0]
            return R * np.array([np.cos(a), np.sin(a)])
        a, b = p
        return R * np.array([np.cos(a), np.sin(a) * np.cos(b), np.sin(a) * np.sin(b)])

    def _base_jac(self, p):
        R = self.radius
        if self.d == 1:
            a = p[0]
            return R * np.array([[-np.sin(a)], [np.cos(a)]])
        a, b = p
        return R * np.array(
            [
                [-np.sin(a), 0.0],
                [np.cos(a) * np.cos(b), -np.sin(a) * np.sin(b)],
                [np.cos(a) * np.sin(b), np.sin(a) * np.cos(b)],
            ]
        )

    def _sample(self, n, rng):
        base = Sphere(self.radius, self.d)
        bmap = self.bump_map
        jmax = (1 + 2.5 * self.eta / self.delta) ** self.d
        out, have = [], 0
        while have < n:
            m = 2 * (n - have) + 16
            X = base._sample(m, rng)
            J = np.array([self._area_factor(x) for x in X])
            keep = rng.random(m) * jmax <= J
            Y = bmap(X[keep])
            out.append(Y)
            have += len(Y)
        return np.vstack(out)[:n]

    def _area_factor(self, x):
        if np.linalg.norm(x - self.bump_map.x0) >= self.delta:
            return 1.0
        B = Sphere(self.radius, self.d)._tangent(x).basis.T
        JB = self.bump_map.jacobian(x) @ B
        return math.sqrt(max(np.linalg.det(JB.T @ JB), 0.0))

    def _nearest_in_cap(self, z):
        bmap = self.bump_map
        alpha = self._cap_angle
        if self.d == 1:
            grid = [np.array([a]) for a in np.linspace(-alpha, alpha, GRID_NODES)]
            bounds = ([-alpha], [alpha])
        else:
            k = int(round(math.sqrt(GRID_NODES)))
            grid = [np.array([a, b]) for a in np.linspace(0, alpha, k) for b in np.linspace(0, 2 * np.pi, k, endpoint=False)]
            bounds = ([0.0, -np.inf], [alpha, np.inf])
        P = np.array([bmap(self._base_point(p)) for p in grid])
        d2 = np.sum((P - z) ** 2, axis=1)
        best, best_x = math.inf, None
        for g in np.argsort(d2)[:4]:
            res = least_squares(
                lambda p: bmap(self._base_point(p)) - z,
                x0=grid[g],
                jac=lambda p: bmap.jacobian(self._base_point(p)) @ self._base_jac(p),
                bounds=bounds,
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
            )
            val = float(np.linalg.norm(res.fun))
            if val < best:
                best, best_x = val, self._base_point(res.x)
        return best, best_x

    def _nearest_outside_cap(self, z):
        # sphere minus the open chordal cap B(x0, delta): radial projection,
        # pushed back to the cap rim when it falls inside the cap
        R = self.radius
        x0 = self.bump_map.x0
        nz = np.linalg.norm(z)
        u = z / nz if nz > 0 else np.eye(len(z))[1]
        p = R * u
        if np.linalg.norm(p - x0) >= self.delta:
            return float(np.linalg.norm(z - p)), p
        alpha = self._cap_angle
        e1 = x0 / R
        perp = u - (u @ e1) * e1
        if np.linalg.norm(perp) < 1e-15:
            perp = np.eye(len(z))[1]
        perp /= np.linalg.norm(perp)
        p = R * (np.cos(alpha) * e1 + np.sin(alpha) * perp)
        return float(np.linalg.norm(z - p)), p

    def nearest_base_point(self, z):
        """(distance, base point x) with Phi(x) the nearest point of M to z."""
        d_out, x_out = self._nearest_outside_cap(z)
        d_cap, x_cap = self._nearest_in_cap(z)
        return (d_cap, x_cap) if d_cap < d_out else (d_out, x_out)

    def _distance_one(self, z):
        return self.nearest_base_point(z)[0]

    def _tangent(self, x):
        _, base = self.nearest_base_point(x)
        B = Sphere(self.radius, self.d)._tangent(base).basis
        return orthonormalize((self.bump_map.jacobian(base) @ B.T).T)


@dataclass(frozen=True)
class BumpedBall(SyntheticManifold):
    """Image of the planar disk B(0, R) (embedded in R^D) under the bump map
    centred at the boundary point x0 = R e1."""

    radius: float = 1.0
    eta: float = 0.005
    delta: float = 0.5
    D: int = 2

    def __post_init__(self):
        if not self.delta > 0 or not self.radius > 0 or self.D < 2:
            raise InvalidParams("bumped_ball needs radius > 0, delta > 0, D >= 2")
        object.__setattr__(self, "kind", "bumped_ball")
        object.__setattr__(self, "intrinsic_dim", 2)
        object.__setattr__(self, "ambient_dim", self.D)
        object.__setattr__(self, "has_boundary", True)

    @property
    def bump_map(self) -> BumpMap:
        e1 = np.eye(self.D)[0]
        return BumpMap(self.eta, self.delta, self.radius * e1, e1)

    @property
    def volume(self):
        # area of the unbumped disk; the bump changes it by O(eta^2)
        return math.pi * self.radius**2

    @property
    def reach(self):
        return math.inf

    @property
    def boundary_reach(self):
        return self.radius / 2

    def params(self):
        return {"radius": self.radius, "eta": self.eta, "delta": self.delta, "D": self.D}

    def _sample(self, n, rng):
        bmap = self.bump_map
        jmax = 1 + 2.5 * self.eta / self.delta
        out, have = [], 0
        while have < n:
            m = 2 * (n - have) + 16
            r = self.radius * np.sqrt(rng.random(m))
            t = rng.uniform(0, 2 * np.pi, m)
            X = _pad(np.column_stack([r * np.cos(t), r * np.sin(t)]), self.D)
            # planar Jacobian determinant of Phi is 1 + (eta/delta) d_1 phi
            g = bump_gradient((X - bmap.x0) / self.delta)
            J = 1 + (self.eta / self.delta) * g[:, 0]
            keep = rng.random(m) * jmax <= J
            out.append(bmap(X[keep]))
            have += keep.sum()
        return np.vstack(out)[:n]

    def _preimage(self, y2):
        """In-plane preimage of y2 under Phi (only the first coordinate moves)."""
        bmap = self.bump_map
        x0 = bmap.x0[:2]

        def f(a):
            return a + self.eta * bump((np.array([a, y2[1]]) - x0) / self.delta) - y2[0]

        lo, hi = y2[0] - self.eta - 1e-12, y2[0] + 1e-12
        if f(lo) > 0 or f(hi) < 0:
            return np.array([y2[0], y2[1]])
        return np.array([brentq(f, lo, hi, xtol=1e-15), y2[1]])

    def _rim(self, s):
        s = np.asarray(s, dtype=float)
        P = self.radius * np.stack([np.cos(s), np.sin(s)], axis=-1)
        return self.bump_map(_pad(np.atleast_2d(P), self.D))[..., :2]

    def nearest_rim_parameter(self, y2):
        grid = np.linspace(0, 2 * np.pi, GRID_NODES, endpoint=False)
        d2 = np.sum((self._rim(grid) - y2) ** 2, axis=1)
        step = grid[1] - grid[0]
        best, best_s = math.inf, None
        for g in grid[np.argsort(d2)[:3]]:
            res = minimize_scalar(
                lambda s: float(np.sum((self._rim(s)[0] - y2) ** 2)),
                bounds=(g - step, g + step),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < best:
                best, best_s = float(res.fun), float(res.x)
        return best_s, math.sqrt(max(best, 0.0))

    def _distance_one(self, z):
        y2 = z[:2]
        off = float(np.linalg.norm(z[2:]))
        if np.linalg.norm(self._preimage(y2)) <= self.radius:
            return off
        return math.hypot(off, self.nearest_rim_parameter(y2)[1])

    def _boundary_distance_one(self, x):
        return self.nearest_rim_parameter(x[:2])[1]

    def _tangent(self, x):
        return Frame(np.eye(self.D)[:2])

    def _outward_normal(self, x):
        s, _ = self.nearest_rim_parameter(x[:2])
        p = _pad(self.radius * np.array([[np.cos(s), np.sin(s)]]), self.D)[0]
        J = self.bump_map.jacobian(p)[:2, :2]
        t = J @ np.array([-np.sin(s), np.cos(s)])
        nrm = np.array([t[1], -t[0]])
        nrm /= np.linalg.norm(nrm)
        if nrm @ (J @ np.array([np.cos(s), np.sin(s)])) < 0:
            nrm = -nrm
        return _pad(nrm[None, :], self.D)[0]

    def boundary_grid(self, m):
        return _pad(self._rim(2 * np.pi * np.arange(m) / m), self.D)


def make_manifold(kind: str, **params) -> SyntheticManifold:
    """Build a synthetic manifold by kind name."""
    factories = {
        "segment": Segment,
        "circle": lambda **p: Sphere(**{**p, "d": 1}),
        "sphere": lambda **p: Sphere(**{"d": 2, **p}),
        "spiral": Spiral,
        "annulus": Annulus,
        "half_sphere": HalfSphere,
        "moebius": Moebius,
        "bumped_sphere": BumpedSphere,
        "bumped_ball": BumpedBall,
    }
    if kind not in factories:
        raise InvalidParams(f"unknown manifold kind {kind!r}; choose from {', '.join(KINDS)}")
    try:
        return factories[kind](**params)
    except TypeError as exc:
        raise InvalidParams(str(exc)) from exc


def sample_uniform(manifold: SyntheticManifold, n: int, seed=0) -> PointCloud:
    return manifold.sample_uniform(n, seed)
