"""Single numeric-tolerance policy shared by every module."""
from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    rel: float = 1e-9
    abs: float = 1e-12
    # orthonormality of frames, and the independence test in orthonormalize
    orthonormal: float = 1e-10
    # lambda_d > eigen_gap * lambda_1, and lambda_d vs lambda_{d+1} separation
    eigen_gap: float = 1e-12
    # sign convention: first component with |c| > sign_threshold is made positive
    sign_threshold: float = 1e-12
    # sites closer than this to the probed site are dropped
    dedupe: float = 1e-12
    # radius >= rho - rho_compare counts as rho-large
    rho_compare: float = 1e-12
    # projected normals shorter than this are degenerate
    degenerate_normal: float = 1e-9


DEFAULT_POLICY = NumericPolicy()
THREADS_ENV = "BOUNDARYKIT_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, then BOUNDARYKIT_THREADS, then 1."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    return max(1, int(threads))
