"""The bump perturbation used to build nearby pairs of hypotheses.

Checks the derivative certificates of the bump on a grid, then deforms the
unit sphere near (1, 0, 0) and measures how far the two surfaces are apart
and whether the deformation keeps the reach-stability conditions.

    python3 demos/bump_hypotheses.py
"""
import warnings

import numpy as np

from boundarykit import make_manifold
from boundarykit.errors import BumpAdmissibilityWarning
from boundarykit.geomcore import hausdorff
from boundarykit.synth import bump, fd_gradient_norms, fd_hessian_norms, fd_map_deviation_norm


def main():
    g = np.linspace(-1, 1, 41)
    A, B = np.meshgrid(g, g)
    P = np.column_stack([A.ravel(), B.ravel()])
    P = P[np.sum(P * P, axis=1) < 1]
    print(f"sup |d phi|   on the grid: {fd_gradient_norms(bump, P).max():.4f}  (certificate 2.5)")
    print(f"sup |d^2 phi| on the grid: {fd_hessian_norms(bump, P).max():.3f}  (certificate 23)")

    sphere = make_manifold("sphere")
    for eta, delta in ((0.005, 0.5), (0.02, 0.5), (0.05, 0.5)):
        M = make_manifold("bumped_sphere", eta=eta, delta=delta)
        base = sphere.sample_uniform(3000, seed=0).points
        moved = M.bump_map(base)
        dev = fd_map_deviation_norm(M.bump_map, base).max()
        with warnings.catch_warnings():
            # the verdict is printed below
            warnings.simplefilter("ignore", BumpAdmissibilityWarning)
            ok = M.bump_map.check_admissible(sphere.reach)
        print(f"eta={eta:<6} delta={delta}: sample Hausdorff shift {hausdorff(base, moved):.4f}, |I - dPhi| {dev:.3f}, admissible {ok}")


if __name__ == "__main__":
    main()
