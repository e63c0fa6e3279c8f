"""Boundary detection, normal estimation and boundary-adaptive manifold
reconstruction from point clouds sampled on manifolds with boundary."""
from .calibrate import CalibrationReport, bandwidth_h, scale_R0, threshold_rho
from .detector import BoundaryResult, DetectionParams, boundary_tangent, detect, sparsify
from .errors import *  # noqa: F401,F403
from .geomcore import Decomposition, Frame, PointCloud, decompose, hausdorff, neighbors_within, orthonormalize, principal_angle
from .numerics import DEFAULT_POLICY, NumericPolicy
from .patches import PatchComplex, build, distance_to_boundary_patch, distance_to_complex, distance_to_inner_patch, hausdorff_to_truth, sample_complex
from .pipeline import calibrate_cloud, estimate, rates, run_detection
from .synth import BumpMap, make_manifold, sample_uniform
from .tangent import TangentField, estimate_all_tangents, estimate_tangent, local_covariance
from .voronoi import VoronoiProbe, cell_probe, project_local_cloud

__version__ = "0.1.0"
