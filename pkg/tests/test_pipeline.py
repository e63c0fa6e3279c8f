import math

import numpy as np
import pytest

from boundarykit.errors import InvalidParams
from boundarykit.pipeline import default_eps, log_log_slope, rates, run_detection
from boundarykit.synth import make_manifold


def test_log_log_slope():
    n = [100, 200, 400, 800]
    assert log_log_slope(n, [5.0 * x**-0.5 for x in n]) == pytest.approx(-0.5, abs=1e-12)
    assert log_log_slope([100], [1.0]) is None
    assert log_log_slope([100, 100, 200], [1.0, 2.0, 3.0]) is None
    assert log_log_slope(n, [1.0, 0.0, 1.0, 1.0]) is None
    assert log_log_slope(n, [1.0, math.inf, 1.0, 1.0]) is None


def test_rates_small_sweep():
    rows, slopes = rates("annulus", [300, 600, 1200], [0])
    assert [r["n"] for r in rows] == [300, 600, 1200]
    assert set(slopes) == {"dH_boundary_cover", "dH_boundary_excess"}
    assert all(r["r_eff"] > 0 for r in rows)
    with pytest.raises(InvalidParams):
        rates("annulus", [], [0])


def test_rates_boundaryless_has_no_slopes():
    rows, slopes = rates("circle", [200], [0, 1])
    assert slopes == {}
    assert all(r["dH_boundary_cover"] is None for r in rows)


def test_default_eps():
    cloud = make_manifold("annulus").sample_uniform(400, seed=0)
    e_int, e_bd = default_eps(cloud)
    assert e_bd == 2 * e_int
    X = cloud.points
    D = np.sort(np.linalg.norm(X[:, None] - X[None], axis=2), axis=1)
    assert e_int == pytest.approx(D[:, 2].max(), abs=1e-12)


def test_explicit_params_skip_calibration():
    cloud = make_manifold("annulus").sample_uniform(400, seed=2)
    run = run_detection(cloud, h=0.2, R0=0.5, rho=0.3)
    assert (run.report.h, run.report.R0, run.report.rho) == (0.2, 0.5, 0.3)
    assert run.result.params.rho == 0.3
