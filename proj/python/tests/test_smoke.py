import math

import numpy as np
import pytest

import prescurv


def test_circle_preset_samples():
    c = prescurv.circle(256, radius=2.0)
    assert c.closed
    assert c.samples.shape == (256, 3)
    assert np.allclose(np.linalg.norm(c.samples, axis=1), 2.0)
    assert c.curvature(0.4) == pytest.approx(0.5, abs=1e-6)


def test_curve_from_numpy_round_trip(tmp_path):
    t = np.linspace(0.0, 1.0, 65)
    pts = np.stack([np.cos(t), np.sin(t), t], axis=1)
    f = prescurv.Curve(pts, 0.0, 1.0)
    assert not f.closed
    assert np.array_equal(f.samples, pts)
    assert np.allclose(f.params(), t)
    path = tmp_path / "arc.csv"
    prescurv.write_csv(str(path), f)
    g = prescurv.read_csv(str(path))
    assert np.array_equal(g.samples, pts)


def test_bad_shape_is_rejected():
    with pytest.raises(prescurv.PrescurvError) as info:
        prescurv.Curve(np.zeros((2, 3)), 0.0, 1.0)
    assert info.value.kind == "InvalidArgument"


def test_fourier_knot_is_seeded():
    a = prescurv.fourier_knot(256, seed=11)
    b = prescurv.fourier_knot(256, seed=11)
    assert np.array_equal(a.samples, b.samples)


def test_verify_identity_has_zero_residuals():
    c = prescurv.circle(512)
    m = prescurv.verify(c, c, 1.0)
    assert m["c1_distance"] == 0.0
    assert m["curvature_sup_rel"] < 1e-8


def test_prescribe_arc():
    f = prescurv.helix(1024)
    g, report = prescurv.prescribe(f, "2 + sin(t)", epsilon=0.2, pinned=[math.pi])
    m = report["metrics"]
    assert m["curvature_sup_rel"] < 0.01
    assert m["speed_deviation"] < 1e-6
    assert m["c1_distance"] < 0.2
    assert np.allclose(g.eval(math.pi), f.eval(math.pi), atol=1e-6)
    assert np.allclose(g.eval(math.pi, 1), f.eval(math.pi, 1), atol=1e-6)


def test_infeasible_margin_raises():
    with pytest.raises(prescurv.PrescurvError) as info:
        prescurv.prescribe(prescurv.circle(256), 0.5)
    assert info.value.kind == "InfeasibleMargin"
