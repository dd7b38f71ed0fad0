import math

import pytest

import towerlab


def test_ring_scale():
    assert towerlab.solve_mu(4, 8) == pytest.approx(6.0 / 63.0, rel=1e-13)


def test_tower_symmetry():
    t = towerlab.build_tower(3, 8)
    assert len(t.spikes) == 8
    x = [0.3, 0.2, 0.1]
    r2 = sum(v * v for v in x)
    kelvin = t([v / r2 for v in x]) / math.sqrt(r2)
    assert kelvin == pytest.approx(t(x), rel=1e-12)


def test_ball_green():
    g = towerlab.green([0.3, 0.1, -0.2], [-0.4, 0.25, 0.1])
    assert g == pytest.approx(0.031699093481624228, rel=1e-13)


def test_annulus_green():
    g = towerlab.green([0.6, 0.0, 0.0], [0.0, 0.5, 0.2], kind="annulus", delta=0.2)
    assert g == pytest.approx(0.011943377707477366, rel=1e-12)


def test_ball_control():
    r = towerlab.hole_criterion(kind="ball", sigma=0.5, samples=10)
    assert r["antipodal_phi"] == pytest.approx(0.090187801085407357, rel=1e-12)


def test_psi():
    v = towerlab.psi_value(0.3, 0.5, 0.2, 1.0, 1.0, 1.0, 1.0)
    assert v == pytest.approx(0.15 + 0.25 - 0.2)


def test_run_build_tower():
    s = towerlab.run("build-tower", {"dimension": 4})
    assert s["pass"]
    assert s["result"]["mu"] == pytest.approx(0.095238, rel=1e-5)


def test_bad_config():
    with pytest.raises(Exception):
        towerlab.run("build-tower", {"dimensions": 4})
