import json
import math

import numpy as np
import pytest

import sdcarleman as sc


def test_frozen_operator_values():
    g = sc.Grid(1, 3)
    u = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(sc.diff(g, u, 0), [4, 4, 4, -12])
    np.testing.assert_allclose(sc.avg(g, u, 0), [0.5, 1.5, 2.5, 1.5])
    np.testing.assert_allclose(sc.second_diff(g, u, 0, 0), [0, 0, -64], atol=1e-12)
    assert sc.integral(g, u) == pytest.approx(1.5)
    assert sc.l2_norm(g, u) == pytest.approx(math.sqrt(3.5))
    np.testing.assert_allclose(g.points("dual_star")[:, 0], [0.125, 0.375, 0.625, 0.875])


def test_weight_closed_forms():
    p = sc.WeightParams()
    p.T, p.delta = 1.0, 0.5
    w = sc.CarlemanWeight(1, p)
    assert w.theta(0.0) == pytest.approx(4 / 3)
    assert w.theta(0.5) == pytest.approx(1.0)
    assert sc.theta_endpoint_closed_form(1.0, 0.5) == pytest.approx(4 / 3)
    assert w.phi([0.5]) < 0
    assert 2.0 / sc.coupled_delta(2.0, 0.4, 1 / 32, 1.0) == pytest.approx(0.4 * 32)


def test_solver_shapes_and_determinism():
    a = sc.solve_random(7, 2, 5, T=1.0, M=20)
    b = sc.solve_random(7, 2, 5, T=1.0, M=20)
    assert a.shape == (21, 25)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_suite_runs_and_reports():
    res = sc.run("verify-ops", verify_ops__fields=10)
    assert res["suite"] == "verify-ops"
    assert res["passed"]
    assert "identities.csv" in res["tables"]
    cfg = json.loads(sc.default_config())
    assert cfg["seed"] == 20251016


def test_bad_config_raises():
    with pytest.raises(sc.SdcError):
        sc.run("verify-ops", {"dim": "two"})
    with pytest.raises(sc.SdcError):
        sc.diff(sc.Grid(1, 3), np.zeros(4), 0)
