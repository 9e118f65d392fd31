import json
import math

import numpy as np
import pytest

import stathyp


def test_super_ideal_geometry():
    g = stathyp.geometry_at(stathyp.Model.super_ideal(2), np.zeros(2))
    assert g["det_g"] == pytest.approx(1.5)
    assert abs(g["K"]) < 1e-15
    assert g["S"] == pytest.approx(math.log(2))


def test_model_round_trip_and_errors():
    m = stathyp.Model.from_json('{"kind":"expr","n":2,"f":["x1^2","sin(x2)"]}')
    assert (m.n, m.m) == (2, 2)
    again = stathyp.Model.from_json(m.to_json())
    x = np.array([0.3, -0.2])
    assert np.allclose(m.values(x), again.values(x))
    with pytest.raises(stathyp.StathypError) as info:
        stathyp.Model.from_json('{"n":2,"A":[[1,0,0],[0,1,0]],"b":[0,0]}')
    assert info.value.kind == "dimension mismatch"


def test_entropy_identity():
    m = stathyp.Model.affine(np.array([[1.0, -0.5], [0.2, 0.3], [-1.0, 0.0]]), np.array([0.1, 0.0, -0.4]))
    e = stathyp.evaluate(m, np.array([0.4, -0.7]))
    assert e["S"] == pytest.approx(e["F"] - e["fbar"], abs=1e-14)
    assert e["S"] == pytest.approx(stathyp.shannon_entropy(e["w"]), abs=1e-14)


def test_deformations():
    m = stathyp.Model.super_ideal(2)
    x = np.array([1.0, 0.0])
    assert stathyp.classify(m, x, np.array([1.0, 0.0])) == "decreasing"
    assert stathyp.classify(m, x, np.array([1.0, 1.0])) == "reversible"
    df = stathyp.complete_reversible(m, x, np.array([0.7]), 1)
    assert abs(stathyp.delta_entropy(m, x, df)) < 1e-12
    dw = stathyp.delta_weights(m, np.zeros(2), np.array([1.0, 0.0]))
    assert np.allclose(dw, [0.25, -0.25])
    report = json.loads(stathyp.delta_geometry(m, x, '{"shift":{"v":[1,0],"tau":1}}'))
    assert "delta_K" in report


def test_replicator_and_laplacian():
    m = stathyp.Model.affine(np.zeros((2, 1)), np.array([2.0, 1.0]))
    orbit = stathyp.replicator_orbit(m, np.zeros(1), 1)
    e, e2 = math.e, math.e ** 2
    assert orbit[1][0] == pytest.approx(2 * e2 / (2 * e2 + e))
    assert np.allclose(stathyp.laplacian(np.array([0.5, 0.5])), [[0.25, -0.25], [-0.25, 0.25]])


def test_potential_round_trip():
    f = np.array([0.2, 1.1, -0.4])
    h = stathyp.closed_form_weights(f, 0.7, np.array([0.0, 0.3, -0.2]))
    gamma, sigma = stathyp.fit_params(f, h)
    assert gamma == pytest.approx(0.7)
    assert np.allclose(sigma, [0.0, 0.3, -0.2])


def test_integrals():
    assert stathyp.li2(-1.0) == pytest.approx(-math.pi ** 2 / 12, rel=1e-14)
    value, err, evals = stathyp.entropy_integral(stathyp.Model.super_ideal(2), -np.ones(2), np.ones(2))
    assert abs(value - stathyp.closed_S2(1.0)) < 1e-6
    assert evals > 0
    assert abs(stathyp.closed_S2(10.0) / stathyp.asymptote_S2(10.0) - 1) < 0.01


def test_volume_check():
    region = {
        "generators": [[-0.5, 1], [0.6, 1]],
        "lower": {"kind": "affine", "A": [[0.3], [-0.5]], "b": [0, 0]},
        "upper": {"kind": "affine", "A": [[0.8], [0.1]], "b": [0, 0]},
    }
    v = stathyp.volume_check(json.dumps(region), 100000, 5)
    assert abs(v["delta_S"] - v["volume_times"]) <= 3 * v["mc_sigma"]
