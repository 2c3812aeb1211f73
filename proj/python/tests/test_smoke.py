import json
import math

import numpy as np
import pytest

import ebs


def test_closed_forms():
    assert ebs.q_seed(2.0, -1.3) == pytest.approx(1.5622844919372598, rel=1e-13)
    assert ebs.q_seed(2.0, 0.5) == 0.0
    assert abs(ebs.reflection_closed(2.0, 1.0)) == pytest.approx(1.0, abs=1e-14)
    kappa, c2 = ebs.bound_state(2.0)
    assert kappa == pytest.approx(1.0)
    assert c2 == pytest.approx(0.5)


def test_scatter_matches_closed_form():
    k = [0.3, 0.7, 1.5, 2.5]
    d = ebs.scatter(0.5, k)
    for kk, r, t in zip(k, d["R"], d["T"]):
        assert abs(r - ebs.reflection_closed(0.5, kk)) < 1e-6
        assert abs(t - ebs.transmission_closed(0.5, kk)) < 1e-6
        assert abs(r) ** 2 + abs(t) ** 2 == pytest.approx(1.0, abs=1e-8)


def test_insert_and_remove():
    d = ebs.insert(2.0, [(1.0, 0.5)], -10.0, 10.0, 1001)
    x = d["x"]
    assert x.shape == (1001,)
    closed = np.array([ebs.q_plus1(2.0, 0.5, v) for v in x])
    assert np.max(np.abs(d["q_new"] - closed)) < 1e-6
    assert d["y_norms"][0] == pytest.approx(1.0, abs=1e-6)
    back = ebs.round_trip(2.0, [(1.0, 0.5)], -10.0, 10.0, 1001)
    assert np.max(np.abs(back - d["q_seed"])) < 1e-6


def test_empty_insert_is_identity():
    d = ebs.insert(2.0, [], -5.0, 5.0, 101)
    assert np.array_equal(d["q_new"], d["q_seed"])


def test_errors():
    with pytest.raises(ebs.InputError):
        ebs.insert(2.0, [(2.0, 1.0)], -5.0, 5.0, 101)  # |R(2)| < 1
    with pytest.raises(ValueError):
        ebs.scatter(-1.0, [0.5])


def test_dyson_t0():
    xs = [-6.0, -2.0, -0.5, 1.0]
    q = ebs.dyson_q(2.0, 0.0, xs)
    for x, v in zip(xs, q):
        assert v == pytest.approx(ebs.q_seed(2.0, x), abs=1e-3)


def test_run_reports_validation_errors(tmp_path):
    cfg = {"command": "insert", "states": [{"omega": 2, "alpha": 1}], "output": str(tmp_path / "bad")}
    code, _, err = ebs.run(json.dumps(cfg))
    assert code == 2
    assert json.loads(err)["error"] == "not_resonant"


def test_run_scatter_writes_files(tmp_path):
    cfg = {"command": "scatter", "k_grid": {"k_min": 0.2, "k_max": 3, "n": 20}, "output": str(tmp_path / "s")}
    code, _, _ = ebs.run(json.dumps(cfg))
    assert code == 0
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert len(rows) == 21
    meta = json.loads((tmp_path / "s.meta.json").read_text())
    assert meta["config"]["command"] == "scatter"
    assert math.isfinite(meta["diagnostics"]["closed_form_max_error"])
