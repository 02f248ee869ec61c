import numpy as np
import pytest

import hdrest


def test_sample_is_deterministic():
    a = hdrest.sample(1, 200, seed=3)
    b = hdrest.sample(1, 200, seed=3)
    assert a.shape == (200, 2)
    assert np.array_equal(a, b)


def test_plugin_region():
    pts = hdrest.sample(1, 500, seed=5)
    est = hdrest.plugin(pts, tau=0.5)
    assert est.method == "plugin"
    assert est.components == 1
    assert est.contains(np.array([[0.0, 0.0], [4.0, 4.0]])).tolist() == [True, False]
    d = est.to_dict()
    assert d["type"] == "estimate"
    assert d["region"]["type"] == "contour"


def test_hybrid_region():
    pts = hdrest.sample(1, 400, seed=7)
    est = hdrest.hybrid(pts, tau=0.5, B=30, seed=11)
    assert est.status in {"converged", "not_converged"}
    inside = est.contains(pts).mean()
    assert inside == pytest.approx(est.coverage)
    if est.converged:
        assert est.coverage >= 0.5
    assert est.boundary(0.05).shape[1] == 2


def test_hausdorff_and_errors():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 2.0]])
    assert hdrest.hausdorff(a, b) == pytest.approx(np.sqrt(5.0))
    with pytest.raises(ValueError):
        hdrest.plugin(np.zeros((10, 3)))
    with pytest.raises(ValueError):
        hdrest.hybrid(hdrest.sample(1, 100, seed=1), tau=1.5)
