import math

import numpy as np
import pytest

import nodal_atlas as na


def test_version():
    assert na.__version__.count(".") == 2


def test_covariance_matches_bessel_integral():
    # J0(r) from its integral representation, midpoint rule.
    r = 3.7
    t = (np.arange(20000) + 0.5) * math.pi / 20000
    j0 = np.mean(np.cos(r * np.sin(t)))
    assert na.covariance(1.0, r) == pytest.approx(j0, abs=1e-8)
    assert na.covariance(0.5, 0.0) == pytest.approx(1.0)


def test_sample_field_shape_and_variance():
    f = na.sample_field(alpha=1.0, R=10.0, h=0.25, seed=3)
    assert f.ndim == 2 and f.shape[0] == f.shape[1]
    assert 0.5 < f.var() < 1.5
    g = na.sample_field(alpha=1.0, R=10.0, h=0.25, seed=3)
    assert np.array_equal(f, g)


def test_nesting_codes_of_concentric_rings():
    h = 0.1
    x = (np.arange(241) - 120) * h
    xx, yy = np.meshgrid(x, x)
    values = np.cos(np.hypot(xx, yy))
    codes = na.nesting_codes(values, h)
    assert "()" in codes
    assert "(())" in codes


def test_trees():
    assert [len(na.all_rooted_trees(n)) for n in range(1, 6)] == [1, 1, 2, 4, 9]
    assert na.canonical_code("(()(()))") == na.canonical_code("((())())")
    result = na.realize_tree("(()())")
    assert result["matched"]


def test_discrepancy_brute_force():
    mu = {1: 0.75, 2: 0.25}
    nu = {1: 0.5, 2: 0.5}
    assert na.discrepancy(mu, nu) == pytest.approx(0.25)


def test_small_campaign():
    s = na.run_campaign({"mode": "plane", "R": 25.0, "samples": 3, "seed": 4})
    assert s["n_samples"] == 3
    assert s["identities"]["handshake_failures"] == 0
    p = s["measures"]["raw"]
    assert 0.5 < p["1"] <= 1.0


def test_bad_config_raises():
    with pytest.raises(na.NodalError, match="unknown config key"):
        na.run_campaign({"mode": "plane", "bogus": 1})


def test_kac_rice_1d(tmp_path):
    s = na.kac_rice(dim=1, alpha=0.5, R=200.0, h=0.05, samples=20, seed=2, out=str(tmp_path))
    assert s["relative_error"] < 0.05
