import math

import numpy as np
import pytest

from skinbath import SpecError, curvature, pseudosphere_sample, site_coordinates
from skinbath.hyperbolic import coupling_separation, pseudosphere_point, surface_residual


def test_curvature_values():
    assert curvature(math.sqrt(3)) == pytest.approx(math.log(3) ** 2, rel=1e-12)
    assert curvature(1.0) == 0.0
    assert curvature(math.e) == pytest.approx(4.0, rel=1e-12)


def test_curvature_round_trip():
    for kappa in (0.3, 1.0, 2.0, 4.7):
        beta = math.exp(math.sqrt(kappa) / 2.0)
        assert curvature(beta) == pytest.approx(kappa, abs=1e-12)


def test_curvature_rejects_nonpositive_beta():
    with pytest.raises(SpecError):
        curvature(0.0)


def test_site_coordinates_basics():
    kappa = math.log(3) ** 2
    hmap = site_coordinates(1.0, range(5), kappa)
    assert hmap.x[0] == 1.0
    ratios = hmap.x[1:] / hmap.x[:-1]
    np.testing.assert_allclose(ratios, math.exp(math.sqrt(kappa)), rtol=1e-12)
    assert not hmap.flat


def test_site_coordinates_flat_case_flagged():
    hmap = site_coordinates(2.0, range(5), 0.0)
    assert hmap.flat
    np.testing.assert_allclose(hmap.x, 2.0)


def test_coupling_separation_value():
    kappa = math.log(3) ** 2  # approx 1.2069
    d_x = coupling_separation(1.0, 0, 2, kappa)
    assert d_x == pytest.approx(8.0, rel=1e-10)


def test_pseudosphere_rim():
    # At the funnel rim the two branches coincide at u = 0; the square-root
    # branch point limits the attainable float accuracy to ~sqrt(eps).
    u_plus, u_minus = pseudosphere_point(2.0, 1.0 / math.sqrt(2.0), 0.3)
    assert u_plus == pytest.approx(0.0, abs=1e-7)
    assert u_plus == u_minus


def test_pseudosphere_rejects_beyond_rim():
    with pytest.raises(SpecError):
        pseudosphere_point(2.0, 1.0, 0.0)  # rim is 1/sqrt(2)
    with pytest.raises(SpecError):
        pseudosphere_point(0.0, 0.5, 0.0)


def test_pseudosphere_rim_ordering():
    narrow = pseudosphere_sample(2.0, r_count=8, theta_count=8)
    wide = pseudosphere_sample(1.0, r_count=8, theta_count=8)
    assert narrow.rim_radius < wide.rim_radius
    assert narrow.rim_radius == pytest.approx(1 / math.sqrt(2))
    assert wide.rim_radius == pytest.approx(1.0)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_pseudosphere_residuals(kappa):
    sample = pseudosphere_sample(kappa, r_count=30, theta_count=40)
    assert np.max(sample.residuals) < 1e-10
    # both branches present and covering the same radii
    assert set(np.unique(sample.branch)) == {-1.0, 1.0}


def test_surface_residual_detects_off_surface_points():
    res = surface_residual(1.0, np.array([5.0]), np.array([0.5]), np.array([0.0]))
    assert res[0] > 1.0
