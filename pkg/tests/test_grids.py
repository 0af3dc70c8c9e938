"""Grid construction, derived quantities, and validation."""

import numpy as np
import pytest

from fracnlse import make_grid


def test_spacing_and_volumes():
    g = make_grid(2, 128, 20.0)
    assert g.spacing == pytest.approx(40.0 / 128, rel=0, abs=0)
    assert g.shape == (128, 128)
    assert g.num_points == 128 * 128
    assert g.cell_volume == pytest.approx(g.spacing ** 2, rel=1e-15)
    assert g.volume == pytest.approx(40.0 ** 2, rel=1e-15)


def test_axis_coordinates_cover_half_open_box():
    g = make_grid(1, 16, 4.0)
    x = g.axis_coordinates()
    assert x.shape == (16,)
    assert x[0] == pytest.approx(-4.0)
    assert x[-1] == pytest.approx(4.0 - g.spacing)
    assert np.allclose(np.diff(x), g.spacing)


def test_meshgrid_and_radius():
    g = make_grid(2, 16, 2.0)
    X, Y = g.meshgrid()
    assert X.shape == (16, 16)
    r = g.radius()
    assert r[0, 0] == pytest.approx(np.hypot(2.0, 2.0))
    origin = np.unravel_index(np.argmin(r), r.shape)
    assert r[origin] == 0.0


def test_frequencies_are_integer_multiples_of_pi_over_L():
    g = make_grid(1, 8, 2.0)
    k = g.frequencies
    base = np.pi / g.half_length
    assert np.allclose(k / base, [0, 1, 2, 3, -4, -3, -2, -1])


def test_symbol_matches_wavenumber_power():
    g = make_grid(1, 32, 5.0)
    s = 0.4
    assert np.allclose(g.symbol(s), g.wavenumber_sq() ** s)
    assert g.symbol(s)[0] == 0.0


def test_boundary_tail_mask_outer_shell():
    g = make_grid(1, 16, 8.0)
    mask = g.boundary_tail_mask()
    x = g.axis_coordinates()
    assert np.array_equal(mask, np.abs(x) > 4.0)


def test_make_grid_rejects_bad_dimension():
    with pytest.raises(ValueError, match="unsupported dimension"):
        make_grid(4, 64, 10.0)
    with pytest.raises(ValueError, match="unsupported dimension"):
        make_grid(0, 64, 10.0)


def test_make_grid_rejects_odd_or_tiny_sizes():
    with pytest.raises(ValueError, match="even"):
        make_grid(1, 65, 10.0)
    with pytest.raises(ValueError, match="too small"):
        make_grid(1, 4, 10.0)


def test_make_grid_rejects_bad_half_length():
    with pytest.raises(ValueError, match="half length"):
        make_grid(1, 64, 0.0)
    with pytest.raises(ValueError, match="half length"):
        make_grid(1, 64, -3.0)
    with pytest.raises(ValueError, match="half length"):
        make_grid(1, 64, float("nan"))
