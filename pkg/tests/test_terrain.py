import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dumpvuln.errors import DataError
from dumpvuln.raster import Grid, GridHeader
from dumpvuln.terrain import altitude_note, classify_dem, slope_degrees, slope_note
from oracles import ALTITUDE_TABLE, SLOPE_TABLE, horn_slope_at, table_lookup


def plane_dem(a, b, n=9, cs=30.0, base=300.0):
    h = GridHeader(n, n, 1000.0, 2000.0, cs)
    xs, ys = h.cell_centers()
    X, Y = np.meshgrid(xs, ys)
    return Grid(h, base + a * X + b * Y)


@pytest.mark.parametrize("elev, note", [(150, 20), (950, 12), (200, 19), (2500, 1), (-40, 20), (1999.99, 2), (2000, 1)])
def test_altitude_note(elev, note):
    assert altitude_note(elev) == note


@pytest.mark.parametrize("slope, note", [(2, 8), (12, 4), (0.5, 8), (30, 1), (0, 8), (3, 7), (25, 1), (24.999, 2)])
def test_slope_note(slope, note):
    assert slope_note(slope) == note


def test_note_errors():
    with pytest.raises(DataError):
        altitude_note(math.nan)
    with pytest.raises(DataError):
        slope_note(-0.1)
    with pytest.raises(DataError):
        slope_note(math.inf)


@given(st.floats(-500, 9000), st.floats(-500, 9000))
def test_altitude_note_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert 1 <= altitude_note(hi) <= altitude_note(lo) <= 20
    assert altitude_note(a) == table_lookup(ALTITUDE_TABLE, a)


@given(st.floats(0, 90), st.floats(0, 90))
def test_slope_note_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert 1 <= slope_note(hi) <= slope_note(lo) <= 8
    assert slope_note(a) == table_lookup(SLOPE_TABLE, a)


class TestSlope:
    def test_constant_dem_is_flat(self):
        assert np.all(slope_degrees(plane_dem(0, 0)).data == 0.0)

    def test_plane_x(self):
        s = slope_degrees(plane_dem(0.1, 0)).data
        assert np.allclose(s[1:-1, 1:-1], math.degrees(math.atan(0.1)), atol=1e-9)
        assert s[4, 4] == pytest.approx(5.7106, abs=1e-4)

    def test_plane_xy(self):
        s = slope_degrees(plane_dem(0.1, 0.1)).data
        assert np.allclose(s[1:-1, 1:-1], math.degrees(math.atan(math.sqrt(0.02))), atol=1e-9)
        assert s[4, 4] == pytest.approx(8.0495, abs=1e-4)

    def test_too_small(self):
        h = GridHeader(2, 5, 0, 0, 10)
        with pytest.raises(DataError):
            slope_degrees(Grid(h, np.zeros(h.shape)))

    def test_range_and_rotation(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(0, 3000, (12, 12))
        h = GridHeader(12, 12, 0, 0, 25.0)
        s = slope_degrees(Grid(h, z)).data
        assert np.all((s >= 0) & (s < 90))
        a, b = 0.07, -0.2
        base = slope_degrees(plane_dem(a, b)).data[1:-1, 1:-1]
        rot = slope_degrees(Grid(plane_dem(a, b).header, np.rot90(plane_dem(a, b).data))).data[1:-1, 1:-1]
        assert np.allclose(base, rot, atol=1e-9)

    def test_matches_scalar_horn_with_nodata(self):
        rng = np.random.default_rng(2)
        h = GridHeader(11, 7, 0, 0, 20.0)
        z = rng.uniform(100, 900, h.shape)
        z[rng.random(h.shape) < 0.15] = h.nodata
        got = slope_degrees(Grid(h, z)).data
        valid = z != h.nodata
        for r in range(h.nrows):
            for c in range(h.ncols):
                if valid[r, c]:
                    assert got[r, c] == pytest.approx(horn_slope_at(z, valid, r, c, 20.0), abs=1e-9)
                else:
                    assert got[r, c] == h.nodata


class TestClassifyDem:
    def test_constant_low_dem(self):
        h = GridHeader(5, 5, 0, 0, 90.0)
        alt, sl = classify_dem(Grid(h, np.full(h.shape, 100.0)))
        assert np.all(alt.data == 20) and np.all(sl.data == 8)

    def test_nodata_propagates(self):
        h = GridHeader(5, 5, 0, 0, 90.0)
        z = np.full(h.shape, 450.0)
        z[2, 3] = h.nodata
        alt, sl = classify_dem(Grid(h, z))
        assert alt.data[2, 3] == h.nodata and sl.data[2, 3] == h.nodata
        assert alt.valid().sum() == 24 and sl.valid().sum() == 24

    def test_random_vs_scalar_lookup(self):
        rng = np.random.default_rng(4)
        h = GridHeader(16, 14, 0, 0, 30.0)
        z = rng.uniform(0, 2600, h.shape)
        alt, sl = classify_dem(Grid(h, z))
        slope = slope_degrees(Grid(h, z)).data
        for r in range(h.nrows):
            for c in range(h.ncols):
                assert alt.data[r, c] == table_lookup(ALTITUDE_TABLE, z[r, c])
                assert sl.data[r, c] == table_lookup(SLOPE_TABLE, slope[r, c])
