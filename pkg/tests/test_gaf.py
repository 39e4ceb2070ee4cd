import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaf_transfer.errors import DegenerateRange, OutOfRange
from gaf_transfer.gaf import (
    GafImage,
    GafMatrix,
    export_image,
    gaf_rescale,
    gaf_to_image,
    gasf,
    gasf_from_series,
    read_pgm,
    to_polar,
)


def test_rescale_examples():
    assert list(gaf_rescale([0, 5, 10])) == [-1.0, 0.0, 1.0]
    # ((-3 - 7) + (-3 + 3)) / 10 = -1 and ((7 - 7) + (7 + 3)) / 10 = 1
    assert list(gaf_rescale([-3, -3, 7])) == [-1.0, -1.0, 1.0]
    with pytest.raises(DegenerateRange):
        gaf_rescale([4, 4])


def test_polar():
    assert to_polar([1]).phi[0] == 0.0
    assert to_polar([0]).phi[0] == pytest.approx(math.pi / 2, abs=1e-15)
    p = to_polar([-1, 0.5])
    assert p.phi[0] == pytest.approx(math.pi, abs=1e-15)
    assert p.phi[1] == pytest.approx(math.pi / 3, abs=1e-15)
    # 1-based timestamps
    assert list(p.r) == [0.5, 1.0]


def test_polar_clamps_tiny_overshoot_and_rejects_real_ones():
    assert to_polar([1 + 1e-13]).phi[0] == 0.0
    with pytest.raises(OutOfRange):
        to_polar([1.01])
    with pytest.raises(OutOfRange):
        to_polar([float("nan")])


def test_gasf_examples():
    np.testing.assert_allclose(gasf([1, -1]).values, [[1, -1], [-1, 1]], atol=1e-15)
    assert gasf([0]).values[0, 0] == pytest.approx(-1.0, abs=1e-15)
    # 0.6 * 0.8 - sqrt(1 - 0.36) * sqrt(1 - 0.64) = 0.48 - 0.8 * 0.6
    assert gasf([0.6, 0.8]).values[0, 1] == pytest.approx(0.0, abs=1e-15)


def test_image_endpoints_are_exact():
    img = gaf_to_image(gasf([1, -1]))
    assert img.pixels.tolist() == [[255.0, 0.0], [0.0, 255.0]]
    # phi = pi/2 and 0 sum to pi/2, whose cosine is 0 up to rounding
    assert gaf_to_image(gasf([0, 1])).pixels[0, 1] == pytest.approx(127.5, abs=1e-12)
    mid = gaf_to_image(GafMatrix(np.array([[0.0]])))
    assert mid.pixels[0, 0] == 127.5


def test_pgm(tmp_path):
    path = tmp_path / "a.pgm"
    export_image(GafImage(np.array([[255.0]])), path)
    assert path.read_text().split() == ["P2", "1", "1", "255", "255"]
    export_image(GafImage(np.array([[127.5]])), path)
    assert path.read_text().split()[-1] == "128"
    export_image(gaf_to_image(gasf([1, -1])), path)
    assert read_pgm(path).tolist() == [[255, 0], [0, 255]]


def test_pgm_round_half_up_not_to_even():
    img = GafImage(np.array([[0.5, 1.5, 2.5, 254.5]]))
    from gaf_transfer.gaf import quantize

    assert quantize(img.pixels).tolist() == [[1, 2, 3, 255]]


finite_series = st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60).filter(
    lambda v: max(v) - min(v) > 1e-6
)


@settings(max_examples=150, deadline=None)
@given(finite_series)
def test_structure(values):
    x = gaf_rescale(values)
    g = gasf(x).values
    assert np.all(np.abs(x) <= 1.0)
    np.testing.assert_array_equal(g, g.T)
    np.testing.assert_allclose(np.diag(g), 2 * x**2 - 1, atol=1e-12)
    assert np.all(np.abs(g) <= 1 + 1e-12)
    alt = np.outer(x, x) - np.outer(np.sqrt(1 - x**2), np.sqrt(1 - x**2))
    np.testing.assert_allclose(g, alt, atol=1e-10)


# Integer-valued inputs keep distinct values apart. A value within ~1e-13 of an
# extreme sits where arccos is singular, and the rounding in a * x + b alone
# moves its angle by ~1e-8 there.
integer_series = st.lists(st.integers(-1000, 1000), min_size=2, max_size=60).filter(
    lambda v: max(v) > min(v)
)


@settings(max_examples=150, deadline=None)
@given(integer_series, st.floats(1e-3, 1e3), st.floats(-1e3, 1e3))
def test_positive_affine_invariance(values, a, b):
    x = np.asarray(values, dtype=float)
    np.testing.assert_allclose(gasf_from_series(a * x + b).values, gasf_from_series(x).values, atol=1e-9)
