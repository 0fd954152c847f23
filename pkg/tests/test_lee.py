import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from despeckle import (
    InvalidArgumentError,
    LeeSpec,
    Raster,
    enl,
    lee_filter,
    pad_mirror,
    unit_speckle,
)


def stream(*key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def test_spec_validation():
    LeeSpec(window=7, nominal_looks=4.0)
    with pytest.raises(InvalidArgumentError):
        LeeSpec(window=4)
    with pytest.raises(InvalidArgumentError):
        LeeSpec(window=1)
    with pytest.raises(InvalidArgumentError):
        LeeSpec(nominal_looks=0.5)


def test_undersized_image():
    with pytest.raises(InvalidArgumentError):
        lee_filter(Raster(np.ones((3, 40))), LeeSpec(window=5))


def test_constant_image_passes_through():
    img = Raster(np.full((10, 10), 17.0))
    out = lee_filter(img, LeeSpec(window=5, nominal_looks=1.0))
    assert np.array_equal(out.array, img.array)


def test_all_zero_image_maps_to_zero():
    img = Raster(np.zeros((8, 8)))
    out = lee_filter(img, LeeSpec(window=3))
    assert np.array_equal(out.array, np.zeros((8, 8)))


def test_gain_clamps_to_boxcar_on_smooth_data():
    # sample CV far below the speckle CV for 1 look drives the gain to its
    # lower clamp, leaving the plain window mean
    rng = stream(201)
    img = Raster(rng.normal(100.0, 1.0, size=(12, 15)))
    out = lee_filter(img, LeeSpec(window=3, nominal_looks=1.0))
    padded = pad_mirror(img, 1).array
    means = sliding_window_view(padded, (3, 3)).mean(axis=(2, 3))
    assert np.allclose(out.array, means, rtol=0, atol=1e-12)


def test_huge_looks_is_near_identity():
    # speckle CV ~ 1/sqrt(looks) -> gain pinned at 1, output is the input
    rng = stream(202)
    img = Raster(50.0 * unit_speckle(4.0, (10, 10), rng))
    out = lee_filter(img, LeeSpec(window=5, nominal_looks=1e12))
    assert np.allclose(out.array, img.array, rtol=1e-9)


def test_output_stays_within_window_range():
    rng = stream(203)
    img = Raster(120.0 * unit_speckle(1.0, (18, 18), rng))
    out = lee_filter(img, LeeSpec(window=5, nominal_looks=1.0))
    padded = pad_mirror(img, 2).array
    wins = sliding_window_view(padded, (5, 5)).reshape(18, 18, -1)
    assert np.all(out.array >= wins.min(axis=2) - 1e-12)
    assert np.all(out.array <= wins.max(axis=2) + 1e-12)


def test_smooths_homogeneous_speckle():
    for s in range(10):
        rng = stream(7, s)
        img = Raster(200.0 * unit_speckle(1.0, (64, 64), rng))
        out = lee_filter(img, LeeSpec(window=5, nominal_looks=1.0))
        assert enl(img.array) == pytest.approx(1.0, rel=0.2)
        assert enl(out.array) >= 8.0 * enl(img.array)


def test_preserves_mean_roughly():
    rng = stream(204)
    img = Raster(90.0 * unit_speckle(3.0, (48, 48), rng))
    out = lee_filter(img, LeeSpec(window=7, nominal_looks=3.0))
    assert out.array.mean() == pytest.approx(img.array.mean(), rel=0.02)
