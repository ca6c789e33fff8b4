import numpy as np
import pytest

from cineloop.core.errors import DimensionError
from cineloop.core.maskproc import Mask, mask_area_ratio, refine_mask, resize_mask, threshold_mask
from cineloop.core.pyramid import ImageRGB

SIZE = 512


def square_blob(fraction, top=40, left=40):
    """512x512 mask with one square dynamic component of roughly the given area."""
    side = int(round(np.sqrt(fraction * SIZE * SIZE)))
    data = np.zeros((SIZE, SIZE), dtype=np.uint8)
    data[top:top + side, left:left + side] = 1
    return Mask(data)


def test_small_dynamic_component_removed():
    refined = refine_mask(square_blob(0.02))
    assert not refined.data.any()


def test_large_dynamic_component_kept():
    mask = square_blob(0.05)
    refined = refine_mask(mask)
    np.testing.assert_array_equal(refined.data, mask.data)


def test_small_static_hole_filled():
    data = np.ones((SIZE, SIZE), dtype=np.uint8)
    data[100:110, 200:210] = 0
    refined = refine_mask(Mask(data))
    assert refined.data.all()


def test_mixed_components():
    data = np.zeros((SIZE, SIZE), dtype=np.uint8)
    data[10:40, 10:40] = 1            # 0.34%
    data[200:330, 200:330] = 1        # 6.4%
    data[250:255, 250:255] = 0        # hole inside the big blob
    refined = refine_mask(Mask(data)).data
    assert not refined[10:40, 10:40].any()
    assert refined[200:330, 200:330].all()
    assert refined.sum() == 130 * 130


def test_refine_is_idempotent():
    data = np.zeros((SIZE, SIZE), dtype=np.uint8)
    data[0:200, 0:512] = 1
    data[300:360, 100:400] = 1
    data[50:54, 50:54] = 0
    once = refine_mask(Mask(data))
    twice = refine_mask(once)
    np.testing.assert_array_equal(once.data, twice.data)


def test_all_ones_unchanged():
    mask = Mask.full(64, 64)
    assert refine_mask(mask).data.all()


def test_diagonal_pixels_are_separate_components():
    data = np.zeros((100, 100), dtype=np.uint8)
    data[0:60, 0:60] = 1
    data[60, 60] = 1  # touches only diagonally, one pixel is far below 3%
    refined = refine_mask(Mask(data))
    assert refined.data[60, 60] == 0
    assert refined.data[0:60, 0:60].all()


def test_threshold_validation():
    for bad in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            refine_mask(Mask.full(4, 4), bad)


def test_mask_rejects_non_binary():
    with pytest.raises(ValueError):
        Mask(np.array([[0, 2], [1, 0]]))
    with pytest.raises(DimensionError):
        Mask(np.zeros((2, 2, 2)))


def test_area_ratio():
    data = np.zeros((10, 10), dtype=np.uint8)
    data[:3, :] = 1
    assert mask_area_ratio(Mask(data)) == pytest.approx(0.3)


def test_resize_mask_nearest():
    data = np.array([[1, 0], [0, 1]], dtype=np.uint8)
    big = resize_mask(Mask(data), 4, 4)
    expected = np.kron(data, np.ones((2, 2), dtype=np.uint8))
    np.testing.assert_array_equal(big.data, expected)
    np.testing.assert_array_equal(resize_mask(big, 2, 2).data, data)


def test_threshold_mask():
    pixels = np.zeros((2, 2, 3))
    pixels[0, 0, 1] = 0.9
    pixels[1, 1, 1] = 0.5
    mask = threshold_mask(ImageRGB(pixels), channel=1, cutoff=0.5)
    np.testing.assert_array_equal(mask.data, [[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        threshold_mask(ImageRGB(pixels), channel=3, cutoff=0.5)
    with pytest.raises(ValueError):
        threshold_mask(ImageRGB(pixels), channel=0, cutoff=1.5)


def test_speck_nested_in_small_blob_keeps_its_label():
    data = np.zeros((64, 64), dtype=np.uint8)
    data[20:30, 20:30] = 1
    data[24:26, 24:26] = 0  # 96-px dynamic blob around a 4-px static speck, both under 3%
    refined = refine_mask(Mask(data))
    assert not refined.data.any()
    assert int((refined.data != data).sum()) == 96
    assert np.array_equal(refine_mask(refined).data, refined.data)
