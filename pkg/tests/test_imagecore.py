import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from outpaint.imagecore import (
    CorruptImageError,
    ImageNotFoundError,
    ShapeMismatchError,
    UnsupportedFormatError,
    apply_mask,
    as_image,
    compose_masked,
    load_image,
    quantize,
    save_image,
    to_grayscale,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def images(channels=3, max_side=8):
    shape = st.tuples(st.integers(1, max_side), st.integers(1, max_side), st.just(channels))
    return arrays(np.float64, shape, elements=unit)


def test_ppm_all_255_loads_as_ones(tmp_path):
    p = tmp_path / "w.ppm"
    p.write_bytes(b"P6\n2 2\n255\n" + bytes([255]) * 12)
    img = load_image(p)
    assert img.shape == (2, 2, 3)
    assert np.all(img == 1.0)


def test_pgm_zero_pixel(tmp_path):
    p = tmp_path / "z.pgm"
    p.write_bytes(b"P5 1 1 255\n\x00")
    img = load_image(p)
    assert img.shape == (1, 1, 1) and img[0, 0, 0] == 0.0


def test_pnm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 1\n255\n\x00\xff")
    assert load_image(p)[0, :, 0].tolist() == [0.0, 1.0]


@pytest.mark.parametrize("ext", [".png", ".ppm"])
def test_random_bytes_round_trip(tmp_path, rng, ext):
    data = rng.integers(0, 256, size=(7, 9, 3), dtype=np.uint8)
    p = tmp_path / f"r{ext}"
    save_image(data / 255.0, p)
    assert np.array_equal(quantize(load_image(p)), data)


def test_gray_png_round_trip(tmp_path, rng):
    data = rng.integers(0, 256, size=(5, 4, 1), dtype=np.uint8)
    p = tmp_path / "g.png"
    save_image(data / 255.0, p)
    img = load_image(p)
    assert img.shape == (5, 4, 1)
    assert np.array_equal(quantize(img), data)


def test_quantize_endpoints_and_half():
    assert quantize(np.array([0.0, 0.5, 1.0])).tolist() == [0, 128, 255]


def test_save_load_save_byte_stable(tmp_path, rng):
    img = rng.random((6, 5, 3))
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    save_image(img, a)
    save_image(load_image(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_missing_file(tmp_path):
    with pytest.raises(ImageNotFoundError):
        load_image(tmp_path / "nope.png")


def test_unsupported_format(tmp_path):
    p = tmp_path / "x.bmp"
    p.write_bytes(b"BM\x00\x00")
    with pytest.raises(UnsupportedFormatError):
        load_image(p)
    q = tmp_path / "deep.pgm"
    q.write_bytes(b"P5 1 1 65535\n\x00\x00")
    with pytest.raises(UnsupportedFormatError):
        load_image(q)


def test_corrupt_header_and_raster(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P6\nx 2\n255\n")
    with pytest.raises(CorruptImageError):
        load_image(p)
    q = tmp_path / "short.ppm"
    q.write_bytes(b"P6\n2 2\n255\n\x00\x00")
    with pytest.raises(CorruptImageError):
        load_image(q)
    r = tmp_path / "trunc.png"
    r.write_bytes(b"\x89PNG\r\n\x1a\n\x00\x00")
    with pytest.raises(CorruptImageError):
        load_image(r)


def test_error_kinds_are_distinct():
    kinds = {ImageNotFoundError, UnsupportedFormatError, CorruptImageError}
    for a in kinds:
        for b in kinds - {a}:
            assert not issubclass(a, b)


def test_save_wrong_channel_count(tmp_path):
    with pytest.raises(ValueError):
        save_image(np.zeros((2, 2, 3)), tmp_path / "x.pgm")
    with pytest.raises(ValueError):
        save_image(np.zeros((2, 2, 1)), tmp_path / "x.ppm")


def test_as_image_rejects_out_of_range():
    with pytest.raises(ValueError):
        as_image(np.full((2, 2, 3), 1.5))
    with pytest.raises(ValueError):
        as_image(np.zeros((2, 2, 2)))


def test_grayscale_weights():
    px = np.array([[[1.0, 0, 0], [0, 0, 1.0], [0, 1.0, 0]]])
    y = to_grayscale(px)[0, :, 0]
    assert y[0] == pytest.approx(0.299, abs=1e-15)
    assert y[1] == pytest.approx(0.114, abs=1e-15)
    assert y[2] == pytest.approx(0.587, abs=1e-15)


def test_grayscale_needs_three_channels():
    with pytest.raises(ValueError):
        to_grayscale(np.zeros((2, 2, 1)))


@given(st.floats(0.0, 1.0))
def test_grayscale_fixed_point(v):
    y = to_grayscale(np.full((1, 1, 3), v))[0, 0, 0]
    assert y == pytest.approx(v, abs=1e-15)


@given(images())
def test_grayscale_in_range(img):
    y = to_grayscale(img)
    assert y.shape == img.shape[:2] + (1,)
    assert y.min() >= 0.0 and y.max() <= 1.0


def test_apply_mask_examples():
    img = np.ones((4, 4, 3))
    assert np.array_equal(apply_mask(img, np.zeros((4, 4))), img)
    assert not apply_mask(img, np.ones((4, 4))).any()
    checker = (np.add.outer(np.arange(4), np.arange(4)) % 2).astype(float)
    out = apply_mask(img, checker)
    assert np.array_equal(out[:, :, 0], 1.0 - checker)


def test_apply_mask_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        apply_mask(np.ones((4, 4, 3)), np.ones((4, 3)))


def test_compose_examples():
    a, b = np.full((2, 4, 3), 0.2), np.full((2, 4, 3), 0.8)
    m = np.zeros((2, 4))
    m[:, 2:] = 1
    out = compose_masked(a, b, m)
    assert np.all(out[:, :2] == 0.2) and np.all(out[:, 2:] == 0.8)
    assert np.array_equal(compose_masked(a, b, np.zeros((2, 4))), a)
    assert np.array_equal(compose_masked(a, b, np.ones((2, 4))), b)
    with pytest.raises(ShapeMismatchError):
        compose_masked(a, b[:, :3], m)


@given(images(), st.data())
def test_mask_partition_of_unity(img, data):
    m = data.draw(arrays(np.float64, img.shape[:2], elements=st.sampled_from([0.0, 1.0])))
    assert np.array_equal(apply_mask(img, m) + img * m[:, :, None], img)
    assert np.array_equal(compose_masked(img, img, m), img)
