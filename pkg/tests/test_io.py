import numpy as np
import pytest

from fieldseg.grid import FieldMap, LabelImage
from fieldseg.io import (
    read_fmap,
    read_gray_png,
    read_label_png,
    write_field_png,
    write_fmap,
    write_gray_png,
    write_label_png,
    write_label_viz_png,
)


def test_label_png_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 70000 % 65536, size=(33, 41)).astype(np.int32)
    img = LabelImage(arr)
    path = tmp_path / "labels.png"
    write_label_png(img, path)
    back = read_label_png(path)
    assert np.array_equal(back.labels, arr)


def test_label_png_rejects_wide_ids(tmp_path):
    img = LabelImage(np.array([[70000]], dtype=np.int64))
    with pytest.raises(ValueError, match="16-bit"):
        write_label_png(img, tmp_path / "x.png")


def test_fmap_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(1)
    values = rng.random((17, 23))
    path = tmp_path / "field.fmap"
    write_fmap(FieldMap(values), path)
    once = read_fmap(path)
    # float32 storage: one write/read cycle is lossy at most once
    assert np.array_equal(once.values, values.astype(np.float32).astype(np.float64))
    # and value-exact from then on
    write_fmap(once, path)
    twice = read_fmap(path)
    assert np.array_equal(twice.values, once.values)


def test_fmap_header_layout(tmp_path):
    path = tmp_path / "tiny.fmap"
    write_fmap(FieldMap(np.array([[0.5, 1.0]])), path)
    data = path.read_bytes()
    assert data[:4] == b"FMAP"
    assert int.from_bytes(data[4:8], "little") == 2
    assert int.from_bytes(data[8:12], "little") == 1
    assert len(data) == 12 + 2 * 4


def test_fmap_bad_magic(tmp_path):
    path = tmp_path / "bad.fmap"
    path.write_bytes(b"JUNK" + b"\x00" * 16)
    with pytest.raises(ValueError, match="bad magic"):
        read_fmap(path)


def test_fmap_truncated(tmp_path):
    path = tmp_path / "short.fmap"
    write_fmap(FieldMap(np.ones((4, 4))), path)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(ValueError, match="truncated"):
        read_fmap(path)


def test_gray_png_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    arr = rng.integers(0, 256, size=(9, 13)).astype(np.uint8)
    path = tmp_path / "g.png"
    write_gray_png(arr, path)
    assert np.array_equal(read_gray_png(path), arr)


def test_field_png_scaling(tmp_path):
    field = FieldMap(np.array([[0.0, 0.5, 1.0, 2.0, -1.0]]))
    path = tmp_path / "viz.png"
    write_field_png(field, path)
    assert list(read_gray_png(path)[0]) == [0, 128, 255, 255, 0]


def test_label_viz_distinct_colors(tmp_path):
    arr = np.array([[0, 1], [2, 3]], dtype=np.int32)
    path = tmp_path / "viz.png"
    write_label_viz_png(LabelImage(arr), path)
    from PIL import Image

    rgb = np.asarray(Image.open(path))
    assert rgb.shape == (2, 2, 3)
    assert (rgb[0, 0] == 0).all()  # background black
    colors = {tuple(rgb[y, x]) for y, x in [(0, 1), (1, 0), (1, 1)]}
    assert len(colors) == 3


def test_deterministic_bytes(tmp_path):
    arr = np.arange(64, dtype=np.int32).reshape(8, 8) % 5
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    write_label_png(LabelImage(arr), a)
    write_label_png(LabelImage(arr), b)
    assert a.read_bytes() == b.read_bytes()
    fa, fb = tmp_path / "a.fmap", tmp_path / "b.fmap"
    write_fmap(FieldMap(arr / 5.0), fa)
    write_fmap(FieldMap(arr / 5.0), fb)
    assert fa.read_bytes() == fb.read_bytes()
