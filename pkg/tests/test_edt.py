import numpy as np

from fieldseg.edt import edt_field_map, squared_edt
from fieldseg.grid import LabelImage, extract_regions, relabel_connected


def brute_force_d2(sites):
    """O(N^2) nearest-site search (test oracle)."""
    sites = np.asarray(sites, dtype=bool)
    h, w = sites.shape
    sy, sx = np.nonzero(sites)
    out = np.full((h, w), np.int64(1) << 40)
    if sy.size == 0:
        return out
    yy, xx = np.mgrid[0:h, 0:w]
    for y in range(h):
        dy2 = (sy.astype(np.int64) - y) ** 2
        dx2 = (sx.astype(np.int64)[None, :] - xx[y][:, None].astype(np.int64)) ** 2
        out[y] = (dx2 + dy2[None, :]).min(axis=1)
    return out


def test_squared_edt_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(25):
        sites = rng.random((rng.integers(2, 20), rng.integers(2, 20))) < 0.15
        if not sites.any():
            sites[0, 0] = True
        assert np.array_equal(squared_edt(sites), brute_force_d2(sites))


def test_squared_edt_no_sites_sentinel():
    out = squared_edt(np.zeros((3, 3), dtype=bool))
    assert (out >= (1 << 40)).all()


def test_field_single_pixel_cell():
    arr = np.zeros((3, 3), dtype=np.int32)
    arr[1, 1] = 1
    field = edt_field_map(LabelImage(arr))
    assert field.values[1, 1] == 1.0
    assert field.values.sum() == 1.0


def test_field_3x3_square():
    arr = np.zeros((5, 5), dtype=np.int32)
    arr[1:4, 1:4] = 1
    field = edt_field_map(LabelImage(arr))
    assert field.values[2, 2] == 1.0  # raw distance 2, normalized
    perimeter = [field.values[1, 1], field.values[1, 2], field.values[3, 3]]
    assert perimeter == [0.5, 0.5, 0.5]  # raw distance 1


def test_field_all_background():
    field = edt_field_map(LabelImage(np.zeros((4, 7), dtype=np.int32)))
    assert (field.values == 0.0).all()


def test_field_matches_brute_force_whole_image():
    rng = np.random.default_rng(12)
    mask = rng.random((40, 64)) < 0.3
    img = relabel_connected(mask, 4)
    field = edt_field_map(img)
    for region in extract_regions(img):
        # oracle: exact distances to anything that is not this instance,
        # out-of-image pixels included (they are outside every cell)
        outside = np.pad(img.labels != region.instance_id, 1, constant_values=True)
        d = np.sqrt(brute_force_d2(outside).astype(np.float64))
        expected = d[region.pixels[:, 1] + 1, region.pixels[:, 0] + 1]
        expected /= expected.max()
        got = field.values[region.pixels[:, 1], region.pixels[:, 0]]
        assert np.array_equal(got, expected)


def test_touching_cells_share_valley():
    # two touching squares: EDT must drop to the minimum at the shared edge
    arr = np.zeros((7, 12), dtype=np.int32)
    arr[1:6, 1:6] = 1
    arr[1:6, 6:11] = 2
    field = edt_field_map(LabelImage(arr))
    assert field.values[3, 5] == field.values[3, 1]  # contact column == outer rim
    assert field.values[3, 5] < field.values[3, 3]


def test_lipschitz_before_normalization():
    rng = np.random.default_rng(8)
    mask = rng.random((30, 30)) < 0.4
    sites = ~mask
    if not sites.any():
        sites[0, 0] = True
    d = np.sqrt(squared_edt(sites).astype(np.float64))
    assert np.abs(np.diff(d, axis=0)).max() <= 1.0 + 1e-12
    assert np.abs(np.diff(d, axis=1)).max() <= 1.0 + 1e-12


def symmetries(arr):
    yield from (
        arr,
        np.rot90(arr, 1),
        np.rot90(arr, 2),
        np.rot90(arr, 3),
        np.fliplr(arr),
        np.flipud(arr),
        arr.T,
        np.rot90(arr.T, 2),
    )


def test_exact_equivariance():
    rng = np.random.default_rng(10)
    mask = rng.random((11, 17)) < 0.35
    base = relabel_connected(mask, 4).labels
    reference = edt_field_map(LabelImage(base)).values
    for sym_labels, sym_field in zip(symmetries(base), symmetries(reference)):
        transformed = edt_field_map(LabelImage(np.ascontiguousarray(sym_labels)))
        assert np.array_equal(transformed.values, sym_field)


def test_per_cell_max_exactly_one():
    rng = np.random.default_rng(14)
    mask = rng.random((25, 25)) < 0.35
    img = relabel_connected(mask, 4)
    field = edt_field_map(img)
    for region in extract_regions(img):
        assert field.values[region.pixels[:, 1], region.pixels[:, 0]].max() == 1.0
