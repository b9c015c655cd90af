import gzip
import struct

import numpy as np
import pytest

from qconv.mnist import (Dataset, IdxFormatError, idx_images_bytes, idx_labels_bytes, load_mnist,
                         parse_idx_images, parse_idx_labels, read_idx_images, read_idx_labels, subset,
                         write_idx_images)


def _image_file(count, rows, cols, payload, magic=0x803):
    return struct.pack(">IIII", magic, count, rows, cols) + bytes(payload)


def _label_file(labels, magic=0x801):
    return struct.pack(">II", magic, len(labels)) + bytes(labels)


def test_parse_image_fixture():
    images = parse_idx_images(_image_file(1, 2, 2, [1, 2, 3, 4]))
    assert images.shape == (1, 2, 2) and images[0].tolist() == [[1, 2], [3, 4]]
    assert images.dtype == np.uint8


def test_parse_label_fixture():
    assert parse_idx_labels(_label_file([7, 2])).tolist() == [7, 2]


def test_wrong_magic():
    with pytest.raises(IdxFormatError, match="not an image file"):
        parse_idx_images(_image_file(1, 2, 2, [1, 2, 3, 4], magic=0x801))
    with pytest.raises(IdxFormatError, match="not a label file"):
        parse_idx_labels(_label_file([1], magic=0x803))


def test_label_out_of_range():
    with pytest.raises(IdxFormatError, match="label out of range"):
        parse_idx_labels(_label_file([3, 11]))


@pytest.mark.parametrize("raw", [_image_file(2, 2, 2, [1, 2, 3, 4]), b"\x00\x00\x08"])
def test_truncated(raw):
    with pytest.raises(IdxFormatError, match="truncated"):
        parse_idx_images(raw)


def test_trailing_bytes_rejected():
    with pytest.raises(IdxFormatError):
        parse_idx_images(_image_file(1, 2, 2, [1, 2, 3, 4, 5]))
    with pytest.raises(IdxFormatError):
        parse_idx_labels(_label_file([1, 2]) + b"\x00")


def test_gzip_and_plain_round_trip(tmp_path, rng):
    images = rng.integers(0, 256, size=(5, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, size=5)
    raw = idx_images_bytes(images)
    (tmp_path / "a").write_bytes(raw)
    (tmp_path / "a.gz").write_bytes(gzip.compress(raw))
    assert np.array_equal(read_idx_images(tmp_path / "a"), images)
    assert np.array_equal(read_idx_images(tmp_path / "a.gz"), images)
    # parse then serialise reproduces the bytes exactly
    assert idx_images_bytes(parse_idx_images(raw)) == raw
    lraw = idx_labels_bytes(labels)
    assert idx_labels_bytes(parse_idx_labels(lraw)) == lraw
    (tmp_path / "l").write_bytes(lraw)
    assert np.array_equal(read_idx_labels(tmp_path / "l"), labels)


def test_gzip_writes_are_reproducible(tmp_path, rng):
    images = rng.integers(0, 256, size=(3, 28, 28), dtype=np.uint8)
    write_idx_images(tmp_path / "x.gz", images)
    first = (tmp_path / "x.gz").read_bytes()
    write_idx_images(tmp_path / "x.gz", images)
    assert (tmp_path / "x.gz").read_bytes() == first


def test_load_from_env(synthetic_idx, monkeypatch):
    monkeypatch.setenv("QCONV_DATA_DIR", str(synthetic_idx))
    data = load_mnist()
    assert len(data) == 120 and data.counts() == {**{d: 30 for d in range(4)},
                                                  **{d: 0 for d in range(4, 10)}}


def test_load_missing(tmp_path, monkeypatch):
    monkeypatch.delenv("QCONV_DATA_DIR", raising=False)
    with pytest.raises(FileNotFoundError):
        load_mnist()
    with pytest.raises(FileNotFoundError):
        load_mnist(tmp_path)
    with pytest.raises(FileNotFoundError):
        load_mnist(tmp_path / "nope")


def test_subset_remap_and_disjoint(synthetic_idx):
    data = load_mnist(synthetic_idx)
    train, test = subset(data, (3, 1), 10, 5, seed=9)
    assert train.classes == (1, 3)
    assert set(train.remapped.tolist()) == {0, 1}
    assert np.array_equal(train.remapped, (train.labels == 3).astype(int))
    assert train.counts() == {1: 10, 3: 10} and test.counts() == {1: 5, 3: 5}
    assert not set(train.indices.tolist()) & set(test.indices.tolist())
    assert np.array_equal(data.images[train.indices], train.images)
    sample = test[0]
    assert sample.label in (1, 3) and sample.remapped_label == int(sample.label == 3)


def test_subset_determinism(synthetic_idx):
    data = load_mnist(synthetic_idx)
    a = subset(data, (0, 1), 8, 4, seed=2)
    b = subset(data, (0, 1), 8, 4, seed=2)
    c = subset(data, (0, 1), 8, 4, seed=3)
    assert np.array_equal(a[0].indices, b[0].indices) and np.array_equal(a[1].indices, b[1].indices)
    assert not np.array_equal(a[0].indices, c[0].indices)


def test_subset_errors(synthetic_idx):
    data = load_mnist(synthetic_idx)
    with pytest.raises(ValueError, match="requested"):
        subset(data, (0, 1), 25, 10, seed=0)
    with pytest.raises(ValueError):
        subset(data, (1, 1), 2, 2, seed=0)


def test_remap_examples():
    imgs = np.zeros((2, 28, 28))
    assert Dataset(imgs, [0, 1], (0, 1)).remapped.tolist() == [0, 1]
    assert Dataset(imgs, [8, 3], (3, 8)).remapped.tolist() == [1, 0]
    with pytest.raises(ValueError):
        Dataset(imgs, [8, 4], (3, 8))


def test_real_files_consistent(mnist_location):
    directory, prefix = mnist_location
    data = load_mnist(directory, prefix)
    assert data.images.shape[1:] == (28, 28)
    assert len(data.images) == len(data.labels)
    if prefix == "train":
        assert len(data) == 60000
    assert set(np.unique(data.labels).tolist()) == set(range(10))
