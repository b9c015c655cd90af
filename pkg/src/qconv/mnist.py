"""Reader/writer for MNIST IDX containers and class-subset datasets.

IDX layout (big-endian)::

    images: u32 magic=0x00000803 | u32 count | u32 rows | u32 cols | u8[count*rows*cols]
    labels: u32 magic=0x00000801 | u32 count | u8[count]

Files ending in ``.gz`` (or starting with the gzip magic) are decompressed
transparently.
"""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
DATA_DIR_ENV = "QCONV_DATA_DIR"


class IdxFormatError(ValueError):
    pass


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _header(raw: bytes, nfields: int, path) -> tuple[int, ...]:
    size = 4 * nfields
    if len(raw) < size:
        raise IdxFormatError(f"{path}: truncated header")
    return struct.unpack(f">{nfields}I", raw[:size])


def parse_idx_images(raw: bytes, path="<bytes>") -> np.ndarray:
    magic, = _header(raw, 1, path)
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(f"{path}: not an image file (magic 0x{magic:08x})")
    _, count, rows, cols = _header(raw, 4, path)
    body = raw[16:]
    expected = count * rows * cols
    if len(body) < expected:
        raise IdxFormatError(f"{path}: truncated file ({len(body)} of {expected} pixel bytes)")
    if len(body) > expected:
        raise IdxFormatError(f"{path}: dimension mismatch ({len(body) - expected} trailing bytes)")
    return np.frombuffer(body, dtype=np.uint8).reshape(count, rows, cols).copy()


def parse_idx_labels(raw: bytes, path="<bytes>") -> np.ndarray:
    magic, = _header(raw, 1, path)
    if magic != LABEL_MAGIC:
        raise IdxFormatError(f"{path}: not a label file (magic 0x{magic:08x})")
    _, count = _header(raw, 2, path)
    body = raw[8:]
    if len(body) < count:
        raise IdxFormatError(f"{path}: truncated file ({len(body)} of {count} labels)")
    if len(body) > count:
        raise IdxFormatError(f"{path}: dimension mismatch ({len(body) - count} trailing bytes)")
    labels = np.frombuffer(body, dtype=np.uint8).copy()
    if labels.size and labels.max() > 9:
        raise IdxFormatError(f"{path}: label out of range ({int(labels.max())})")
    return labels


def read_idx_images(path) -> np.ndarray:
    """Return a ``(count, rows, cols)`` uint8 array."""
    return parse_idx_images(_read_bytes(path), path)


def read_idx_labels(path) -> np.ndarray:
    return parse_idx_labels(_read_bytes(path), path)


def idx_images_bytes(images: np.ndarray) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    return struct.pack(">4I", IMAGE_MAGIC, count, rows, cols) + images.tobytes()


def idx_labels_bytes(labels: np.ndarray) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">2I", LABEL_MAGIC, labels.size) + labels.tobytes()


def _write(path, payload: bytes) -> None:
    path = Path(path)
    if path.suffix == ".gz":
        # mtime pinned so repeated writes are byte-identical
        with open(path, "wb") as fh, gzip.GzipFile(fileobj=fh, mode="wb", mtime=0) as gz:
            gz.write(payload)
    else:
        path.write_bytes(payload)


def write_idx_images(path, images: np.ndarray) -> None:
    _write(path, idx_images_bytes(images))


def write_idx_labels(path, labels: np.ndarray) -> None:
    _write(path, idx_labels_bytes(labels))


@dataclass(frozen=True)
class Sample:
    image: np.ndarray
    label: int
    remapped_label: int


@dataclass
class Dataset:
    """Images with their digit labels.

    ``classes`` is the ordered digit subset; ``remapped`` holds each sample's
    0-based position within it. ``indices`` are row numbers in the source
    files, kept for provenance and disjointness checks.
    """

    images: np.ndarray
    labels: np.ndarray
    classes: tuple[int, ...] = tuple(range(10))
    indices: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.uint8)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.classes = tuple(int(c) for c in self.classes)
        if self.images.ndim != 3 or len(self.images) != len(self.labels):
            raise ValueError("images must be (N, rows, cols) with one label per image")
        if self.indices is None:
            self.indices = np.arange(len(self.labels))
        lookup = {c: r for r, c in enumerate(self.classes)}
        try:
            self.remapped = np.array([lookup[int(y)] for y in self.labels], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]} not in class subset {self.classes}") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.images[i], int(self.labels[i]), int(self.remapped[i]))

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.labels == c)) for c in self.classes}


def find_data_dir(data_dir=None) -> Path:
    if data_dir is None:
        data_dir = os.environ.get(DATA_DIR_ENV)
    if data_dir is None:
        raise FileNotFoundError(f"no MNIST directory given and ${DATA_DIR_ENV} is unset")
    path = Path(data_dir)
    if not path.is_dir():
        raise FileNotFoundError(f"MNIST directory {path} does not exist")
    return path


def _locate(directory: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz"):
        if (directory / name).exists():
            return directory / name
    raise FileNotFoundError(f"{stem}[.gz] not found in {directory}")


def load_mnist(data_dir=None, prefix: str = "train") -> Dataset:
    """Load ``{prefix}-images-idx3-ubyte`` and ``{prefix}-labels-idx1-ubyte``."""
    directory = find_data_dir(data_dir)
    img_path = _locate(directory, f"{prefix}-images-idx3-ubyte")
    lbl_path = _locate(directory, f"{prefix}-labels-idx1-ubyte")
    images = read_idx_images(img_path)
    labels = read_idx_labels(lbl_path)
    if len(images) != len(labels):
        raise IdxFormatError(f"{len(images)} images but {len(labels)} labels")
    return Dataset(images, labels, provenance={"images": str(img_path), "labels": str(lbl_path)})


def subset(dataset: Dataset, classes, per_class_train: int, per_class_test: int,
           seed: int) -> tuple[Dataset, Dataset]:
    """Seeded, disjoint per-class train/test draw.

    Labels are remapped to ``0..K-1`` in ascending digit order.
    """
    classes = tuple(sorted(int(c) for c in classes))
    if len(set(classes)) != len(classes) or not classes:
        raise ValueError(f"invalid class list {classes}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in classes:
        pool = np.flatnonzero(dataset.labels == c)
        need = per_class_train + per_class_test
        if len(pool) < need:
            raise ValueError(f"class {c}: {len(pool)} samples available, {need} requested")
        chosen = rng.permutation(pool)[:need]
        train_idx.append(np.sort(chosen[:per_class_train]))
        test_idx.append(np.sort(chosen[per_class_train:]))
    train_idx = np.concatenate(train_idx)
    test_idx = np.concatenate(test_idx)

    def take(idx, split):
        prov = dict(dataset.provenance, split=split, seed=seed, classes=list(classes))
        return Dataset(dataset.images[idx], dataset.labels[idx], classes,
                       dataset.indices[idx], prov)

    return take(train_idx, "train"), take(test_idx, "test")
