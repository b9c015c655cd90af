import os
from pathlib import Path

import numpy as np
import pytest

from qconv.mnist import DATA_DIR_ENV, write_idx_images, write_idx_labels

REPO = Path(__file__).resolve().parents[1]
MNIST_PREFIXES = ("train", "npm10k", "t10k")

_acceptance_lines: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def find_mnist():
    """``(directory, prefix)`` of an available MNIST IDX pair, or ``None``."""
    candidates = [os.environ.get(DATA_DIR_ENV), REPO / "data" / "mnist"]
    prefixes = [os.environ["QCONV_MNIST_PREFIX"]] if "QCONV_MNIST_PREFIX" in os.environ else MNIST_PREFIXES
    for d in candidates:
        if not d or not Path(d).is_dir():
            continue
        for prefix in prefixes:
            for suffix in ("", ".gz"):
                if (Path(d) / f"{prefix}-images-idx3-ubyte{suffix}").exists():
                    return Path(d), prefix
    return None


@pytest.fixture(scope="session")
def mnist_location():
    loc = find_mnist()
    if loc is None:
        pytest.skip(f"no MNIST IDX files (set ${DATA_DIR_ENV} or run scripts/mnist_from_npm.py)")
    return loc


@pytest.fixture
def synthetic_idx(tmp_path):
    """A small fake MNIST directory: 30 noisy blobs per digit for digits 0-3."""
    gen = np.random.default_rng(5)
    images, labels = [], []
    yy, xx = np.mgrid[:28, :28]
    for digit in range(4):
        cy, cx = 7 + 4 * digit, 20 - 4 * digit
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / 18.0)
        for _ in range(30):
            img = 200 * blob + gen.integers(0, 30, size=(28, 28))
            images.append(np.clip(img, 0, 255).astype(np.uint8))
            labels.append(digit)
    write_idx_images(tmp_path / "train-images-idx3-ubyte.gz", np.array(images))
    write_idx_labels(tmp_path / "train-labels-idx1-ubyte.gz", np.array(labels))
    return tmp_path


@pytest.fixture
def acceptance_report():
    return _acceptance_lines.append


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
