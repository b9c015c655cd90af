"""Rebuild IDX files from the digits bundled in the npm ``mnist`` package.

The package ships ~10k MNIST digits as per-class JSON arrays of pixel values
``round(byte / 255, 3)``. Distinct bytes stay distinct under that rounding,
so ``round(v * 255)`` recovers the original bytes exactly.

Usage::

    npm pack mnist            # produces mnist-1.1.0.tgz
    python scripts/mnist_from_npm.py mnist-1.1.0.tgz data/mnist

Writes ``npm10k-images-idx3-ubyte.gz`` and ``npm10k-labels-idx1-ubyte.gz``
(samples ordered by digit, then by position in the package).
"""

import argparse
import json
import sys
import tarfile
from pathlib import Path

import numpy as np

from qconv.mnist import write_idx_images, write_idx_labels


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tarball", help="npm mnist package tarball")
    ap.add_argument("out_dir")
    ap.add_argument("--prefix", default="npm10k")
    args = ap.parse_args(argv)

    images, labels = [], []
    with tarfile.open(args.tarball) as tar:
        for digit in range(10):
            member = tar.extractfile(f"package/src/digits/{digit}.json")
            values = np.asarray(json.load(member)["data"], dtype=np.float64)
            pixels = np.rint(values * 255.0)
            if np.abs(pixels / 255.0 - values).max() > 5e-4 + 1e-12:
                sys.exit(f"digit {digit}: values are not 3-decimal byte/255 fractions")
            block = pixels.astype(np.uint8).reshape(-1, 28, 28)
            images.append(block)
            labels.append(np.full(len(block), digit, dtype=np.uint8))

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx_images(out / f"{args.prefix}-images-idx3-ubyte.gz", np.concatenate(images))
    write_idx_labels(out / f"{args.prefix}-labels-idx1-ubyte.gz", np.concatenate(labels))
    print(f"wrote {sum(len(b) for b in images)} samples to {out}")


if __name__ == "__main__":
    main()
