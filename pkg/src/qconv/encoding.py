"""Patch-rearranged amplitude encoding of images.

An image is cut into ``patch_h x patch_w`` tiles; each tile's pixels are laid
out contiguously (row-major inside the tile) and tiles follow each other in
row-major order across the image. With 2x2 tiles on a 4x4 raster numbered
1..16 this gives ``1,2,5,6, 3,4,7,8, 9,10,13,14, 11,12,15,16``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import StateVector

PAD_ANCHORS = ("center", "corner")


@dataclass(frozen=True)
class PatchEncoding:
    image_h: int = 32
    image_w: int = 32
    patch_h: int = 4
    patch_w: int = 4

    def __post_init__(self):
        if self.image_h % self.patch_h or self.image_w % self.patch_w:
            raise ValueError(f"{self.patch_h}x{self.patch_w} patches do not tile a "
                             f"{self.image_h}x{self.image_w} image")
        n = self.total_len
        if n & (n - 1):
            raise ValueError(f"{n} pixels is not a power of two")

    @property
    def patches_per_row(self) -> int:
        return self.image_w // self.patch_w

    @property
    def total_len(self) -> int:
        return self.image_h * self.image_w

    @property
    def num_qubits(self) -> int:
        return self.total_len.bit_length() - 1

    def _tiled_shape(self):
        return (self.image_h // self.patch_h, self.patch_h,
                self.image_w // self.patch_w, self.patch_w)


def pad_image(img: np.ndarray, anchor: str = "center", size: int = 32) -> np.ndarray:
    """Zero-pad a 28x28 image to ``size x size``.

    ``anchor="center"`` leaves an equal margin on every side;
    ``anchor="corner"`` keeps the image at the top-left.
    """
    img = np.asarray(img)
    if img.shape != (28, 28):
        raise ValueError(f"expected a 28x28 image, got {img.shape}")
    if anchor not in PAD_ANCHORS:
        raise ValueError(f"anchor must be one of {PAD_ANCHORS}")
    out = np.zeros((size, size), dtype=np.float64)
    off = (size - 28) // 2 if anchor == "center" else 0
    out[off:off + 28, off:off + 28] = img
    return out


def patch_flatten(img: np.ndarray, enc: PatchEncoding) -> np.ndarray:
    img = np.asarray(img)
    if img.shape != (enc.image_h, enc.image_w):
        raise ValueError(f"image shape {img.shape} does not match {enc}")
    return img.reshape(enc._tiled_shape()).transpose(0, 2, 1, 3).reshape(-1)


def patch_unflatten(vec: np.ndarray, enc: PatchEncoding) -> np.ndarray:
    """Inverse of :func:`patch_flatten`."""
    vec = np.asarray(vec)
    if vec.shape != (enc.total_len,):
        raise ValueError(f"vector of shape {vec.shape} does not match {enc}")
    ph, _, pw, _ = enc._tiled_shape()
    tiles = vec.reshape(ph, pw, enc.patch_h, enc.patch_w)
    return tiles.transpose(0, 2, 1, 3).reshape(enc.image_h, enc.image_w)


def amplitude_encode(vec: np.ndarray) -> StateVector:
    vec = np.asarray(vec, dtype=np.float64)
    n = vec.size
    if vec.ndim != 1 or n == 0 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("cannot amplitude-encode an all-zero vector")
    return StateVector(n.bit_length() - 1, vec / norm)


def encode_image(img: np.ndarray, patch: int = 4, anchor: str = "center") -> StateVector:
    """28x28 byte image -> 10-qubit state (pad, scale to [0, 1], tile, normalise)."""
    padded = pad_image(np.asarray(img, dtype=np.float64) / 255.0, anchor)
    enc = PatchEncoding(32, 32, patch, patch)
    return amplitude_encode(patch_flatten(padded, enc))


def encode_images(images: np.ndarray, patch: int = 4, anchor: str = "center") -> np.ndarray:
    """Vectorised :func:`encode_image` over a ``(N, 28, 28)`` stack; returns ``(N, 1024)``."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3 or images.shape[1:] != (28, 28):
        raise ValueError(f"expected (N, 28, 28) images, got {images.shape}")
    if anchor not in PAD_ANCHORS:
        raise ValueError(f"anchor must be one of {PAD_ANCHORS}")
    n = len(images)
    padded = np.zeros((n, 32, 32))
    off = 2 if anchor == "center" else 0
    padded[:, off:off + 28, off:off + 28] = images / 255.0
    tiles = padded.reshape(n, 32 // patch, patch, 32 // patch, patch).transpose(0, 1, 3, 2, 4)
    flat = tiles.reshape(n, 1024)
    norms = np.linalg.norm(flat, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError(f"all-zero image(s) at {np.flatnonzero(norms[:, 0] == 0).tolist()}")
    return flat / norms
