"""Slow, dense classical references for the quantum convolution claims.

Everything here is written directly from the definitions (explicit loops,
Kronecker products, full ``2^m x 2^m`` matrices) and shares no code with the
stride-based simulator, so the two can be checked against each other.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import ortho_group, unitary_group

from .statevector import GateApplication

MAX_ORACLE_QUBITS = 12


def cross_correlate(image: np.ndarray, kernel: np.ndarray, stride: int = 1) -> np.ndarray:
    """``y[i, j] = sum_uv w[u, v] * x[i*stride + u, j*stride + v]`` (valid positions only)."""
    x = np.asarray(image)
    w = np.asarray(kernel)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    (M, N), (U, V) = x.shape, w.shape
    if U > M or V > N:
        raise ValueError(f"{U}x{V} kernel does not fit a {M}x{N} image")
    rows = (M - U) // stride + 1
    cols = (N - V) // stride + 1
    out = np.zeros((rows, cols), dtype=np.result_type(x, w))
    for i in range(rows):
        for j in range(cols):
            field = x[i * stride:i * stride + U, j * stride:j * stride + V]
            out[i, j] = np.sum(w * field)
    return out


def block_diag_apply(bank: np.ndarray, x_concat: np.ndarray) -> np.ndarray:
    """``(I_N kron bank) @ x`` with the block-diagonal matrix built explicitly."""
    bank = np.asarray(bank)
    x = np.asarray(x_concat)
    d = bank.shape[1]
    if x.ndim != 1 or x.size % d:
        raise ValueError(f"length {x.size} is not a multiple of the block size {d}")
    full = np.kron(np.eye(x.size // d), bank)
    return full @ x


def dilate_kernel(w: np.ndarray, slot: int, N1: int) -> np.ndarray:
    """``w kron e`` where ``e`` is the one-hot row of length ``N1`` at ``slot``."""
    if N1 < 1 or N1 & (N1 - 1):
        raise ValueError(f"N1={N1} is not a power of two")
    if not 0 <= slot < N1:
        raise ValueError(f"slot {slot} out of range for N1={N1}")
    e = np.zeros(N1)
    e[slot] = 1.0
    return np.kron(np.asarray(w), e)


def dilated_bank(bank: np.ndarray, N1: int) -> np.ndarray:
    """Stack every dilated kernel row; row ``c*N1 + slot`` is ``dilate_kernel(bank[c], slot, N1)``."""
    bank = np.asarray(bank)
    return np.array([dilate_kernel(row, slot, N1) for row in bank for slot in range(N1)])


def composite_kernel(w2: np.ndarray, w1: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(w2), np.asarray(w1))


def embed_full_matrix(gate: GateApplication, m: int) -> np.ndarray:
    """The full ``2^m x 2^m`` controlled, embedded unitary, one column per basis state."""
    if m > MAX_ORACLE_QUBITS:
        raise ValueError(f"oracle capped at {MAX_ORACLE_QUBITS} qubits")
    if any(q >= m for q in gate.qubits):
        raise ValueError(f"gate qubits {gate.qubits} out of range for {m} qubits")
    U = gate.unitary
    targets = gate.targets
    dim = 2 ** m
    full = np.zeros((dim, dim), dtype=np.result_type(U, np.complex128))
    target_mask = sum(1 << t for t in targets)
    for col in range(dim):
        if any((col >> q) & 1 != bit for q, bit in gate.controls):
            full[col, col] = 1.0
            continue
        local_in = sum(((col >> t) & 1) << r for r, t in enumerate(targets))
        base = col & ~target_mask
        for local_out in range(len(U)):
            row = base | sum(((local_out >> r) & 1) << t for r, t in enumerate(targets))
            full[row, col] = U[local_out, local_in]
    return full


def gram_error(bank: np.ndarray) -> float:
    """``max |bank bank^dag - I|``: how far the kernel rows are from orthonormal."""
    bank = np.asarray(bank)
    return float(np.abs(bank @ bank.conj().T - np.eye(len(bank))).max())


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng.random((1, 1)))
    return unitary_group.rvs(dim, random_state=rng)


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(dim, random_state=rng)


def random_state(m: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    v = rng.normal(size=2 ** m)
    if not real:
        v = v + 1j * rng.normal(size=2 ** m)
    return v / np.linalg.norm(v)
