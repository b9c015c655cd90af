import numpy as np
import pytest

from qconv import oracle
from qconv.encoding import PatchEncoding, patch_flatten
from qconv.statevector import GateApplication


def test_cross_correlate_sum():
    assert oracle.cross_correlate(np.array([[1, 2], [3, 4]]), np.ones((2, 2)), 2).tolist() == [[10]]


def test_cross_correlate_top_left(rng):
    img = rng.random((6, 6))
    out = oracle.cross_correlate(img, np.array([[1, 0], [0, 0]]), 2)
    assert np.array_equal(out, img[::2, ::2])


def test_cross_correlate_against_einsum(rng):
    img, w = rng.random((8, 8)), rng.random((2, 2))
    windows = np.lib.stride_tricks.sliding_window_view(img, (2, 2))[::2, ::2]
    assert np.allclose(oracle.cross_correlate(img, w, 2), np.einsum("ijuv,uv->ij", windows, w))


def test_cross_correlate_stride1(rng):
    img, w = rng.random((5, 4)), rng.random((2, 3))
    out = oracle.cross_correlate(img, w, 1)
    assert out.shape == (4, 2)
    assert np.isclose(out[3, 1], np.sum(img[3:5, 1:4] * w))


def test_cross_correlate_errors():
    with pytest.raises(ValueError):
        oracle.cross_correlate(np.ones((2, 2)), np.ones((3, 3)))
    with pytest.raises(ValueError):
        oracle.cross_correlate(np.ones((4, 4)), np.ones((2, 2)), 0)


def test_block_diag_identity_and_single(rng):
    x = rng.random(8)
    assert np.array_equal(oracle.block_diag_apply(np.eye(4), x), x)
    bank = rng.random((4, 4))
    assert np.allclose(oracle.block_diag_apply(bank, x[:4]), bank @ x[:4])


def test_block_diag_per_block(rng):
    bank, x = oracle.random_orthogonal(4, rng), rng.random(16)
    expected = np.concatenate([bank @ x[4 * b:4 * b + 4] for b in range(4)])
    assert np.allclose(oracle.block_diag_apply(bank, x), expected)
    with pytest.raises(ValueError):
        oracle.block_diag_apply(bank, x[:6])


def test_dilate_kernel():
    w = np.array([1.0, 2, 3, 4])
    assert np.array_equal(oracle.dilate_kernel(w, 0, 1), w)
    assert oracle.dilate_kernel(w, 0, 2).tolist() == [1, 0, 2, 0, 3, 0, 4, 0]
    assert oracle.dilate_kernel(w, 1, 2).tolist() == [0, 1, 0, 2, 0, 3, 0, 4]
    with pytest.raises(ValueError):
        oracle.dilate_kernel(w, 2, 2)
    with pytest.raises(ValueError):
        oracle.dilate_kernel(w, 0, 3)


def test_dilated_bank_is_kron_with_identity(rng):
    bank = oracle.random_orthogonal(4, rng)
    for N1 in (1, 2, 4):
        assert np.array_equal(oracle.dilated_bank(bank, N1), np.kron(bank, np.eye(N1)))


def test_composite_kernel():
    assert oracle.composite_kernel([1, 0], [2, 3]).tolist() == [2, 3, 0, 0]
    assert oracle.composite_kernel([0, 1], [1, 0]).tolist() == [0, 0, 1, 0]


def test_composite_kernel_elementwise(rng):
    u = oracle.random_orthogonal(4, rng)
    w2, w1 = u[0], u[1]
    got = oracle.composite_kernel(w2, w1)
    for a in range(4):
        for b in range(4):
            assert got[4 * a + b] == w2[a] * w1[b]


def test_embed_block_diagonal(rng):
    U = oracle.random_unitary(4, rng)
    full = oracle.embed_full_matrix(GateApplication(U, (0, 1)), 3)
    assert np.allclose(full, np.block([[U, np.zeros((4, 4))], [np.zeros((4, 4)), U]]))


def test_embed_high_targets(rng):
    U = oracle.random_unitary(4, rng)
    full = oracle.embed_full_matrix(GateApplication(U, (2, 3)), 4)
    assert np.allclose(full, np.kron(U, np.eye(4)))


def test_embed_cnot():
    X = np.array([[0, 1], [1, 0]])
    full = oracle.embed_full_matrix(GateApplication(X, (0,), ((1, 1),)), 2)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.array_equal(full.real, cnot)


def test_embed_cap():
    with pytest.raises(ValueError):
        oracle.embed_full_matrix(GateApplication(np.eye(2), (0,)), 13)


def test_classical_conv_equals_block_diag_rows(rng):
    """Stride-4 cross-correlation per channel == rows of the block-diagonal product."""
    img = rng.random((32, 32))
    bank = oracle.random_orthogonal(16, rng)
    y = oracle.block_diag_apply(bank, patch_flatten(img, PatchEncoding())).reshape(64, 16)
    for c in range(16):
        ref = oracle.cross_correlate(img, bank[c].reshape(4, 4), 4).ravel()
        assert np.abs(y[:, c] - ref).max() <= 1e-12


def test_gram_error(rng):
    assert oracle.gram_error(oracle.random_unitary(8, rng)) <= 1e-10
    assert oracle.gram_error(oracle.random_orthogonal(1, rng)) == 0
    assert oracle.gram_error(2 * np.eye(3)) == pytest.approx(3.0)
