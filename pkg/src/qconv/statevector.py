"""Dense statevector simulation.

Bit convention: qubit ``q`` is bit ``q`` of the basis index (qubit 0 is the
least significant bit). All indices in this module are 0-based.

The array kernels (:func:`apply_matrix`, :func:`marginal`) accept amplitudes
with arbitrary leading batch dimensions so a whole minibatch of images can be
pushed through a circuit in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

UNITARY_ATOL = 1e-10


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes)
        if self.amplitudes.shape != (2 ** self.num_qubits,):
            raise ValueError(
                f"{self.num_qubits} qubits need {2 ** self.num_qubits} amplitudes, "
                f"got shape {self.amplitudes.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class GateApplication:
    """A ``2^n x 2^n`` unitary on ``targets`` gated by ``controls``.

    ``targets[0]`` is the least significant bit of the gate's local index.
    ``controls`` is a sequence of ``(qubit, required_bit)`` pairs.
    """

    unitary: np.ndarray
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = field(default=())
    name: str = ""

    def __post_init__(self):
        u = np.asarray(self.unitary)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls",
                           tuple((int(q), int(b)) for q, b in self.controls))
        n = len(self.targets)
        if n == 0:
            raise ValueError("gate needs at least one target")
        if u.shape != (2 ** n, 2 ** n):
            raise ValueError(f"{n} targets need a {2 ** n}x{2 ** n} matrix, got {u.shape}")
        if len(set(self.targets)) != n:
            raise ValueError(f"repeated target qubit in {self.targets}")
        cqubits = [q for q, _ in self.controls]
        if len(set(cqubits)) != len(cqubits):
            raise ValueError(f"repeated control qubit in {cqubits}")
        if set(cqubits) & set(self.targets):
            raise ValueError("control and target qubits overlap")
        if any(b not in (0, 1) for _, b in self.controls):
            raise ValueError("control bits must be 0 or 1")
        if min(self.targets + tuple(cqubits)) < 0:
            raise ValueError("negative qubit index")
        err = np.abs(u.conj().T @ u - np.eye(2 ** n)).max()
        if err > UNITARY_ATOL:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def dagger(self) -> "GateApplication":
        return GateApplication(self.unitary.conj().T, self.targets, self.controls, self.name)


def new_basis_state(m: int, index: int) -> StateVector:
    if m < 0:
        raise ValueError("negative qubit count")
    if not 0 <= index < 2 ** m:
        raise ValueError(f"basis index {index} out of range for {m} qubits")
    amps = np.zeros(2 ** m, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(m, amps)


def _axis(q: int, m: int) -> int:
    # reshape(2,)*m puts the most significant bit on axis 0
    return m - 1 - q


def apply_matrix(amps: np.ndarray, matrix: np.ndarray, targets: Sequence[int],
                 controls: Sequence[tuple[int, int]] = (), num_qubits: int | None = None,
                 out: np.ndarray | None = None) -> np.ndarray:
    """Apply ``matrix`` to ``targets`` of ``amps`` (shape ``(..., 2^m)``).

    Only the ``2^(m-n-len(controls))`` blocks selected by the controls are
    touched. ``matrix`` need not be unitary here; the adjoint sweep uses this
    to apply derivative matrices. Returns a new array unless ``out`` is given
    (``out`` may be ``amps`` itself for in-place update).
    """
    amps = np.asarray(amps)
    m = num_qubits if num_qubits is not None else int(np.log2(amps.shape[-1]))
    batch_shape = amps.shape[:-1]
    nb = len(batch_shape)
    dtype = np.result_type(amps, matrix)
    if out is None:
        out = amps.astype(dtype, copy=True)
    elif out is not amps:
        out[...] = amps
    tensor = out.reshape(batch_shape + (2,) * m)

    index = [slice(None)] * (nb + m)
    for q, bit in controls:
        index[nb + _axis(q, m)] = bit
    view = tensor[tuple(index)]  # basic indexing: a writable view

    # axes of `view` after the control axes have been dropped
    remaining = [a for a in range(m) if index[nb + a] == slice(None)]
    pos = {a: nb + k for k, a in enumerate(remaining)}
    n = len(targets)
    target_axes = [pos[_axis(t, m)] for t in reversed(targets)]
    gate = np.asarray(matrix).reshape((2,) * (2 * n))
    moved = np.tensordot(gate, view, axes=(list(range(n, 2 * n)), target_axes))
    view[...] = np.moveaxis(moved, list(range(n)), target_axes)
    return out


def block_outer(left: np.ndarray, right: np.ndarray, targets: Sequence[int],
                controls: Sequence[tuple[int, int]] = (), num_qubits: int | None = None
                ) -> np.ndarray:
    """``A[r, s] = sum conj(left[.., r]) * right[.., s]`` over all blocks a gate touches.

    Summation runs over batch entries and over every basis block selected by
    ``controls``; ``r``/``s`` are local gate indices. For ``psi_out = G psi_in``
    and a real loss with ``lam = dL/d conj(psi_out)``,
    ``dL/dθ = 2 Re sum(dM/dθ * block_outer(lam, psi_in, ...))``.
    """
    m = num_qubits if num_qubits is not None else int(np.log2(left.shape[-1]))
    nb = left.ndim - 1
    index = [slice(None)] * (nb + m)
    for q, bit in controls:
        index[nb + _axis(q, m)] = bit
    index = tuple(index)
    remaining = [a for a in range(m) if index[nb + a] == slice(None)]
    pos = {a: nb + k for k, a in enumerate(remaining)}
    target_axes = [pos[_axis(t, m)] for t in reversed(targets)]
    n = len(targets)

    def local(arr):
        view = arr.reshape(arr.shape[:-1] + (2,) * m)[index]
        view = np.moveaxis(view, target_axes, list(range(view.ndim - n, view.ndim)))
        return view.reshape(-1, 2 ** n)

    return local(left).conj().T @ local(right)


def apply_gate(state: StateVector, gate: GateApplication) -> StateVector:
    """Return the state after ``gate``; the input is left untouched."""
    m = state.num_qubits
    bad = [q for q in gate.qubits if q >= m]
    if bad:
        raise ValueError(f"qubit(s) {bad} out of range for a {m}-qubit state")
    amps = apply_matrix(state.amplitudes.astype(np.complex128), gate.unitary,
                        gate.targets, gate.controls, m)
    return StateVector(m, amps)


def run_circuit(state: StateVector, gates: Sequence[GateApplication]) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def marginal(probs: np.ndarray, kept_qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Marginalise ``probs`` (shape ``(..., 2^m)``) onto ``kept_qubits``.

    Entry ``b`` of the result has bit ``r`` equal to the value of
    ``kept_qubits[r]``.
    """
    kept = [int(q) for q in kept_qubits]
    m = num_qubits
    if len(set(kept)) != len(kept):
        raise ValueError(f"duplicate qubit in {kept}")
    if any(not 0 <= q < m for q in kept):
        raise ValueError(f"qubit out of range in {kept} for {m} qubits")
    probs = np.asarray(probs)
    batch_shape = probs.shape[:-1]
    nb = len(batch_shape)
    tensor = probs.reshape(batch_shape + (2,) * m)
    traced = tuple(nb + _axis(q, m) for q in range(m) if q not in kept)
    reduced = tensor.sum(axis=traced)
    # surviving axes are ordered by descending qubit; reorder to kept[::-1]
    survivors = sorted(kept, reverse=True)
    order = [nb + survivors.index(q) for q in reversed(kept)]
    reduced = np.transpose(reduced, list(range(nb)) + order)
    return reduced.reshape(batch_shape + (2 ** len(kept),))


def marginal_probabilities(state: StateVector, kept_qubits: Sequence[int]) -> np.ndarray:
    return marginal(probabilities(state), kept_qubits, state.num_qubits)
