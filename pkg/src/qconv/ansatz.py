"""Layered rotation ansatz used for the trainable kernel banks.

Each layer applies one single-qubit rotation per qubit (axis chosen per layer)
followed by a fixed entangling pattern. The default, five layers of ``R_y``
with a CZ ring on four qubits, has 20 angles and only real matrix entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

import numpy as np

AXES = ("x", "y", "z")
ENTANGLERS = ("ring", "line", "none")
ENTANGLER_GATES = ("cz", "cnot")

_I2 = np.eye(2)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


ROTATIONS = {"x": rx, "y": ry, "z": rz}


def embed_1q(gate: np.ndarray, q: int, num_qubits: int) -> np.ndarray:
    # kron order: most significant qubit first
    ops = [gate if k == q else _I2 for k in reversed(range(num_qubits))]
    return reduce(np.kron, ops)


def cz_matrix(a: int, b: int, num_qubits: int) -> np.ndarray:
    idx = np.arange(2 ** num_qubits)
    sign = np.where(((idx >> a) & 1) & ((idx >> b) & 1), -1.0, 1.0)
    return np.diag(sign)


def cnot_matrix(control: int, target: int, num_qubits: int) -> np.ndarray:
    idx = np.arange(2 ** num_qubits)
    flipped = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    mat = np.zeros((len(idx), len(idx)))
    mat[flipped, idx] = 1.0
    return mat


@dataclass(frozen=True)
class AnsatzSpec:
    num_qubits: int = 4
    num_layers: int = 5
    entangler: str = "ring"
    entangler_gate: str = "cz"
    axes: tuple[str, ...] = field(default=("y",))

    def __post_init__(self):
        if self.num_qubits < 1 or self.num_layers < 0:
            raise ValueError("need at least one qubit and a non-negative layer count")
        axes = tuple(self.axes)
        if len(axes) == 1:
            axes = axes * self.num_layers
        if len(axes) != self.num_layers:
            raise ValueError(f"{len(axes)} axis tags for {self.num_layers} layers")
        bad = [a for a in axes if a not in AXES]
        if bad:
            raise ValueError(f"non-rotation gate axis {bad}; expected one of {AXES}")
        if self.entangler not in ENTANGLERS:
            raise ValueError(f"entangler must be one of {ENTANGLERS}")
        if self.entangler_gate not in ENTANGLER_GATES:
            raise ValueError(f"entangler_gate must be one of {ENTANGLER_GATES}")
        object.__setattr__(self, "axes", axes)

    @property
    def num_params(self) -> int:
        return self.num_layers * self.num_qubits

    def pairs(self) -> list[tuple[int, int]]:
        q = self.num_qubits
        if self.entangler == "none" or q < 2:
            return []
        line = [(a, a + 1) for a in range(q - 1)]
        if self.entangler == "ring" and q > 2:
            line.append((q - 1, 0))
        return line

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "num_layers": self.num_layers,
                "entangler": self.entangler, "entangler_gate": self.entangler_gate,
                "axes": list(self.axes)}

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzSpec":
        d = dict(d)
        if "axes" in d:
            d["axes"] = tuple(d["axes"])
        return cls(**d)


def _check_params(spec: AnsatzSpec, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (spec.num_params,):
        raise ValueError(f"expected {spec.num_params} angles, got shape {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ValueError("non-finite angle")
    return params


def entangler_matrix(spec: AnsatzSpec) -> np.ndarray:
    q = spec.num_qubits
    mat = np.eye(2 ** q)
    for a, b in spec.pairs():
        gate = cz_matrix(a, b, q) if spec.entangler_gate == "cz" else cnot_matrix(a, b, q)
        mat = gate @ mat
    return mat


def _layers(spec: AnsatzSpec, params: np.ndarray):
    """Per layer: the list of 1-qubit rotation matrices and their derivatives."""
    q = spec.num_qubits
    for layer, axis in enumerate(spec.axes):
        rot = ROTATIONS[axis]
        angles = params[layer * q:(layer + 1) * q]
        # d/dθ R(θ) = R(θ + π) / 2 for every Pauli rotation
        yield [rot(t) for t in angles], [rot(t + np.pi) / 2 for t in angles]


def _kron_layer(mats: list[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats[::-1])


def _result_dtype(spec: AnsatzSpec):
    real = all(a == "y" for a in spec.axes)
    return np.float64 if real else np.complex128


def build_unitary(spec: AnsatzSpec, params) -> np.ndarray:
    """``2^q x 2^q`` matrix of the whole ansatz; ``params[layer*q + qubit]``."""
    params = _check_params(spec, params)
    ent = entangler_matrix(spec)
    mat = np.eye(2 ** spec.num_qubits, dtype=_result_dtype(spec))
    for rots, _ in _layers(spec, params):
        mat = ent @ (_kron_layer(rots) @ mat)
    return mat


def unitary_jacobian(spec: AnsatzSpec, params) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(U, dU)`` with ``dU[t] = dU/dθ_t``, shape ``(P, 2^q, 2^q)``."""
    params = _check_params(spec, params)
    q = spec.num_qubits
    dim = 2 ** q
    ent = entangler_matrix(spec)
    layers = list(_layers(spec, params))
    full = [ent @ _kron_layer(rots) for rots, _ in layers]
    # prefix[L] = product of layers < L, suffix[L] = product of layers > L
    prefix = [np.eye(dim)]
    for f in full:
        prefix.append(f @ prefix[-1])
    suffix = [np.eye(dim)] * (len(full) + 1)
    for L in range(len(full) - 1, -1, -1):
        suffix[L] = suffix[L + 1] @ full[L]
    dU = np.zeros((spec.num_params, dim, dim), dtype=_result_dtype(spec))
    for L, (rots, drots) in enumerate(layers):
        for qb in range(q):
            mats = list(rots)
            mats[qb] = drots[qb]
            dU[L * q + qb] = suffix[L + 1] @ ent @ _kron_layer(mats) @ prefix[L]
    return prefix[-1].astype(dU.dtype), dU


def init_params(spec: AnsatzSpec, rng: np.random.Generator, count: int = 1) -> np.ndarray:
    """Uniform angles on ``(-π, π]``; ``count`` blocks concatenated."""
    return np.pi - rng.uniform(0.0, 2 * np.pi, size=count * spec.num_params)


def parameter_shift_grad(spec: AnsatzSpec, params, loss_fn: Callable[[np.ndarray], float],
                         shift: float = np.pi / 2) -> np.ndarray:
    """``g[t] = (loss(θ + π/2 e_t) - loss(θ - π/2 e_t)) / 2``.

    Exact when ``loss_fn`` is an expectation value (or any quantity linear in
    the output density matrix) of a circuit in which ``θ_t`` enters through a
    single Pauli rotation.
    """
    params = _check_params(spec, params)
    grad = np.zeros_like(params)
    for t in range(params.size):
        plus = params.copy()
        minus = params.copy()
        plus[t] += shift
        minus[t] -= shift
        grad[t] = 0.5 * (loss_fn(plus) - loss_fn(minus)) / np.sin(shift)
    return grad
