"""Where convolution features live in the state vector.

Indexing conventions follow the published formulas so they can be checked by
eye: feature ``j``, channel ``c``, kernel element ``l`` and gate position
``i`` are all 1-based, and ``i = 1`` puts the gate on the least significant
qubits. Functions whose name ends in ``_index`` say in their docstring which
origin they return.

Single layer (gate on qubits ``i-1 .. i+n-2``, 0-based)::

    F[j, c] = sum_l u[c, l] * alpha[s(j, l)]
    s(j, l) = (2^n - 1) * 2^(i-1) * floor((j-1) / 2^(i-1)) + j + (l-1) * 2^(i-1)

``k`` stacked layers (gate ``t`` on qubits ``(t-1)n .. tn-1``): ``F[j, c]`` is
the amplitude of basis state ``2^(nk) (j-1) + 2^(n(k-1)) (c-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import StateVector


@dataclass(frozen=True)
class ConvLayout:
    """Geometry of ``k`` stacked ``n``-qubit gates on ``m`` data qubits, first gate at position ``i``."""

    n: int
    i: int = 1
    k: int = 1
    m: int = 10

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be positive")
        if not 1 <= self.i <= self.m:
            raise ValueError(f"position i={self.i} outside 1..{self.m}")
        if self.i + self.n - 1 > self.m:
            raise ValueError(f"{self.n}-qubit gate at position {self.i} overruns {self.m} qubits")
        if self.n * self.k > self.m:
            raise ValueError(f"{self.k} layers of {self.n}-qubit gates need more than {self.m} qubits")
        if self.k > 1 and self.i != 1:
            raise ValueError("stacked layers start at the least significant qubit (i=1)")

    @property
    def channels(self) -> int:
        return 2 ** self.n

    kernel_size = stride = channels

    @property
    def features_per_channel(self) -> int:
        return 2 ** (self.m - self.n * self.k)

    def gate_targets(self, layer: int = 1) -> tuple[int, ...]:
        """0-based qubits of the ``layer``-th gate (1-based layer)."""
        start = self.i - 1 + (layer - 1) * self.n
        return tuple(range(start, start + self.n))


@dataclass
class FeatureTensor:
    values: np.ndarray  # [channel][feature], 0-based storage
    layout: ConvLayout

    def __post_init__(self):
        want = (self.layout.channels, self.layout.features_per_channel)
        if self.values.shape != want:
            raise ValueError(f"feature array {self.values.shape} does not match layout {want}")

    def __getitem__(self, jc):
        """1-based access: ``ft[j, c]`` is feature ``j`` of channel ``c``."""
        j, c = jc
        return self.values[c - 1, j - 1]


def _check_range(name, value, hi):
    v = np.asarray(value)
    if np.any(v < 1) or np.any(v > hi):
        raise ValueError(f"{name}={value} outside 1..{hi}")


def theorem1_source_index(layout: ConvLayout, j, l):
    """1-based amplitude index ``s`` feeding kernel element ``l`` of feature ``j``.

    Works elementwise on integer arrays.
    """
    if layout.k != 1:
        raise ValueError("single-layer formula needs k=1")
    n, i = layout.n, layout.i
    _check_range("j", j, 2 ** (layout.m - n))
    _check_range("l", l, 2 ** n)
    j = np.asarray(j)
    l = np.asarray(l)
    step = 2 ** (i - 1)
    s = (2 ** n - 1) * step * ((j - 1) // step) + j + (l - 1) * step
    return int(s) if s.ndim == 0 else s


def theorem1_output_index(layout: ConvLayout, j, c):
    """0-based basis index holding ``F[j, c]`` after the gate.

    The gate writes channel ``c`` into the slot that kernel element ``l = c``
    was read from.
    """
    s = theorem1_source_index(layout, j, c)
    return s - 1


def source_index_table(layout: ConvLayout) -> np.ndarray:
    """0-based ``[j-1, l-1]`` table of source amplitudes for every feature."""
    j = np.arange(1, 2 ** (layout.m - layout.n) + 1)[:, None]
    l = np.arange(1, 2 ** layout.n + 1)[None, :]
    return theorem1_source_index(layout, j, l) - 1


def theorem1_feature(state: StateVector, bank: np.ndarray, layout: ConvLayout, j: int, c: int):
    """``F[j, c]`` from the input amplitudes and the bank alone (no gate simulation)."""
    _check_range("c", c, 2 ** layout.n)
    alpha = state.amplitudes
    ls = np.arange(1, 2 ** layout.n + 1)
    s = theorem1_source_index(layout, j, ls) - 1
    return np.dot(np.asarray(bank)[c - 1], alpha[s])


def theorem1_features(state: StateVector, bank: np.ndarray, layout: ConvLayout) -> FeatureTensor:
    """All ``F[j, c]`` at once, shape ``[channel][feature]``."""
    if state.num_qubits != layout.m:
        raise ValueError(f"state has {state.num_qubits} qubits, layout expects {layout.m}")
    table = source_index_table(layout)
    values = np.asarray(bank) @ state.amplitudes[table].T
    return FeatureTensor(values, layout)


def theorem2_output_index(layout: ConvLayout, j, c):
    """Basis index of ``F[j, c]`` after ``k`` stacked layers (already 0-based)."""
    n, k = layout.n, layout.k
    if layout.i != 1:
        raise ValueError("stacked-layer formula assumes the first gate at i=1")
    _check_range("j", j, 2 ** (layout.m - n) // 2 ** (n * (k - 1)))
    _check_range("c", c, 2 ** n)
    j = np.asarray(j)
    c = np.asarray(c)
    idx = 2 ** n * 2 ** (n * (k - 1)) * (j - 1) + 2 ** (n * (k - 1)) * (c - 1)
    return int(idx) if idx.ndim == 0 else idx


def output_index_table(layout: ConvLayout) -> np.ndarray:
    """0-based basis indices, shape ``[channel][feature]``."""
    c = np.arange(1, layout.channels + 1)[:, None]
    j = np.arange(1, layout.features_per_channel + 1)[None, :]
    return theorem2_output_index(layout, j, c)


def extract_features(source, layout: ConvLayout, probabilities: bool = False) -> FeatureTensor:
    """Read ``F[j, c]`` out of a state (or a plain amplitude/probability vector).

    With ``probabilities=True`` a :class:`StateVector` is read as ``|amp|^2``;
    a plain array is read as-is either way.
    """
    if isinstance(source, StateVector):
        values = source.amplitudes
        if probabilities:
            values = np.abs(values) ** 2
    else:
        values = np.asarray(source)
    if values.shape != (2 ** layout.m,):
        raise ValueError(f"expected {2 ** layout.m} entries, got shape {values.shape}")
    return FeatureTensor(values[output_index_table(layout)], layout)
