"""Two-layer quantum convolutional classifier.

Register layout (0-based qubits)::

    0 .. D-1        data register (D = 10 for padded MNIST)
    D .. D+r-1      channel register
    D+r             layer register

Circuit, with kernel width ``n`` (4 in the experiments) and ``C`` channels
carried between the layers:

1. ``U`` on data qubits ``0..n-1``: first convolution. After it, the low
   ``n`` data bits of a basis index name the first-layer channel ``a``.
2. Channel tagging. ``C >= 2``: CNOT from data qubit ``b`` to channel qubit
   ``b`` for ``b < r = log2 C``. ``C = 1``: an X on the single channel
   qubit, which then serves as an unconditional flag.
3. Layer mark: X on the layer qubit, controlled on the data bits that single
   out the selected channels ``a < C`` (bits ``r..n-1`` equal to 0; for
   ``C = 1``, all ``n`` bits equal to 0, plus the flag).
4. For each selected channel ``c < C``: ``B`` on data qubits ``n..2n-1``
   controlled on the layer mark and on the channel register reading ``c``.
   In ``shared`` mode every application uses the same ``B``.

Non-selected channels are never touched by the second layer, which is what
makes the map between layers non-linear in the first-layer features.

Readout: data-register marginal probabilities at the stacked-layer feature
indices ``2^(2n) (j-1) + 2^n (c2-1) + a``, summed over the selected
first-layer channels ``a``. The ``measured_channels * 2^(D-2n)`` features,
in ascending basis-index order, are dealt round-robin into ``K`` bins whose
sums are the logits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, build_unitary, unitary_jacobian
from .encoding import encode_image
from .features import ConvLayout, output_index_table
from .statevector import GateApplication, StateVector, apply_matrix, marginal

SECOND_LAYER_MODES = ("shared", "per-channel")
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class ModelConfig:
    data_qubits: int = 10
    kernel_qubits: int = 4
    channels: int = 1
    num_classes: int = 2
    measured_channels: int = 16
    second_layer: str = "shared"
    ansatz: AnsatzSpec = field(default_factory=AnsatzSpec)
    pad_anchor: str = "center"

    def __post_init__(self):
        n, C = self.kernel_qubits, self.channels
        if 2 * n > self.data_qubits:
            raise ValueError(f"two {n}-qubit layers do not fit {self.data_qubits} data qubits")
        if C < 0 or C > 2 ** n or (C and C & (C - 1)):
            raise ValueError(f"channels={C} must be 0 or a power of two <= {2 ** n}")
        if self.ansatz.num_qubits != n:
            raise ValueError(f"ansatz acts on {self.ansatz.num_qubits} qubits, kernels need {n}")
        if self.second_layer not in SECOND_LAYER_MODES:
            raise ValueError(f"second_layer must be one of {SECOND_LAYER_MODES}")
        if not 1 <= self.measured_channels <= 2 ** n:
            raise ValueError(f"measured_channels must be in 1..{2 ** n}")
        if not 2 <= self.num_classes <= self.num_features:
            raise ValueError(f"num_classes={self.num_classes} needs 2..{self.num_features}")

    @property
    def patch_size(self) -> int:
        return 2 ** (self.kernel_qubits // 2)

    @property
    def channel_register_qubits(self) -> int:
        if self.channels == 0:
            return 0
        return max(1, self.channels.bit_length() - 1)

    @property
    def layer_register_qubits(self) -> int:
        return 1 if self.channels else 0

    @property
    def total_qubits(self) -> int:
        return self.data_qubits + self.channel_register_qubits + self.layer_register_qubits

    @property
    def layer_qubit(self) -> int:
        return self.data_qubits + self.channel_register_qubits

    @property
    def features_per_channel(self) -> int:
        return 2 ** (self.data_qubits - 2 * self.kernel_qubits)

    @property
    def num_features(self) -> int:
        return self.measured_channels * self.features_per_channel

    @property
    def num_b_blocks(self) -> int:
        if self.channels == 0:
            return 0
        return 1 if self.second_layer == "shared" else self.channels

    @property
    def num_params(self) -> int:
        return (1 + self.num_b_blocks) * self.ansatz.num_params

    def to_dict(self) -> dict:
        return {"data_qubits": self.data_qubits, "kernel_qubits": self.kernel_qubits,
                "channels": self.channels, "num_classes": self.num_classes,
                "measured_channels": self.measured_channels,
                "second_layer": self.second_layer, "ansatz": self.ansatz.to_dict(),
                "pad_anchor": self.pad_anchor}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        if "ansatz" in d:
            d["ansatz"] = AnsatzSpec.from_dict(d["ansatz"])
        return cls(**d)


@dataclass(frozen=True)
class PlannedOp:
    """One circuit step; ``block`` indexes the parameter block, ``None`` for fixed gates."""

    name: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...]
    block: int | None = None
    matrix: np.ndarray | None = None


@dataclass
class ClassScores:
    logits: np.ndarray
    probabilities: np.ndarray


def circuit_plan(cfg: ModelConfig) -> list[PlannedOp]:
    n, D, C = cfg.kernel_qubits, cfg.data_qubits, cfg.channels
    ops = [PlannedOp("U", tuple(range(n)), (), block=0)]
    if C == 0:
        return ops
    r = cfg.channel_register_qubits
    chan = [D + b for b in range(r)]
    layer = cfg.layer_qubit
    second = tuple(range(n, 2 * n))
    if C == 1:
        ops.append(PlannedOp("flag", (chan[0],), (), matrix=_X))
        mark_ctrl = ((chan[0], 1),) + tuple((q, 0) for q in range(n))
        ops.append(PlannedOp("mark", (layer,), mark_ctrl, matrix=_X))
        ops.append(PlannedOp("B0", second, ((layer, 1), (chan[0], 1)), block=1))
        return ops
    for b in range(r):
        ops.append(PlannedOp(f"tag{b}", (chan[b],), ((b, 1),), matrix=_X))
    ops.append(PlannedOp("mark", (layer,), tuple((q, 0) for q in range(r, n)), matrix=_X))
    for c in range(C):
        ctrl = ((layer, 1),) + tuple((chan[b], (c >> b) & 1) for b in range(r))
        block = 1 if cfg.second_layer == "shared" else 1 + c
        ops.append(PlannedOp(f"B{c}", second, ctrl, block=block))
    return ops


def split_params(cfg: ModelConfig, params) -> list[np.ndarray]:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (cfg.num_params,):
        raise ValueError(f"model needs {cfg.num_params} parameters, got shape {params.shape}")
    p = cfg.ansatz.num_params
    return [params[b * p:(b + 1) * p] for b in range(1 + cfg.num_b_blocks)]


def block_unitaries(cfg: ModelConfig, params) -> list[np.ndarray]:
    return [build_unitary(cfg.ansatz, block) for block in split_params(cfg, params)]


def block_jacobians(cfg: ModelConfig, params) -> list[tuple[np.ndarray, np.ndarray]]:
    return [unitary_jacobian(cfg.ansatz, block) for block in split_params(cfg, params)]


def build_circuit(cfg: ModelConfig, params_U, params_B) -> list[GateApplication]:
    params = np.concatenate([np.ravel(params_U), np.ravel(params_B)])
    mats = block_unitaries(cfg, params)
    return [GateApplication(mats[op.block] if op.block is not None else op.matrix,
                            op.targets, op.controls, op.name)
            for op in circuit_plan(cfg)]


def selected_channels(cfg: ModelConfig) -> range:
    return range(max(cfg.channels, 1))


def readout_indices(cfg: ModelConfig) -> np.ndarray:
    """Data-register indices per feature, shape ``(num_features, len(selected))``.

    Rows follow ascending basis index of the first selected channel.
    """
    layout = ConvLayout(n=cfg.kernel_qubits, k=2, m=cfg.data_qubits)
    base = output_index_table(layout)[:cfg.measured_channels]  # [c2][j]
    base = np.sort(base.ravel())
    offsets = np.array(selected_channels(cfg))
    return base[:, None] + offsets[None, :]


def bin_matrix(cfg: ModelConfig) -> np.ndarray:
    """0/1 matrix ``(num_features, K)`` mapping feature ``f`` to bin ``f mod K``."""
    f = np.arange(cfg.num_features)
    out = np.zeros((cfg.num_features, cfg.num_classes))
    out[f, f % cfg.num_classes] = 1.0
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def prepare_batch(cfg: ModelConfig, data_amps: np.ndarray) -> np.ndarray:
    """Extend ``(B, 2^D)`` data amplitudes with ancillas in ``|0...0>``."""
    data_amps = np.atleast_2d(data_amps)
    if data_amps.shape[-1] != 2 ** cfg.data_qubits:
        raise ValueError(f"expected {2 ** cfg.data_qubits} data amplitudes")
    full = np.zeros(data_amps.shape[:-1] + (2 ** cfg.total_qubits,), dtype=data_amps.dtype)
    full[..., :2 ** cfg.data_qubits] = data_amps
    return full


def run_plan(cfg: ModelConfig, mats: list[np.ndarray], state: np.ndarray) -> np.ndarray:
    """Push ``(B, 2^total)`` amplitudes through the circuit (in place)."""
    for op in circuit_plan(cfg):
        mat = mats[op.block] if op.block is not None else op.matrix
        apply_matrix(state, mat, op.targets, op.controls, cfg.total_qubits, out=state)
    return state


def data_marginal(cfg: ModelConfig, state: np.ndarray) -> np.ndarray:
    probs = np.abs(state) ** 2
    return marginal(probs, range(cfg.data_qubits), cfg.total_qubits)


def features_from_marginal(cfg: ModelConfig, pdata: np.ndarray) -> np.ndarray:
    return pdata[..., readout_indices(cfg)].sum(axis=-1)


def scores_batch(cfg: ModelConfig, params, data_amps: np.ndarray):
    """``(features, logits, probabilities)`` for a batch of encoded images."""
    mats = block_unitaries(cfg, params)
    state = run_plan(cfg, mats, prepare_batch(cfg, data_amps).astype(
        np.result_type(data_amps, *mats)))
    feats = features_from_marginal(cfg, data_marginal(cfg, state))
    logits = feats @ bin_matrix(cfg)
    return feats, logits, softmax(logits)


def forward(cfg: ModelConfig, params, state_in: StateVector) -> ClassScores:
    if abs(state_in.norm() - 1.0) > 1e-9:
        raise ValueError(f"input state is not normalised (norm {state_in.norm():.12g})")
    if state_in.num_qubits == cfg.data_qubits:
        amps = state_in.amplitudes
        full = prepare_batch(cfg, amps[None])
    elif state_in.num_qubits == cfg.total_qubits:
        full = state_in.amplitudes[None].copy()
    else:
        raise ValueError(f"state has {state_in.num_qubits} qubits; model expects "
                         f"{cfg.data_qubits} (data) or {cfg.total_qubits} (full)")
    mats = block_unitaries(cfg, params)
    full = run_plan(cfg, mats, full.astype(np.result_type(full, *mats)))
    feats = features_from_marginal(cfg, data_marginal(cfg, full))
    logits = (feats @ bin_matrix(cfg))[0]
    return ClassScores(logits, softmax(logits))


def predict_from_probabilities(probs: np.ndarray) -> np.ndarray:
    """Argmax with ties resolved toward the smaller class index."""
    return np.argmax(probs, axis=-1)


def predict(cfg: ModelConfig, params, image: np.ndarray) -> int:
    state = encode_image(image, cfg.patch_size, cfg.pad_anchor)
    return int(predict_from_probabilities(forward(cfg, params, state).probabilities))
