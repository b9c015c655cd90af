"""Cross-entropy training with Adam, three gradient routes, and evaluation metrics."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .ansatz import init_params
from .encoding import encode_images
from .mnist import Dataset
from .model import (ModelConfig, bin_matrix, block_jacobians, block_unitaries, circuit_plan,
                    data_marginal, features_from_marginal, predict_from_probabilities,
                    prepare_batch, readout_indices, run_plan, scores_batch, softmax)
from .statevector import apply_matrix, block_outer

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
GRADIENT_MODES = ("adjoint", "parameter-shift", "finite-difference")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32  # 0 means full batch
    seed: int = 0
    train_per_class: int = 500
    test_per_class: int = 200
    gradient_mode: str = "adjoint"
    grad_clip: float = 1e3
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"gradient_mode must be one of {GRADIENT_MODES}")

    def to_dict(self) -> dict:
        return asdict(self)


def cross_entropy(probs, label: int) -> float:
    probs = np.asarray(probs)
    if not 0 <= label < probs.shape[-1]:
        raise ValueError(f"label {label} out of range for {probs.shape[-1]} classes")
    return float(-np.log(max(probs[label], PROB_FLOOR)))


def _losses(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    picked = probs[np.arange(len(labels)), labels]
    return -np.log(np.maximum(picked, PROB_FLOOR))


def _dloss_dfeatures(cfg: ModelConfig, probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Gradient of the batch-mean loss w.r.t. each sample's features."""
    onehot = np.eye(cfg.num_classes)[labels]
    dlogits = probs - onehot
    picked = probs[np.arange(len(labels)), labels]
    dlogits[picked < PROB_FLOOR] = 0.0  # floored branch is flat
    dlogits /= len(labels)
    return dlogits @ bin_matrix(cfg).T


def mean_loss(cfg: ModelConfig, params, amps: np.ndarray, labels: np.ndarray) -> float:
    _, _, probs = scores_batch(cfg, params, amps)
    return float(_losses(probs, labels).mean())


def adjoint_gradient(cfg: ModelConfig, params, amps: np.ndarray, labels: np.ndarray):
    """Mean loss and its gradient from one forward and one reverse sweep."""
    jacs = block_jacobians(cfg, params)
    mats = [u for u, _ in jacs]
    m = cfg.total_qubits
    psi = prepare_batch(cfg, amps).astype(np.result_type(amps, *mats))
    run_plan(cfg, mats, psi)

    pdata = data_marginal(cfg, psi)
    feats = features_from_marginal(cfg, pdata)
    probs = softmax(feats @ bin_matrix(cfg))
    losses = _losses(probs, labels)

    dfeat = _dloss_dfeatures(cfg, probs, labels)
    gdata = np.zeros_like(pdata)
    idx = readout_indices(cfg)
    for col in range(idx.shape[1]):
        gdata[:, idx[:, col]] += dfeat
    # data qubits are the low bits, so each ancilla sector repeats gdata
    gfull = np.tile(gdata, (1, 2 ** (m - cfg.data_qubits)))
    lam = gfull * psi

    grads = [np.zeros(d.shape[0]) for _, d in jacs]
    for op in reversed(circuit_plan(cfg)):
        mat = mats[op.block] if op.block is not None else op.matrix
        adj = mat.conj().T
        apply_matrix(psi, adj, op.targets, op.controls, m, out=psi)
        if op.block is not None:
            A = block_outer(lam, psi, op.targets, op.controls, m)
            grads[op.block] += 2.0 * np.real(np.einsum("trs,rs->t", jacs[op.block][1], A))
        apply_matrix(lam, adj, op.targets, op.controls, m, out=lam)
    return float(losses.mean()), np.concatenate(grads)


def parameter_shift_gradient(cfg: ModelConfig, params, amps: np.ndarray, labels: np.ndarray):
    """Shift rule on every read-out probability, chained through softmax/cross-entropy."""
    params = np.asarray(params, dtype=np.float64)
    feats, logits, probs = scores_batch(cfg, params, amps)
    dfeat = _dloss_dfeatures(cfg, probs, labels)
    grad = np.zeros_like(params)
    for t in range(params.size):
        plus, minus = params.copy(), params.copy()
        plus[t] += np.pi / 2
        minus[t] -= np.pi / 2
        dfeat_dt = 0.5 * (scores_batch(cfg, plus, amps)[0] - scores_batch(cfg, minus, amps)[0])
        grad[t] = np.sum(dfeat * dfeat_dt)
    return float(_losses(probs, labels).mean()), grad


def finite_difference_gradient(cfg: ModelConfig, params, amps: np.ndarray, labels: np.ndarray,
                               h: float = 1e-5):
    params = np.asarray(params, dtype=np.float64)
    grad = np.zeros_like(params)
    for t in range(params.size):
        plus, minus = params.copy(), params.copy()
        plus[t] += h
        minus[t] -= h
        grad[t] = (mean_loss(cfg, plus, amps, labels) - mean_loss(cfg, minus, amps, labels)) / (2 * h)
    return mean_loss(cfg, params, amps, labels), grad


def gradient(cfg: ModelConfig, params, amps: np.ndarray, labels: np.ndarray,
             mode: str = "adjoint", h: float = 1e-5):
    """``(mean loss, mean gradient)`` over a batch of encoded images."""
    labels = np.asarray(labels, dtype=np.int64)
    if mode == "adjoint":
        loss, grad = adjoint_gradient(cfg, params, amps, labels)
    elif mode == "parameter-shift":
        loss, grad = parameter_shift_gradient(cfg, params, amps, labels)
    elif mode == "finite-difference":
        loss, grad = finite_difference_gradient(cfg, params, amps, labels, h)
    else:
        raise ValueError(f"unknown gradient mode {mode!r}")
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite loss/gradient (loss={loss}) in {mode} mode")
    return loss, grad


class Adam:
    def __init__(self, lr=0.1, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class Evaluation:
    loss: float
    accuracy: float
    confusion_matrix: np.ndarray  # rows: true class, columns: predicted
    recall: np.ndarray
    categories_learned: int

    def to_dict(self) -> dict:
        return {"loss": self.loss, "accuracy": self.accuracy,
                "confusion_matrix": self.confusion_matrix.tolist(),
                "recall": self.recall.tolist(),
                "categories_learned": self.categories_learned}


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    test_loss: float | None
    test_accuracy: float | None
    categories_learned: int | None
    clipped_steps: int


@dataclass
class Metrics:
    seed: int
    initial_train_loss: float | None = None
    epochs: list[EpochRecord] = field(default_factory=list)
    final_train: Evaluation | None = None
    final_test: Evaluation | None = None
    sub_seeds: dict = field(default_factory=dict)
    wall_clock_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"seed": self.seed, "sub_seeds": self.sub_seeds,
                "initial_train_loss": self.initial_train_loss,
                "epochs": [asdict(e) for e in self.epochs],
                "final_train": self.final_train.to_dict() if self.final_train else None,
                "final_test": self.final_test.to_dict() if self.final_test else None,
                "wall_clock_seconds": self.wall_clock_seconds}


def confusion_matrix(labels: np.ndarray, preds: np.ndarray, num_classes: int) -> np.ndarray:
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


def summarize(labels: np.ndarray, probs: np.ndarray, num_classes: int) -> Evaluation:
    """Metrics from class probabilities; ``categories_learned`` counts classes with recall >= 0.5."""
    labels = np.asarray(labels, dtype=np.int64)
    preds = predict_from_probabilities(probs)
    cm = confusion_matrix(labels, preds, num_classes)
    support = cm.sum(axis=1)
    recall = np.divide(np.diag(cm), support, out=np.zeros(num_classes), where=support > 0)
    return Evaluation(loss=float(_losses(probs, labels).mean()) if len(labels) else float("nan"),
                      accuracy=float(np.trace(cm) / cm.sum()) if cm.sum() else float("nan"),
                      confusion_matrix=cm, recall=recall,
                      categories_learned=int(np.sum(recall >= 0.5)))


def predict_probabilities(cfg: ModelConfig, params, amps: np.ndarray, chunk: int = 256):
    out = [scores_batch(cfg, params, amps[i:i + chunk])[2] for i in range(0, len(amps), chunk)]
    return np.concatenate(out) if out else np.zeros((0, cfg.num_classes))


def _encode(cfg: ModelConfig, data: Dataset) -> np.ndarray:
    return encode_images(data.images, cfg.patch_size, cfg.pad_anchor)


def evaluate(cfg: ModelConfig, params, data: Dataset, amps: np.ndarray | None = None) -> Evaluation:
    if amps is None:
        amps = _encode(cfg, data)
    return summarize(data.remapped, predict_probabilities(cfg, params, amps), cfg.num_classes)


def train(cfg: TrainConfig, model_cfg: ModelConfig, train_data: Dataset,
          test_data: Dataset | None = None, params=None):
    """Adam on mean cross-entropy over seeded shuffled minibatches.

    Returns ``(params, Metrics)``. Everything random derives from
    ``cfg.seed``; the same inputs give bitwise-identical results.
    """
    if len(train_data) == 0:
        raise ValueError("empty training set")
    if train_data.num_classes != model_cfg.num_classes:
        raise ValueError(f"dataset has {train_data.num_classes} classes, model expects "
                         f"{model_cfg.num_classes}")
    start = time.perf_counter()
    init_seq, shuffle_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    metrics = Metrics(seed=cfg.seed, sub_seeds={
        "init": list(init_seq.spawn_key), "shuffle": list(shuffle_seq.spawn_key)})
    if params is None:
        params = init_params(model_cfg.ansatz, np.random.default_rng(init_seq),
                             count=1 + model_cfg.num_b_blocks)
    params = np.asarray(params, dtype=np.float64).copy()
    if cfg.epochs == 0:
        metrics.wall_clock_seconds = time.perf_counter() - start
        return params, metrics

    shuffle_rng = np.random.default_rng(shuffle_seq)
    x_train = _encode(model_cfg, train_data)
    y_train = train_data.remapped
    x_test = _encode(model_cfg, test_data) if test_data is not None else None
    metrics.initial_train_loss = evaluate(model_cfg, params, train_data, x_train).loss

    opt = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    bs = cfg.batch_size or len(y_train)
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(len(y_train))
        clipped = 0
        for lo in range(0, len(order), bs):
            idx = order[lo:lo + bs]
            loss, grad = gradient(model_cfg, params, x_train[idx], y_train[idx],
                                  cfg.gradient_mode, cfg.fd_step)
            if np.abs(grad).max() > cfg.grad_clip:
                clipped += 1
                grad = np.clip(grad, -cfg.grad_clip, cfg.grad_clip)
            params = opt.step(params, grad)
        tr = evaluate(model_cfg, params, train_data, x_train)
        te = evaluate(model_cfg, params, test_data, x_test) if test_data is not None else None
        metrics.epochs.append(EpochRecord(
            epoch=epoch, train_loss=tr.loss, train_accuracy=tr.accuracy,
            test_loss=te.loss if te else None, test_accuracy=te.accuracy if te else None,
            categories_learned=te.categories_learned if te else tr.categories_learned,
            clipped_steps=clipped))
        if not np.isfinite(tr.loss):
            raise FloatingPointError(f"training loss became {tr.loss} at epoch {epoch}")
        log.info("epoch %d: train loss %.4f acc %.3f%s", epoch, tr.loss, tr.accuracy,
                 f" test acc {te.accuracy:.3f}" if te else "")
        metrics.final_train, metrics.final_test = tr, te
    metrics.wall_clock_seconds = time.perf_counter() - start
    return params, metrics
