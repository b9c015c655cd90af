"""Seeded property suites comparing the simulator against the classical oracles.

Each suite returns a :class:`SuiteReport` with one :class:`CaseResult` per
configuration, recording the worst error seen over all trials.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from functools import reduce

import numpy as np

from . import oracle
from .ansatz import AnsatzSpec, build_unitary, init_params
from .encoding import PatchEncoding, amplitude_encode, encode_images, patch_flatten
from .features import (ConvLayout, extract_features, output_index_table, theorem1_features,
                       theorem1_output_index, theorem2_output_index)
from .model import ModelConfig
from .statevector import GateApplication, StateVector, apply_gate
from .trainer import gradient

SCHEMA_VERSION = 1
THEOREM_TOL = 1e-10
GRAD_ABS_TOL = 1e-8
GRAD_REL_TOL = 1e-4
SUITES = ("theorem1", "classical", "dilated", "composite", "theorem2", "unitarity", "gradients")


@dataclass
class CaseResult:
    case: str
    max_error: float
    tolerance: float
    trials: int
    passed: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.max_error <= self.tolerance)


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    max_qubits: int
    cases: list[CaseResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def max_error(self) -> float:
        return max((c.max_error for c in self.cases), default=0.0)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "trials": self.trials,
                "max_qubits": self.max_qubits, "passed": self.passed,
                "max_error": self.max_error, "seconds": self.seconds,
                "cases": [asdict(c) for c in self.cases]}


def _rng(seed: int, suite: str) -> np.random.Generator:
    # one independent stream per suite so suites can run alone or together
    return np.random.default_rng([seed, SUITES.index(suite)])


def theorem1(trials: int = 100, seed: int = 0, max_qubits: int = 10, min_qubits: int = 4,
             kernel_qubits=(1, 2, 3, 4)) -> list[CaseResult]:
    """Single gate at every position: simulated amplitudes vs the closed-form features."""
    rng = _rng(seed, "theorem1")
    cases = []
    for m in range(min_qubits, max_qubits + 1):
        for n in kernel_qubits:
            if n > m:
                continue
            for i in range(1, m - n + 2):
                layout = ConvLayout(n=n, i=i, m=m)
                c = np.arange(1, 2 ** n + 1)[:, None]
                j = np.arange(1, 2 ** (m - n) + 1)[None, :]
                where = theorem1_output_index(layout, j, c)
                worst = 0.0
                for _ in range(trials):
                    U = oracle.random_unitary(2 ** n, rng)
                    state = StateVector(m, oracle.random_state(m, rng))
                    out = apply_gate(state, GateApplication(U, layout.gate_targets()))
                    predicted = theorem1_features(state, U, layout).values
                    worst = max(worst, float(np.abs(out.amplitudes[where] - predicted).max()))
                cases.append(CaseResult(f"m={m},n={n},i={i}", worst, THEOREM_TOL, trials))
    return cases


def classical(trials: int = 20, seed: int = 0) -> list[CaseResult]:
    """4x4 kernels on 32x32 images: quantum features vs stride-4 cross-correlation."""
    rng = _rng(seed, "classical")
    enc = PatchEncoding(32, 32, 4, 4)
    layout = ConvLayout(n=4, i=1, k=1, m=10)
    worst = 0.0
    for _ in range(trials):
        img = rng.random((32, 32))
        bank = oracle.random_orthogonal(16, rng)
        state = amplitude_encode(patch_flatten(img, enc))
        out = apply_gate(state, GateApplication(bank, layout.gate_targets()))
        quantum = extract_features(out, layout).values
        norm = np.linalg.norm(img)
        for c in range(16):
            ref = oracle.cross_correlate(img, bank[c].reshape(4, 4), 4).ravel() / norm
            worst = max(worst, float(np.abs(quantum[c] - ref).max()))
    return [CaseResult("n=4,m=10,32x32", worst, THEOREM_TOL, trials)]


def dilated(trials: int = 20, seed: int = 0, m: int = 8, positions=(1, 2, 3)) -> list[CaseResult]:
    """Gate shifted to position ``i`` == block-diagonal conv with kernels dilated by ``2^(i-1)``."""
    rng = _rng(seed, "dilated")
    cases = []
    for i in positions:
        layout = ConvLayout(n=2, i=i, m=m)
        N1 = 2 ** (i - 1)
        bank = None
        worst = 0.0
        for _ in range(trials):
            bank = oracle.random_orthogonal(4, rng)
            x = oracle.random_state(m, rng, real=True)
            out = apply_gate(StateVector(m, x), GateApplication(bank, layout.gate_targets()))
            ref = oracle.block_diag_apply(oracle.dilated_bank(bank, N1), x)
            worst = max(worst, float(np.abs(out.amplitudes - ref).max()))
        cases.append(CaseResult(f"n=2,m={m},i={i},dilation={N1}", worst, THEOREM_TOL, trials))
    return cases


def _stacked_check(n: int, k: int, m: int, trials: int, rng) -> float:
    layout = ConvLayout(n=n, i=1, k=k, m=m)
    where = output_index_table(layout)
    span = 2 ** (n * k)
    worst = 0.0
    for _ in range(trials):
        gates = [oracle.random_unitary(2 ** n, rng) for _ in range(k)]
        x = oracle.random_state(m, rng)
        state = StateVector(m, x)
        for t, g in enumerate(gates, start=1):
            state = apply_gate(state, GateApplication(g, layout.gate_targets(t)))
        blocks = x.reshape(-1, span)[:layout.features_per_channel]
        for c in range(2 ** n):
            # last gate picks the channel; earlier layers contribute their first kernel
            rows = [gates[-1][c]] + [g[0] for g in reversed(gates[:-1])]
            kernel = reduce(oracle.composite_kernel, rows)
            ref = blocks @ kernel
            worst = max(worst, float(np.abs(state.amplitudes[where[c]] - ref).max()))
    return worst


def composite(trials: int = 20, seed: int = 0) -> list[CaseResult]:
    """Two stacked gates == one conv with kernel ``w2 kron w1`` at the stacked-layer indices."""
    rng = _rng(seed, "composite")
    cases = []
    for n, m in ((2, 8), (2, 10), (4, 10)):
        cases.append(CaseResult(f"n={n},k=2,m={m}", _stacked_check(n, 2, m, trials, rng),
                                THEOREM_TOL, trials))
    layout = ConvLayout(n=4, k=2, m=10)
    first = [theorem2_output_index(layout, 1, c) for c in range(1, 17)]
    second = [theorem2_output_index(layout, 2, c) for c in range(1, 17)]
    mismatch = int(first != list(range(0, 241, 16))) + int(second != list(range(256, 497, 16)))
    cases.append(CaseResult("n=4,k=2,m=10 index lists", float(mismatch), 0.0, 1,
                            details={"j=1": first, "j=2": second}))
    return cases


def theorem2(trials: int = 20, seed: int = 0, max_qubits: int = 10) -> list[CaseResult]:
    rng = _rng(seed, "theorem2")
    cases = []
    for k in (1, 2, 3):
        for n in (1, 2, 3, 4):
            for m in range(n * k, max_qubits + 1):
                cases.append(CaseResult(f"n={n},k={k},m={m}", _stacked_check(n, k, m, trials, rng),
                                        THEOREM_TOL, trials))
    return cases


def unitarity(trials: int = 10_000, seed: int = 0, spec: AnsatzSpec | None = None) -> list[CaseResult]:
    """Kernel rows from the ansatz are orthonormal for any angles."""
    rng = _rng(seed, "unitarity")
    spec = spec or AnsatzSpec()
    worst = 0.0
    for _ in range(trials):
        worst = max(worst, oracle.gram_error(build_unitary(spec, init_params(spec, rng))))
    ident = AnsatzSpec(spec.num_qubits, 1, entangler="none")
    ident_err = oracle.gram_error(build_unitary(ident, np.zeros(ident.num_params)))
    return [CaseResult(f"ansatz q={spec.num_qubits},L={spec.num_layers}", worst, THEOREM_TOL, trials),
            CaseResult("identity bank", ident_err, THEOREM_TOL, 1)]


def gradients(trials: int = 1, seed: int = 0, channels: int = 4, images: int = 4) -> list[CaseResult]:
    """Adjoint vs parameter-shift vs central differences on the full model."""
    rng = _rng(seed, "gradients")
    cfg = ModelConfig(channels=channels, num_classes=4)
    worst_ps = worst_fd_adj = worst_fd_ps = 0.0
    for _ in range(trials):
        amps = encode_images(rng.integers(0, 256, size=(images, 28, 28)))
        labels = rng.integers(0, cfg.num_classes, size=images)
        params = init_params(cfg.ansatz, rng, count=1 + cfg.num_b_blocks)
        _, g_adj = gradient(cfg, params, amps, labels, "adjoint")
        _, g_ps = gradient(cfg, params, amps, labels, "parameter-shift")
        _, g_fd = gradient(cfg, params, amps, labels, "finite-difference", h=1e-5)
        worst_ps = max(worst_ps, float(np.abs(g_adj - g_ps).max()))
        worst_fd_adj = max(worst_fd_adj, float(np.abs(g_fd - g_adj).max() / np.abs(g_adj).max()))
        worst_fd_ps = max(worst_fd_ps, float(np.abs(g_fd - g_ps).max() / np.abs(g_ps).max()))
    tag = f"C={channels},{images} images"
    return [CaseResult(f"adjoint vs parameter-shift ({tag})", worst_ps, GRAD_ABS_TOL, trials),
            CaseResult(f"adjoint vs finite-difference, rel ({tag})", worst_fd_adj, GRAD_REL_TOL, trials),
            CaseResult(f"parameter-shift vs finite-difference, rel ({tag})", worst_fd_ps,
                       GRAD_REL_TOL, trials)]


def run_suite(suite: str, trials: int | None = None, seed: int = 0,
              max_qubits: int = 10) -> SuiteReport:
    """Run one named suite. ``trials=None`` uses each suite's own default."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    if max_qubits > oracle.MAX_ORACLE_QUBITS:
        raise ValueError(f"max_qubits is capped at {oracle.MAX_ORACLE_QUBITS}")
    kw = {} if trials is None else {"trials": trials}
    t0 = time.perf_counter()
    if suite == "theorem1":
        cases = theorem1(seed=seed, max_qubits=max_qubits, **kw)
    elif suite == "theorem2":
        cases = theorem2(seed=seed, max_qubits=max_qubits, **kw)
    else:
        cases = globals()[suite](seed=seed, **kw)
    report = SuiteReport(suite, seed, max((c.trials for c in cases), default=0), max_qubits, cases)
    report.seconds = time.perf_counter() - t0
    return report


def run_all(trials: int | None = None, seed: int = 0, max_qubits: int = 10) -> list[SuiteReport]:
    return [run_suite(s, trials, seed, max_qubits) for s in SUITES]
