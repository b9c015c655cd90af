"""Acceptance criteria 1-8, each at its stated tolerance.

One PASS/FAIL line per criterion is printed in the terminal summary. The two
training criteria (7, 8) are marked ``slow`` but run by default; deselect them
with ``-m "not slow"``.
"""

import statistics
import time

import numpy as np
import pytest

from qconv import verify
from qconv.mnist import load_mnist, subset
from qconv.model import ModelConfig
from qconv.trainer import TrainConfig, train

SEED = 7


def _check(report, number, title, cases, extra=""):
    worst = max(c.max_error for c in cases)
    ok = all(c.passed for c in cases)
    report(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} "
           f"(worst {worst:.2e} over {len(cases)} cases{extra})")
    failing = [f"{c.case}: {c.max_error:.3e} > {c.tolerance:.0e}" for c in cases if not c.passed]
    assert ok, failing


def test_criterion1_theorem1(acceptance_report):
    t0 = time.perf_counter()
    cases = verify.theorem1(trials=100, seed=SEED, max_qubits=10, min_qubits=4)
    seconds = time.perf_counter() - t0
    assert {c.case for c in cases} >= {"m=4,n=1,i=1", "m=10,n=4,i=7", "m=10,n=1,i=10"}
    assert all(c.tolerance == 1e-10 and c.trials == 100 for c in cases)
    _check(acceptance_report, 1, "single-gate features at predicted positions", cases,
           f", {seconds:.1f}s")
    assert seconds <= 60


def test_criterion2_classical_conv(acceptance_report):
    cases = verify.classical(trials=20, seed=SEED)
    _check(acceptance_report, 2, "quantum features equal stride-4 cross-correlation", cases)


def test_criterion3_dilation(acceptance_report):
    cases = verify.dilated(trials=20, seed=SEED, m=8, positions=(1, 2, 3))
    _check(acceptance_report, 3, "shifted gate equals dilated block convolution", cases)


def test_criterion4_composite(acceptance_report):
    cases = verify.composite(trials=20, seed=SEED)
    lists = cases[-1].details
    assert lists["j=1"] == list(range(0, 241, 16))
    assert lists["j=2"] == list(range(256, 497, 16))
    cases += [c for c in verify.theorem2(trials=5, seed=SEED) if c.case.startswith(("n=2,k=2", "n=4,k=2"))]
    _check(acceptance_report, 4, "stacked gates equal composite-kernel convolution", cases)


def test_criterion5_orthonormality(acceptance_report):
    cases = verify.unitarity(trials=10_000, seed=SEED)
    assert cases[0].trials == 10_000
    _check(acceptance_report, 5, "ansatz kernel banks are orthonormal", cases)


def test_criterion6_gradients(acceptance_report):
    cases = verify.gradients(trials=1, seed=SEED, channels=4, images=4)
    _check(acceptance_report, 6, "adjoint, parameter-shift and finite differences agree", cases)


@pytest.fixture(scope="module")
def mnist(mnist_location):
    directory, prefix = mnist_location
    return load_mnist(directory, prefix)


def _run(data, classes, channels, seed, epochs=10):
    train_set, test_set = subset(data, classes, 500, 200, seed=[seed, 0x5117])
    cfg = TrainConfig(epochs=epochs, learning_rate=0.1, seed=seed)
    model = ModelConfig(channels=channels, num_classes=len(classes))
    _, metrics = train(cfg, model, train_set, test_set)
    return metrics


@pytest.mark.slow
def test_criterion7_binary(mnist, acceptance_report):
    t0 = time.perf_counter()
    metrics = _run(mnist, (0, 1), channels=1, seed=0)
    minutes = (time.perf_counter() - t0) / 60
    acc = metrics.final_test.accuracy
    ok = acc >= 0.90 and minutes <= 20
    acceptance_report(f"{'PASS' if ok else 'FAIL'} criterion 7: 0 vs 1, C=1, 40 params, "
                      f"test accuracy {acc:.4f} (>= 0.90), {minutes:.1f} min (<= 20)")
    assert ModelConfig(channels=1).num_params == 40
    assert acc >= 0.90
    assert minutes <= 20


@pytest.mark.slow
def test_criterion8_channel_trend(mnist, acceptance_report):
    rows = []
    hard_ok = soft_ok = True
    for classes in ((0, 1, 2, 3), tuple(range(8))):
        med = {}
        for C in (1, 8):
            accs = [_run(mnist, classes, C, seed).final_test.accuracy for seed in (0, 1, 2)]
            med[C] = statistics.median(accs)
        gap = med[8] - med[1]
        soft_ok &= gap >= -0.02
        hard_ok &= gap >= -0.10
        rows.append(f"{len(classes)}-class median acc C=1 {med[1]:.4f}, C=8 {med[8]:.4f}")
    status = "PASS" if soft_ok else ("PASS (soft target missed, within 10-point gate)" if hard_ok else "FAIL")
    acceptance_report(f"{status} criterion 8: channel-count trend over 3 seeds; " + "; ".join(rows))
    assert hard_ok, rows
