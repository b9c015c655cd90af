# # Training the two-layer classifier on 0 vs 1
#
# Uses the IDX files under data/mnist (or $QCONV_DATA_DIR). With the bundled
# 10k-digit subset this takes a few seconds per epoch.

import os
from pathlib import Path

import numpy as np

from qconv.mnist import load_mnist, subset
from qconv.model import ModelConfig, predict
from qconv.trainer import TrainConfig, train

data_dir = os.environ.get("QCONV_DATA_DIR", Path(__file__).resolve().parents[1] / "data" / "mnist")
prefix = "train" if (Path(data_dir) / "train-images-idx3-ubyte.gz").exists() else "npm10k"
digits = load_mnist(data_dir, prefix)
print(f"{len(digits)} images from {data_dir} ({prefix})")

train_set, test_set = subset(digits, (0, 1), 500, 200, seed=[0, 0x5117])

# ## The model
#
# One channel carried between the layers: 20 angles for the first kernel bank
# U and 20 for the second bank B.

model = ModelConfig(channels=1, num_classes=2)
print("qubits:", model.total_qubits, "parameters:", model.num_params)

params, metrics = train(TrainConfig(epochs=5, seed=0), model, train_set, test_set)
for e in metrics.epochs:
    print(f"epoch {e.epoch}: train loss {e.train_loss:.4f}, test accuracy {e.test_accuracy:.3f}")

print("confusion matrix (rows = true digit):")
print(metrics.final_test.confusion_matrix)

# ## Single predictions

for k in np.random.default_rng(0).choice(len(test_set), 5, replace=False):
    s = test_set[k]
    print(f"digit {s.label} -> predicted class {predict(model, params, s.image)}")
