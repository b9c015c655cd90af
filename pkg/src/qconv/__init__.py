"""Quantum gates on amplitude-encoded images as convolution layers: simulator, oracles, classifier."""

from .statevector import (GateApplication, StateVector, apply_gate, marginal_probabilities,
                          new_basis_state, probabilities)
from .encoding import PatchEncoding, amplitude_encode, encode_image, pad_image, patch_flatten
from .features import ConvLayout, extract_features, theorem1_feature, theorem2_output_index
from .ansatz import AnsatzSpec, build_unitary
from .model import ModelConfig, build_circuit, forward, predict
from .trainer import TrainConfig, evaluate, train

__version__ = "0.1.0"
