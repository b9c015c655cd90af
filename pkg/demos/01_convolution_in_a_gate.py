# # A unitary on the low qubits is a strided convolution
#
# Amplitude-encode an image with its 4x4 patches laid out contiguously, then
# apply a 16x16 unitary to the four least significant qubits. Every row of the
# unitary acts as a 4x4 kernel, and the amplitudes afterwards are the
# stride-4 cross-correlation of the image with each kernel.

import numpy as np

from qconv import oracle
from qconv.encoding import PatchEncoding, amplitude_encode, patch_flatten
from qconv.features import ConvLayout, extract_features, theorem1_source_index
from qconv.statevector import GateApplication, apply_gate

rng = np.random.default_rng(1)

# ## The patch ordering
#
# A 4x4 raster cut into 2x2 patches. The first patch holds pixels 1, 2, 5, 6.

small = np.arange(1, 17).reshape(4, 4)
print(patch_flatten(small, PatchEncoding(4, 4, 2, 2)))

# ## Where each feature comes from
#
# For a 2-qubit gate at position 1, feature j reads four consecutive
# amplitudes. Move the gate up by one qubit and the same feature reads every
# other amplitude, so the kernel taps spread out.

for i in (1, 2):
    lay = ConvLayout(n=2, i=i, m=6)
    print(f"gate at position {i}: feature 1 reads", [theorem1_source_index(lay, 1, l) for l in range(1, 5)])

# ## A full 32x32 image
#
# Random image, random orthogonal bank. Compare each channel with a plain
# double-loop cross-correlation.

img = rng.random((32, 32))
bank = oracle.random_orthogonal(16, rng)
state = amplitude_encode(patch_flatten(img, PatchEncoding()))
out = apply_gate(state, GateApplication(bank, tuple(range(4))))
features = extract_features(out, ConvLayout(n=4, m=10))

worst = 0.0
for c in range(16):
    ref = oracle.cross_correlate(img, bank[c].reshape(4, 4), stride=4).ravel() / np.linalg.norm(img)
    worst = max(worst, np.abs(features.values[c] - ref).max())
print(f"16 channels x 64 positions, worst deviation {worst:.2e}")

# The bank is orthogonal, so the total squared feature mass is still 1.

print("feature norm:", np.linalg.norm(features.values))
