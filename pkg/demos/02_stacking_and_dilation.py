# # Shifted and stacked gates
#
# Two consequences of the index algebra: a gate further up the register acts
# like a dilated kernel, and two gates on neighbouring qubit groups act like a
# single convolution whose kernel is the Kronecker product of the two rows.

import numpy as np

from qconv import oracle
from qconv.features import ConvLayout, output_index_table, theorem2_output_index
from qconv.statevector import GateApplication, StateVector, apply_gate

rng = np.random.default_rng(2)
m = 8

# ## Dilation
#
# A 2-qubit gate at position i is block-diagonal convolution with every kernel
# spread out by 2^(i-1).

bank = oracle.random_orthogonal(4, rng)
x = oracle.random_state(m, rng, real=True)
for i in (1, 2, 3):
    lay = ConvLayout(n=2, i=i, m=m)
    quantum = apply_gate(StateVector(m, x), GateApplication(bank, lay.gate_targets())).amplitudes
    dilation = 2 ** (i - 1)
    classical = oracle.block_diag_apply(oracle.dilated_bank(bank, dilation), x)
    print(f"position {i}, dilation {dilation}: max diff {np.abs(quantum - classical).max():.1e}")

print("dilated first kernel, slot 0:", oracle.dilate_kernel(bank[0], 0, 2).round(3))

# ## Stacking
#
# U on qubits 0-1 then B on qubits 2-3. Channel c of the result is the
# convolution with kron(B[c], U[0]).

U, B = oracle.random_orthogonal(4, rng), oracle.random_orthogonal(4, rng)
lay = ConvLayout(n=2, k=2, m=m)
state = apply_gate(StateVector(m, x), GateApplication(U, lay.gate_targets(1)))
state = apply_gate(state, GateApplication(B, lay.gate_targets(2)))
where = output_index_table(lay)
blocks = x.reshape(-1, 16)
for c in range(4):
    ref = blocks @ oracle.composite_kernel(B[c], U[0])
    print(f"channel {c + 1}: max diff {np.abs(state.amplitudes[where[c]] - ref).max():.1e}")

# For the 10-qubit classifier (two 4-qubit layers) the first two features of
# the 16 channels sit at these basis states:

big = ConvLayout(n=4, k=2, m=10)
print([theorem2_output_index(big, 1, c) for c in range(1, 17)])
print([theorem2_output_index(big, 2, c) for c in range(1, 17)])
