"""
Sending a bit into the past
===========================

Bob holds one end of a loop pair. He entangles it with Alice's qubit A2 and
then decides whether to flip its phase. After the loop is closed by
postselection, Alice's other qubit A1 carries his choice.
"""
import numpy as np

from pctclab.experiments import build_fig1a
from pctclab.pctc import circuit_effective_operator, run_postselected
from pctclab.linalg import named_state

for b in (0, 1):
    circuit = build_fig1a(b)
    out = run_postselected(circuit)
    psi = out.state.amplitudes.reshape(2, 2)      # rows: A1, columns: A2
    rho_a1 = psi @ psi.conj().T
    label = "plus" if b == 0 else "minus"
    v = named_state(label).amplitudes
    p = np.real(v.conj() @ rho_a1 @ v)
    print(f"b={b}: weight {out.weight:.3f}, P(A1 reads {label}) = {p:.12f}")

# The same answer comes straight from the trace over the loop wire:
# Tr_C[Z^b CNOT(C -> A2)] = I + (-1)^b X on A2.
eff, wires = circuit_effective_operator(build_fig1a(1))
print("effective operator on", wires)
print(np.round(eff.entries.real, 3))
