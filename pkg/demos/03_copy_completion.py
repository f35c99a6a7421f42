"""
The copy completion
===================

Bob's second purification copies the book into the loop qubit, with an
environment qubit added to keep the gate unitary. Four rows of the gate are
fixed; the other four follow the completion rule (b, c, e) -> (b, b^e, b^c).

Under postselected loops this completion does not single out one book
state: every input survives with weight 1/4 and the book ends up entangled
with the leftover wires.
"""
import numpy as np

from pctclab.experiments import QUOTED_COPY_ROWS, build_fig1b_copy, copy_table
from pctclab.pctc import EntangledResidueError, loop_operator, run_postselected

for row in copy_table().rows:
    mark = "*" if (row.inp, row.out) in QUOTED_COPY_ROWS else " "
    print(f" {mark} |{row.inp}> -> |{row.out}>")

PLUS = np.array([1, 1]) / np.sqrt(2)
circuit = build_fig1b_copy()
for book in ("plus", "minus", "zero"):
    out = run_postselected(circuit, {"B": book})
    i = out.wires.index("B")
    t = np.moveaxis(out.state.amplitudes.reshape(out.state.dims), i, 0).reshape(2, -1)
    rho = t @ t.conj().T
    p_plus = np.real(PLUS @ rho @ PLUS)
    print(f"book {book:5s} weight {out.weight:.3f}  <+|rho_B|+> = {p_plus:.3f}")

try:
    loop_operator(circuit, "B")
except EntangledResidueError as exc:
    print("no single-wire loop map:", exc)
