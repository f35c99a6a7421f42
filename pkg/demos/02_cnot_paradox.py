"""
When Bob reads the book with a C-NOT
====================================

Alice writes her qubit into a book and Bob uses the book to control his
phase flip. With the pm-basis C-NOT the whole history gets zero weight,
whatever was in the book.
"""

from pctclab.experiments import build_fig1b_cnot, run_experiment
from pctclab.pctc import loop_operator, run_postselected

circuit = build_fig1b_cnot()
for book in ("zero", "one", "plus", "minus", "plus_i", "minus_i"):
    w = run_postselected(circuit, {"B": book}).weight
    print(f"book {book:8s} weight {w:.1e}")

la = loop_operator(circuit, "B")
print("loop operator on the book:", la.classification)

# flip which book value fires the phase flip and consistency comes back
flipped = build_fig1b_cnot(active="-")
print("control on '-':", run_postselected(flipped).weight)

# a model where Alice XORs into the book rather than overwriting it only
# kills the blank page
xor = build_fig1b_cnot(write="copy")
print({b: round(run_postselected(xor, {"B": b}).weight, 3) for b in ("plus", "minus", "zero")})

rep = run_experiment("fig1b_cnot", seed=3)
print({k: v["pass"] for k, v in rep.verdicts.items()})
