"""
The same copy gate under Deutsch's rule
=======================================

Drop the postselection and ask instead for a loop state that is its own
image under the interaction. The copy gate then simply hands the book's
value to the loop, so different books give perfectly distinguishable loop
states.
"""
from pctclab.deutsch import circuit_deutsch, fixed_points
from pctclab.experiments import build_copy_interaction
from pctclab.linalg import trace_distance

circuit = build_copy_interaction()
states = {}
for book in ("plus", "minus"):
    u, rho_cr, cr = circuit_deutsch(circuit, "C_past", {"B": book})
    sol = fixed_points(u, rho_cr)
    states[book] = sol.fixed_state
    print(book, "multiplicity", sol.multiplicity, "residual", sol.residual)
    print(sol.fixed_state.entries.real.round(3))

print("trace distance:", trace_distance(states["plus"], states["minus"]))
