"""
Superadditivity of the q-mutual entropy on ccq states
=====================================================

The ccq state correlates two uniform classical registers with Pauli twirls
of B. At q = 1 the margin is never negative; above q = 1 it can be.
"""

import numpy as np

from qpoly.core import make_named_state, random_density
from qpoly.polygamy import superadditivity_margin

rng = np.random.default_rng(0)
states = [random_density((2, 2), rng) for _ in range(200)]

for q in (1.0, 1.2, 1.5, 2.0):
    margins = np.array([superadditivity_margin(s, q) for s in states])
    print(f"q={q}: min margin {margins.min():+.3e}, negative on {np.mean(margins < -1e-9):.0%} of states")

# The GHZ two-qubit marginal, which the GHZ chain relies on.
pair = make_named_state("ghz:4").marginal([0, 1])
for q in (1.0, 1.2, 1.5, 2.0):
    print(f"GHZ pair, q={q}: margin {superadditivity_margin(pair, q):+.6f}")
