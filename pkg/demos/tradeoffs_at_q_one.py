"""
Trade-off identities for three-qubit pure states
================================================

At q = 1 the classical correlation of AB plus the entanglement of AC adds
up to the entropy of A. Above q = 1 the same sums are only logged.
"""

import numpy as np

from qpoly.core import random_pure
from qpoly.correlations import check_tradeoff_prop1, check_tradeoff_prop2
from qpoly.optimize import OptimizerConfig

rng = np.random.default_rng(1)
cfg = OptimizerConfig(restarts=32)

for i in range(3):
    psi = random_pure((2, 2, 2), rng)
    for q in (1.0, 1.5):
        first, second = check_tradeoff_prop1(psi, q, cfg)
        third = check_tradeoff_prop2(psi, q, cfg)
        tag = "diagnostic" if first.diagnostic else "identity"
        print(f"state {i} q={q} ({tag})")
        for rep in (first, second, third):
            print(f"   {rep.name:32s} lhs {rep.lhs:.6f} residual {rep.residual:+.2e}")
