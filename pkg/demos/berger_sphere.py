"""Shrink the Hopf fibres of the round 3-sphere and watch two sectional curvatures move.

Vertizontal planes go like 1 - s^2, horizontal ones like 1 + 3 s^2.  Both are
computed here from the Christoffel symbols of the scaled metric, nothing is
plugged in by hand.
"""

import numpy as np

from curvforge import suites

print(f"{'s':>5} {'vertizontal':>14} {'1-s^2':>8} {'horizontal':>14} {'1+3s^2':>8}")
for s in np.linspace(0.0, 0.9, 10):
    vz, hz = suites.berger(s)
    print(f"{s:5.2f} {vz:14.10f} {1 - s * s:8.4f} {hz:14.10f} {1 + 3 * s * s:8.4f}")

worst = suites.detlef("hopf", 0.5, np.random.default_rng(0), n=10)
print("\nworst canonical-variation identity residuals at s = 0.5:")
for k, v in worst.items():
    print(f"  {k:<14} {v:.2e}")
