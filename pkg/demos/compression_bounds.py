"""Where (psi')^2 of the compressed profile actually sits on [0, nu].

The quoted lower bound 0.97/(rho^2 + 1) is far above what the profile
attains; the minimum tracks (1 + rho^2)^-3 instead, reached at t = nu.
"""

from curvforge import compression as C
from curvforge import suites

for rho, nu, m, thr in suites.compression_lower(nus=(1e-3, 1e-4)):
    print(f"rho={rho:<4} nu={nu:<7g} min (psi')^2 = {m:.6f}   (1+rho^2)^-3 = {(1 + rho * rho) ** -3:.6f}"
          f"   quoted bound {thr:.4f}")

fit, expected = suites.compression_exponent(0.5)
print(f"\ndecay exponent on [nu^beta, pi/4]: fitted {fit:.3f}, quoted {expected:.3f}")
b = C.compression_bounds(C.CompressionConfig())
for row in b.sweep:
    print("  ", row)
