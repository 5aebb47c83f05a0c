"""Cheeger-deform the flat plane by rotations: Gauss curvature at the origin is 3/l^2.

Large l gives back the flat metric; small l bends the plane into a
paraboloid-like cap.
"""

from curvforge import suites

for l in (0.25, 0.5, 1.0, 2.0, 4.0):
    K = float(suites.cheeger_gauss(l))
    print(f"l = {l:5.2f}   K(0) = {K:12.8f}   3/l^2 = {3 / l ** 2:12.8f}")

print(f"\nmetric drift at l = 1e6: {suites.cheeger_limit(1e6):.2e}")

l_zero, l_bound = suites.cheeger_crossing()
print(f"warped R^3 mixed plane is positive for l < {l_zero:.6f}; the lower bound guarantees l < {l_bound:.6f}")
