"""The clock behind the alpha-stable kernel.

The one-sided stable law with Laplace exponent lam^(alpha/2) drives the
subordination.  Its density has no closed form except at alpha = 1, so we
check it there and then look at the Laplace identity for the working range.
"""

import math

import numpy as np

from fracheat.subordinator import SubordinatorSpec, density, laplace, laplace_report

# alpha = 1: the clock is the Levy law with density (4 pi)^(-1/2) s^(-3/2) e^(-1/(4s))
spec1 = SubordinatorSpec(1.0)
s = np.array([0.05, 0.5, 1.0, 5.0, 50.0])
exact = s**-1.5 * np.exp(-1 / (4 * s)) / math.sqrt(4 * math.pi)
print("alpha = 1 density vs closed form")
for si, got, want in zip(s, density(spec1, 1.0, s), exact):
    print(f"  s = {si:6.2f}  {got:.15f}  {want:.15f}")

# the Laplace transform should be exp(-t lam^(alpha/2)) for every alpha
for alpha in (1.2, 1.5, 1.8):
    rep = laplace_report(SubordinatorSpec(alpha), (0.25, 1.0, 4.0), (0.1, 0.5, 1.0, 2.0, 5.0, 10.0))
    print(f"alpha = {alpha}: max relative Laplace error {rep['max_rel_error']:.2e}")

# lam = 0 gives total mass one
print("mass:", laplace(SubordinatorSpec(1.5), 1.0, 0.0))
