"""The perturbed kernel solves the equation weakly.

For smooth phi, psi the difference quotient of (P_t phi, psi) should approach
(L phi + b.grad phi + c phi, psi) linearly in t.
"""

from fracheat.duhamel import generator_weak_check
from fracheat.fields import Bump, BumpDrift
from fracheat.geometry import torus
from fracheat.kernels import BaseKernel, FracKernel
from fracheat.subordinator import SubordinatorSpec

k = FracKernel(BaseKernel(torus(1, 16.0)), SubordinatorSpec(1.5))
dom = k.domain
phi = Bump(dom, center=(8.0,), width=2.0, height=1.0)
psi = Bump(dom, center=(8.5,), width=2.5, height=1.0)
b = BumpDrift(dom, center=(8.0,), width=1.5, vector=(0.5,))
c = Bump(dom, center=(7.5,), width=1.5, height=0.5)

rep = generator_weak_check(k, b, c, phi, psi)
for step, rel in zip(rep["steps"], rep["relative"]):
    print(f"t - s = {step:6.3f}   |R| / scale = {rel:.5f}")
# two evaluations of (L phi, psi): the heat-semigroup extrapolation and the exact symbol
print("Richardson:", rep["generator_richardson"], "symbol:", rep["generator_symbol"])
