"""Two-sided bounds for the alpha-stable heat kernel.

p(t, x, y) is compared against the profile
xi(t, r) = t / (M (r v t^(1/alpha))^alpha) + t / (r v t^(1/alpha))^(d + alpha)
on the unbounded box and on the torus.
"""

import numpy as np

from fracheat.geometry import euclidean_box, torus
from fracheat.kernels import (
    BaseKernel, FracKernel, SampleSpec, XiProfile, grad_bound_report, normalization_defect, tail_slope,
    two_sided_report,
)
from fracheat.subordinator import SubordinatorSpec

alpha = 1.5
box = FracKernel(BaseKernel(euclidean_box(1, 10.0)), SubordinatorSpec(alpha))
circ = FracKernel(BaseKernel(torus(1, 1.0)), SubordinatorSpec(alpha))

# both kernels carry unit mass
print("mass defect box  :", normalization_defect(box, 1.0, nodes=401))
print("mass defect torus:", normalization_defect(circ, 0.1, nodes=128))

# the kernel along a ray, divided by the profile
prof = XiProfile.for_kernel(box)
r = np.array([0.0, 0.5, 1.0, 5.0, 50.0])
print("p / xi at t = 1:", box.value(1.0, [0.0], r[:, None]) / prof(1.0, r))

# heavy tail: log-log slope -(d + alpha)
print("tail slope:", tail_slope(box), "expected", -(1 + alpha))

# constants of the two-sided bound and of the gradient bound
sample = SampleSpec(n=128)
for name, k in (("box", box), ("torus", circ)):
    two = two_sided_report(k, sample=sample)
    g = grad_bound_report(k, 1, sample=sample)
    print(f"{name:5s} c_low {two['c_low']:.4f} c_high {two['c_high']:.4f} (drift {two['drift']:.1e}); "
          f"gradient {g['constant']:.4f}")
