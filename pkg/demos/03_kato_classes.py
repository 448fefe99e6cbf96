"""Which potentials are small enough?

K^{gamma,beta}(eps) measures how much of f the kernel profile sees over a
time window eps.  A field belongs to the class when K(eps) decays to zero.
"""

import math

from scipy.special import beta as beta_fn

from fracheat.fields import Bump, Constant, RadialPower
from fracheat.geometry import euclidean_box
from fracheat.kato import LqLpSpec, class_membership_test, k_functional, lqlp_predicate
from fracheat.kernels import XiProfile

alpha = 1.5
box = euclidean_box(1, 10.0)
prof = XiProfile(alpha, 1)

# f = 1: the space integral of xi is 2 (1 + 1/alpha) for every s
one = Constant(box, kappa=1.0)
eps = 0.1
print("K00:", k_functional(one, prof, 0, 0, eps), "closed form", 2 * (1 + 1 / alpha) * eps)
k11 = 2 * (1 + 1 / alpha) * beta_fn(1 - 1 / alpha, 1 - 1 / alpha) * eps ** ((alpha - 1) / alpha)
print("K11:", k_functional(one, prof, 1, 1, eps), "closed form", k11)

# decay tables: a bump and a mild power are in the class; |x|^-1.5 is not even integrable in d = 1
for name, f in (("bump", Bump(box, center=(0.0,), width=0.5, height=2.0)),
                ("|x|^-0.25", RadialPower(box, center=(0.0,), theta=0.25, cutoff=1.0)),
                ("|x|^-1.5", RadialPower(box, center=(0.0,), theta=1.5, cutoff=1.0))):
    tab = class_membership_test(f, prof, 1, 1)
    print(f"{name:10s} rate {tab.rate:.3f} member {tab.member}")

# the integrability criterion d/p + alpha/q < alpha - gamma
for p, q in ((math.inf, math.inf), (4, 8), (2, 3)):
    rep = lqlp_predicate(LqLpSpec(p, q, 1, 1), 1, alpha)
    print(f"p = {p}, q = {q}: {rep['ok']} (space margin {rep['space_margin']:.4f})")
