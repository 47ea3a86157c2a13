"""Schwarz symmetrization and the merge of two radial bumps."""

import numpy as np

from normsys import Domain, Field, merge_star, property_suite, schwarz

d = Domain.radial(2, 12.0, 2000)
ring = Field(d, np.exp(-((d.r - 5.0) ** 2)))
s = schwarz(ring)
print("ring:      L2^2 = %.6f  Dirichlet = %.6f" % (d.integrate(ring.values[0] ** 2), d.grad_norm_sq(ring.values[0])))
print("rearranged L2^2 = %.6f  Dirichlet = %.6f" % (s.domain.integrate(s.values[0] ** 2), s.domain.grad_norm_sq(s.values[0])))

f = Field(d, np.exp(-d.r**2))
g = Field(d, 0.5 * np.exp(-(d.r**2) / 2))
m = merge_star(f, g)
print()
print("merge: L2^2 %.6f = %.6f + %.6f" % (m.domain.integrate(m.values[0] ** 2), d.integrate(f.values[0] ** 2),
                                          d.integrate(g.values[0] ** 2)))
print("       Dirichlet %.6f < %.6f + %.6f" % (m.domain.grad_norm_sq(m.values[0]), d.grad_norm_sq(f.values[0]),
                                                d.grad_norm_sq(g.values[0])))
print()
for c in property_suite(Domain.radial(2, 12.0, 4000), trials=50):
    print(c.line())
