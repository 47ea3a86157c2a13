"""The ground-state energy map: monotone in the mass and strictly subadditive.

Each mass gets its own radial grid sized to the decay length of the state.
"""

import numpy as np

from normsys import Domain, Nonlinearity, Power, scan_energy_map, subadditivity_check


def grid_for(mass):
    return Domain.radial(1, 48.0 / float(mass.norm) ** 2, 4096)


F = Nonlinearity(1, 1, [Power(0, 1.0, 4)])
records = scan_energy_map(F, [[a] for a in np.arange(0.5, 2.01, 0.25)], grid_for)
print("   a        m(a)          m(a) / a^6")
for r in records:
    a = r.a.a[0]
    print(f"{a:5.2f}  {r.m:+.8e}  {r.m / a**6:+.8f}")
print("closed form ratio -1/96 =", f"{-1 / 96:+.8f}")

rep = subadditivity_check(F, [1.0], [1.0], grid_for)
print()
print(f"m(1) + m(1) - m(sqrt 2) = {rep.slack:.8f}   (6/96 = {6 / 96:.8f})")
for c in rep.checks():
    print(c.line())
