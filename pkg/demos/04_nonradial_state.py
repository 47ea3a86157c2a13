"""A sign-changing, nonradial ground state in four dimensions.

Functions of (|x1|, |x2|) with x1, x2 in R^2 that are odd under swapping the
two blocks contain no radial function besides zero.  Minimizing over that
class gives a nonradial critical point whose energy sits strictly above the
radial ground state.  Takes about half a minute.
"""

import numpy as np

from normsys import Domain, Nonlinearity, Power, minimize

F = Nonlinearity(1, 4, [Power(0, 1.0, 2.5)])
a = 32.0
odd = minimize(F, [a], Domain.biradial(60.0, 256), symmetry="X")
radial = minimize(F, [a], Domain.radial(4, 60.0, 4096))

U = odd.u.values[0]
print(f"odd class:  J = {odd.energy:.6f}, lambda = {odd.lam[0]:.6f}, converged {odd.converged}")
print(f"radial:     J = {radial.energy:.6f}, lambda = {radial.lam[0]:.6f}")
print(f"energy gap: {odd.energy - radial.energy:.6f}")
print(f"swap defect |u + u^T|: {np.abs(U + U.T).max():.1e}")
