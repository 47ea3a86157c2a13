"""Cubic ground state in one dimension, checked against the sech profile.

For F(u) = u^4 / 4 and mass a^2 the minimizer is sqrt(2) B sech(B r) with
B = a^2 / 4, energy -a^6 / 96 and multiplier a^4 / 16.
"""

import numpy as np

from normsys import Domain, Nonlinearity, Power, minimize, verify_ground_state

F = Nonlinearity(1, 1, [Power(0, 1.0, 4)])
a = 1.0
res = minimize(F, [a], Domain.radial(1, 60.0, 8192))

B = a**2 / 4
exact = np.sqrt(2) * B / np.cosh(B * res.u.domain.r)
print(f"energy      {res.energy:.10f}   closed form {-(a**6) / 96:.10f}")
print(f"multiplier  {res.lam[0]:.10f}   closed form {a**4 / 16:.10f}")
print(f"profile max deviation from sech: {np.abs(res.u.values[0] - exact).max():.2e}")
print(f"iterations {res.iterations}, converged {res.converged}")
print()
for line in verify_ground_state(F, [a], res, strict_monotone=True).lines():
    print(line)
