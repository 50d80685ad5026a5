"""Reading the spin-orbit coefficient off the energy.

In a weak central electric field the energy of a slowly moving spinning
particle contains a term proportional to (phi'(r)/r) <S, L>.  We regress the
energy over a random family of states at several field strengths and
extrapolate the coefficient to zero field.  The Stora coefficients give
-(g-1)q/(2m^2), which includes the Thomas half; the Souriau coefficients
give -gq/(2m^2).
"""
import numpy as np

from presymspin import fields
from presymspin.evolution_space import ModelCoefficients
from presymspin.observables import spin_orbit_family, spin_orbit_fit

states = spin_orbit_family(40, np.random.default_rng(0))
field = fields.coulomb(0.05)
eps = [4e-3, 2e-3, 1e-3]

fits = {}
for preset in ("stora", "souriau"):
    fit = spin_orbit_fit(ModelCoefficients.from_preset(preset, 1.0, 1.0, 1.0, 2.0), field, states, eps)
    fits[preset] = fit
    print(f"{preset}: fitted {fit.c:.8f} +- {fit.stderr:.1e}, expected {fit.theory:.8f}")
    for e, c, se in fit.per_eps:
        print(f"   eps {e:.0e}: {c:.8f}")
print(f"\nratio stora / souriau = {fits['stora'].c / fits['souriau'].c:.8f}  (expected (g-1)/g = 0.5)")
