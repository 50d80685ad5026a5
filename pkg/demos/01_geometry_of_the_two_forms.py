"""Walk through the evolution space and the three two-forms.

We build a lab-frame state, lift it to (X, I, J), and look at the
characteristic direction of the free, Souriau and Stora two-forms in a
uniform field.  The free form moves the particle along I; the field-dependent
forms tilt the velocity away from the kinetic direction I*.  At first order
in the field that tilt is proportional to 1 - g/2, so at g = 2 only a
second-order remainder survives in the exact flow.
"""
import numpy as np

from presymspin import fields
from presymspin.dynamics import linearized_rhs
from presymspin.evolution_space import EvolutionPoint, ModelCoefficients, starred_frame
from presymspin.minkowski import LabFrameState, coupling_alpha, mink_inner, skew_from_parts
from presymspin.presymplectic import TwoFormModel, closedness_residual, kernel, rank_at

lab = LabFrameState(r=[1.0, 0.5, 1.2], t=0.0, v=[0.2, -0.1, 0.3], u=np.array([0.6, 0.0, 0.8]))
point = EvolutionPoint.from_lab(lab)
print("lab state    gamma = %.6f, gamma~ = %.6f" % (lab.gamma, lab.gamma_tilde))
print("I =", np.round(point.I, 6), " J =", np.round(point.J, 6))

F = 0.05 * skew_from_parts([0.6, 0.2, -0.4], [0.3, -0.5, 0.8])
print("spin-field coupling alpha = %.3e\n" % coupling_alpha(point.I, point.J, F))

for g in (2.0, 2.5):
    print(f"g = {g}")
    for name in ("free", "souriau", "stora"):
        coeffs = ModelCoefficients.from_preset(name, 1.0, 1.0, 1.0, g)
        model = TwoFormModel(name, coeffs, fields.uniform(F))
        sol = kernel(model, point)
        dX = sol.delta.dX
        # velocity component transverse to the kinetic direction I*
        Is = starred_frame(coeffs, point, F).I_star
        off = np.linalg.norm(dX - mink_inner(Is, dX) * Is)
        line = (f"  {name:8s} rank {rank_at(model, point)}  closedness {closedness_residual(model, point):.1e}"
                f"  exact dX off I* {off:.2e}")
        if name != "free":
            lin = linearized_rhs(coeffs, point, F).dX
            line += f"  linearized {np.linalg.norm(lin - mink_inner(Is, lin) * Is):.2e}"
        print(line)
    print()

print("At g = 2 the linearized velocity lies on I* to round-off and the exact one")
print("departs only at second order; at g = 2.5 both carry a first-order anomalous velocity.")
