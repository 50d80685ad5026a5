"""Presymplectic models of relativistic spinning charged particles.

Souriau's model and the Stora family of two-forms on the evolution space
``V = {(X, I, J) : I^2 = 1, J^2 = -1, Ibar J = 0}``: kernel of the two-form,
integration of its characteristic flow, weak-field comparison with the BMT
equations, and moment-map observables in static fields.
"""
from .config import RunConfig
from .dynamics import (
    IntegrationError,
    Trajectory,
    bmt_reference_rhs,
    convergence_study,
    integrate,
    linearized_rhs,
    multiplier_diagnostics,
)
from .evolution_space import (
    AmbientTangent,
    EvolutionPoint,
    ModelCoefficients,
    momentum,
    project_to_V,
    starred_frame,
)
from .fields import CentralField, LinearField, RadialProfile, UniformField, check_maxwell
from .minkowski import (
    ConstraintError,
    LabFrameState,
    coupling_alpha,
    hodge_star,
    lab_compose,
    lab_decompose,
    mink_inner,
    spin_tensor,
)
from .observables import (
    angular_momentum,
    conservation_report,
    energy,
    spin_orbit_fit,
    total_angular_momentum,
)
from .presymplectic import (
    KernelError,
    TwoFormModel,
    closedness_residual,
    kernel,
    rank_at,
    sigma_eval,
    sigma_matrix,
)

__version__ = "0.1.0"
