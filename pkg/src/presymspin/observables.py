"""Moment-map observables for static fields: energy, angular momentum, spin-orbit term.

Sign convention for the energy.  With the two-form's Lorentz term
``q d1Xbar F d2X`` and ``F`` carrying ``E = -grad(phi)`` in its electric
block, time translations have moment map

    H = Ubar P - q phi,

so ``-q phi`` is the potential energy of the charge.  In the lab frame this is
``gamma (m + k alpha) - q phi``.
"""
from dataclasses import dataclass

import numpy as np

from .evolution_space import EvolutionPoint, momentum
from .fields import NoPotential, REST_OBSERVER
from .minkowski import (
    _alpha,
    _spin_tensor,
    lab_decompose,
    lower,
    skew_parts,
    uncross,
)


def _F(field, X):
    return np.zeros((4, 4)) if field is None else field.field(X)


def potential_energy(coeffs, point, field):
    """``-q phi(X)``; zero without a field."""
    if field is None:
        return 0.0
    return -coeffs.q * field.potential(point.X)


def energy(coeffs, point, field):
    """Energy moment map ``Ubar P - q phi`` for the observer of ``field``."""
    U = REST_OBSERVER if field is None else field.U
    P = momentum(coeffs, point, _F(field, point.X))
    return float(lower(U) @ P) + potential_energy(coeffs, point, field)


def energy_lab(coeffs, point, field):
    """Lab-frame energy ``gamma (m + k alpha) - q phi``."""
    st = lab_decompose(point.X, point.I, point.J)
    alpha = _alpha(point.I, point.J, _F(field, point.X))
    return st.gamma * (coeffs.m + coeffs.k * alpha) + potential_energy(coeffs, point, field)


def energy_or_nan(coeffs, point, field):
    try:
        return energy(coeffs, point, field)
    except NoPotential:
        return float("nan")


def moment_matrix(coeffs, point, field):
    """``X Pbar - P Xbar + s Omega``; its spatial block is ``j(J)``."""
    X = point.X
    P = momentum(coeffs, point, _F(field, X))
    return np.outer(X, lower(P)) - np.outer(P, lower(X)) + coeffs.s * _spin_tensor(point.I, point.J)


def total_angular_momentum(coeffs, point, field):
    """Rotation moment map read off the spatial block of the moment matrix."""
    return uncross(moment_matrix(coeffs, point, field)[:3, :3])


@dataclass(frozen=True)
class MomentReport:
    H: float
    Jvec: np.ndarray
    L: np.ndarray
    S: np.ndarray
    alpha: float
    SL: float
    spin_orbit_term: float


def angular_momentum(coeffs, point, field):
    """Lab decomposition ``J = L + S`` for an electric-like field.

    ``L = r x (gamma M v + gamma~ l u x E)`` and
    ``S = s gamma gamma~ (u - v <u, v>)``.
    """
    st = lab_decompose(point.X, point.I, point.J)
    F = _F(field, point.X)
    b, E = skew_parts(F)
    if np.any(np.abs(b) > 1e-15):
        raise ValueError("lab decomposition needs an electric-like field (no magnetic part)")
    g, gt = st.gamma, st.gamma_tilde
    alpha = _alpha(point.I, point.J, F)
    M = coeffs.m + coeffs.k * alpha
    p = g * M * st.v + gt * coeffs.l * np.cross(st.u, E)
    L = np.cross(st.r, p)
    S = coeffs.s * g * gt * (st.u - st.v * np.dot(st.u, st.v))
    SL = float(np.dot(S, L))
    try:
        H = energy(coeffs, point, field)
    except NoPotential:
        H = float("nan")
    term = float("nan")
    profile = getattr(field, "profile", None)
    if profile is not None:
        rn = float(np.linalg.norm(st.r))
        term = coeffs.spin_orbit_coefficient() * profile(rn, 1) / rn * SL
    return MomentReport(H, L + S, L, S, alpha, SL, term)


@dataclass(frozen=True)
class ConservationReport:
    H_drift: float
    J_drift: np.ndarray  # per component, relative to |J(0)|
    H0: float
    J0: np.ndarray

    @property
    def max_drift(self):
        return max(self.H_drift, float(np.max(self.J_drift)))


def conservation_report(trajectory, coeffs, field):
    """Relative drift of the energy and of each angular-momentum component.

    Component drifts are normalized by ``|J(0)|`` so that components which
    start near zero are not inflated.
    """
    Hs, Js = [], []
    for y in trajectory.states:
        point = EvolutionPoint.from_array(y)
        Hs.append(energy(coeffs, point, field))
        Js.append(total_angular_momentum(coeffs, point, field))
    Hs, Js = np.array(Hs), np.array(Js)
    H0, J0 = Hs[0], Js[0]
    H_drift = float(np.max(np.abs(Hs - H0)) / abs(H0))
    Jn = float(np.linalg.norm(J0))
    J_drift = np.max(np.abs(Js - J0), axis=0) / (Jn if Jn > 0 else 1.0)
    return ConservationReport(H_drift, J_drift, float(H0), J0)


class IllConditionedFit(ValueError):
    pass


def spin_orbit_family(n, rng, r_range=(1.0, 3.0), v_max=0.3, perpendicular=False):
    """Random lab states ``(r, v, u)``.

    With ``perpendicular`` the spin ``u`` is orthogonal to ``r x v`` so that
    the spin-orbit product vanishes at leading order.
    """
    from .minkowski import LabFrameState

    out = []
    for _ in range(n):
        r = rng.normal(size=3)
        r *= rng.uniform(*r_range) / np.linalg.norm(r)
        v = rng.normal(size=3)
        v *= rng.uniform(0.2, 1.0) * v_max / np.linalg.norm(v)
        u = rng.normal(size=3)
        if perpendicular:
            n_ = np.cross(r, v)
            n_ /= np.linalg.norm(n_)
            u -= np.dot(u, n_) * n_
        u /= np.linalg.norm(u)
        out.append(EvolutionPoint.from_lab(LabFrameState(r=r, t=0.0, v=v, u=u)))
    return out


@dataclass(frozen=True)
class SpinOrbitFit:
    """Fitted coefficient of ``(phi'(r)/r) <S, L>`` in ``H - m gamma + q phi``.

    ``per_eps`` rows are ``(eps, c, stderr)``; ``c`` is the zero-field
    extrapolation of those slopes.
    """

    c: float
    stderr: float
    theory: float
    per_eps: np.ndarray

    @property
    def rel_error(self):
        return abs(self.c - self.theory) / abs(self.theory) if self.theory else abs(self.c)


def spin_orbit_regression(coeffs, field, states):
    """Through-origin regression of ``H - m gamma + q phi`` on ``(phi'/r) <S, L>``."""
    x, y, scale = [], [], []
    for point in states:
        st = lab_decompose(point.X, point.I, point.J)
        rep = angular_momentum(coeffs, point, field)
        rn = float(np.linalg.norm(st.r))
        d1 = field.profile(rn, 1) / rn
        x.append(d1 * rep.SL)
        y.append(rep.H - coeffs.m * st.gamma - potential_energy(coeffs, point, field))
        # size of the regressor when u is aligned with r x v
        scale.append(abs(d1) * coeffs.s * coeffs.m * rn * np.linalg.norm(st.v))
    x, y = np.array(x), np.array(y)
    sxx = float(x @ x)
    if len(x) < 3 or np.sqrt(sxx / len(x)) <= 1e-10 * max(scale):
        raise IllConditionedFit("ill-conditioned fit: the family has no spread in <S, L>")
    c = float(x @ y) / sxx
    resid = y - c * x
    stderr = float(np.sqrt(resid @ resid / (len(x) - 1) / sxx))
    return c, stderr


def spin_orbit_fit(coeffs, field, states, eps_list):
    """Spin-orbit coefficient over a family of states, extrapolated to zero field."""
    eps_list = np.asarray(eps_list, dtype=float)
    rows = []
    for eps in eps_list:
        c, se = spin_orbit_regression(coeffs, field.scaled(float(eps)), states)
        rows.append((eps, c, se))
    rows = np.array(rows)
    if len(rows) >= 2 and np.ptp(rows[:, 0]) > 0:
        slope, intercept = np.polyfit(rows[:, 0], rows[:, 1], 1)
        c0 = float(intercept)
    else:
        c0 = float(rows[0, 1])
    stderr = float(np.max(rows[:, 2]))
    return SpinOrbitFit(c0, stderr, coeffs.spin_orbit_coefficient(), rows)
