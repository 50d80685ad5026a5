"""The nine-dimensional evolution space and the model coefficients on it."""
from dataclasses import dataclass, field

import numpy as np

from .minkowski import (
    ConstraintError,
    _alpha,
    _spin_tensor,
    _star,
    check_constraints,
    constraint_residuals,
    lab_compose,
    lower,
    mink_inner,
    mink_square,
)

PRESETS = ("free", "souriau", "stora", "custom")


def _frozen(a):
    a = np.array(a, dtype=float)
    if a.shape != (4,):
        raise ValueError(f"expected a 4-vector, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EvolutionPoint:
    """A triple ``(X, I, J)`` with ``I^2 = 1``, ``J^2 = -1``, ``Ibar J = 0``, ``I`` future-pointing."""

    X: np.ndarray
    I: np.ndarray
    J: np.ndarray
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "X", _frozen(self.X))
        object.__setattr__(self, "I", _frozen(self.I))
        object.__setattr__(self, "J", _frozen(self.J))
        if self.I[3] <= 0.0:
            raise ConstraintError("I is not future-pointing")
        check_constraints(self.I, self.J, self.tol)

    @classmethod
    def from_array(cls, y, tol=1e-9):
        y = np.asarray(y, dtype=float)
        return cls(y[:4], y[4:8], y[8:12], tol=tol)

    @classmethod
    def from_lab(cls, state):
        return cls(*lab_compose(state))

    def as_array(self):
        return np.concatenate([self.X, self.I, self.J])

    def residuals(self):
        return constraint_residuals(self.I, self.J)


@dataclass(frozen=True)
class AmbientTangent:
    """A tangent vector ``(dX, dI, dJ)`` of the ambient chart R^12."""

    dX: np.ndarray
    dI: np.ndarray
    dJ: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dX", _frozen(self.dX))
        object.__setattr__(self, "dI", _frozen(self.dI))
        object.__setattr__(self, "dJ", _frozen(self.dJ))

    @classmethod
    def from_array(cls, y):
        y = np.asarray(y, dtype=float)
        return cls(y[:4], y[4:8], y[8:12])

    def as_array(self):
        return np.concatenate([self.dX, self.dI, self.dJ])

    def tangency_residuals(self, point):
        I, J = point.I, point.J
        return (
            mink_inner(I, self.dI),
            mink_inner(J, self.dJ),
            mink_inner(J, self.dI) + mink_inner(I, self.dJ),
        )

    def is_tangent(self, point, tol=1e-9):
        return max(abs(r) for r in self.tangency_residuals(point)) <= tol


def tangent_constraint_matrix(point):
    """3x12 matrix whose kernel is the tangent space of V at ``point``."""
    C = np.zeros((3, 12))
    gI, gJ = lower(point.I), lower(point.J)
    C[0, 4:8] = gI
    C[1, 8:12] = gJ
    C[2, 4:8] = gJ
    C[2, 8:12] = gI
    return C


@dataclass(frozen=True)
class ModelCoefficients:
    """Particle constants ``(m, s, q, g)`` and the momentum parameters ``(k, l)``.

    Use the preset constructors; ``custom`` takes ``k`` and ``l`` verbatim.
    """

    m: float
    s: float
    q: float
    g: float
    k: float
    l: float
    preset: str = "custom"

    def __post_init__(self):
        if self.m <= 0 or self.s <= 0:
            raise ValueError("mass and spin must be positive")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")

    @classmethod
    def free(cls, m, s, q=0.0, g=2.0):
        return cls(m, s, q, g, 0.0, 0.0, "free")

    @classmethod
    def souriau(cls, m, s, q, g):
        return cls(m, s, q, g, -0.5 * g * q * s / m, 0.0, "souriau")

    @classmethod
    def stora(cls, m, s, q, g):
        return cls(m, s, q, g, -0.5 * (g - 1.0) * q * s / m, -0.5 * q * s / m, "stora")

    @classmethod
    def custom(cls, m, s, q, g, k, l):
        return cls(m, s, q, g, k, l, "custom")

    @classmethod
    def from_preset(cls, preset, m, s, q, g, k=None, l=None):
        if preset == "custom":
            if k is None or l is None:
                raise ValueError("custom preset needs explicit k and l")
            return cls.custom(m, s, q, g, k, l)
        if k is not None or l is not None:
            raise ValueError(f"preset {preset!r} fixes k and l; use preset 'custom' to override")
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}")
        return getattr(cls, preset)(m, s, q, g)

    @property
    def qs_over_m(self):
        return self.q * self.s / self.m

    @property
    def bmt_compatible(self):
        """Whether ``k + l = -(g/2) q s / m``, the condition for the BMT spin equation."""
        return abs(self.k + self.l + 0.5 * self.g * self.qs_over_m) <= 1e-12

    def spin_orbit_coefficient(self):
        """Coefficient of ``(phi'/r) <S, L>`` in the weak-field energy, ``k / (s m)``."""
        return self.k / (self.s * self.m)


def project_to_V(X, I, J):
    """Restore the constraints: normalize I, orthogonalize J against I, normalize J."""
    X = np.asarray(X, dtype=float)
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    I2 = mink_square(I)
    if not I2 > 0.0 or I[3] <= 0.0:
        raise ConstraintError("state left the timelike cone")
    I = I / np.sqrt(I2)
    J = J - mink_inner(I, J) * I
    J2 = mink_square(J)
    if not J2 < 0.0:
        raise ConstraintError("degenerate spin direction")
    J = J / np.sqrt(-J2)
    return EvolutionPoint(X, I, J, tol=1e-14)


def dressed_mass(coeffs, point, F):
    """``M = m + k alpha``."""
    return coeffs.m + coeffs.k * _alpha(point.I, point.J, F)


def _momentum(I, J, F, k, l, m):
    starF = _star(F)
    alpha = float(lower(I) @ starF @ J)
    return (m + k * alpha) * I + l * (starF @ J)


def momentum(coeffs, point, F):
    """``P = (m + k alpha) I + l star(F) J``."""
    return _momentum(point.I, point.J, F, coeffs.k, coeffs.l, coeffs.m)


def momentum_jacobian(coeffs, I, J, F):
    """``(dP/dI, dP/dJ)`` at fixed ``F`` as two 4x4 matrices."""
    starF = _star(F)
    alpha = float(lower(I) @ starF @ J)
    a_I = lower(starF @ J)  # d alpha / dI
    a_J = lower(I) @ starF  # d alpha / dJ
    dPdI = (coeffs.m + coeffs.k * alpha) * np.eye(4) + coeffs.k * np.outer(I, a_I)
    dPdJ = coeffs.k * np.outer(I, a_J) + coeffs.l * starF
    return dPdI, dPdJ


@dataclass(frozen=True)
class StarredFrame:
    I_star: np.ndarray
    Omega_star: np.ndarray
    P_norm: float
    J_residual: float  # Jbar I*, zero up to round-off since Jbar star(F) J = 0


def starred_frame(coeffs, point, F, c=None):
    """``I* = P / |P|`` and ``Omega* = j(I*, J)``.

    ``Jbar P = l Jbar star(F) J`` vanishes identically, so ``J`` stays
    orthogonal to ``I*``; ``c`` still lets callers require
    ``|Jbar I*| <= c * max|F|`` as a safeguard.
    """
    P = momentum(coeffs, point, F)
    P2 = mink_square(P)
    if not P2 > 0.0:
        raise ConstraintError("momentum left the timelike cone (field too strong)")
    Pn = np.sqrt(P2)
    I_star = P / Pn
    jres = mink_inner(point.J, I_star)
    if c is not None and abs(jres) > c * float(np.max(np.abs(F))):
        raise ConstraintError(f"|Jbar I*| = {abs(jres):.3e} exceeds {c} * |F|")
    return StarredFrame(I_star, _spin_tensor(I_star, point.J), float(Pn), float(jres))
