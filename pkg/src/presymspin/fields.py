"""External electromagnetic field models.

Every model answers three questions at an event ``X``: the field matrix
``F(X)``, its directional derivative, and (for static electric fields) the
scalar potential ``phi`` with ``E = -grad(phi)``.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .minkowski import METRIC, check_skew, electric_field_matrix, skew_parts

REST_OBSERVER = np.array([0.0, 0.0, 0.0, 1.0])
REST_OBSERVER.setflags(write=False)


class FieldSingularity(ValueError):
    pass


class NoPotential(ValueError):
    pass


@dataclass(frozen=True)
class UniformField:
    """Constant field ``F0``; a potential exists once a gauge origin is set."""

    F0: np.ndarray
    gauge_origin: np.ndarray = None
    U: np.ndarray = field(default_factory=lambda: REST_OBSERVER.copy())

    kind = "uniform"

    def __post_init__(self):
        F0 = check_skew(np.array(self.F0, dtype=float), tol=1e-12)
        F0.setflags(write=False)
        object.__setattr__(self, "F0", F0)
        if self.gauge_origin is not None:
            object.__setattr__(self, "gauge_origin", np.array(self.gauge_origin, dtype=float))

    def field(self, X):
        return self.F0

    def gradients(self, X):
        return np.zeros((4, 4, 4))

    def potential(self, X):
        _, e = skew_parts(self.F0)
        if not np.any(e):
            return 0.0
        if self.gauge_origin is None:
            raise NoPotential("no global static potential: uniform field has an electric part "
                              "and no gauge origin is configured")
        return -float(np.dot(e, np.asarray(X, dtype=float)[:3] - self.gauge_origin[:3]))

    def scaled(self, eps):
        return replace(self, F0=eps * self.F0)


@dataclass(frozen=True)
class RadialProfile:
    """Potential profile ``phi(r)`` with its first two derivatives."""

    name: str
    kappa: float = 1.0
    table: tuple = None  # (r, phi) samples for the tabulated profile

    def __post_init__(self):
        if self.name not in ("coulomb", "harmonic", "tabulated"):
            raise ValueError(f"unknown profile {self.name!r}")
        if self.name == "tabulated":
            if self.table is None:
                raise ValueError("tabulated profile needs (r, phi) samples")
            r, phi = (np.asarray(a, dtype=float) for a in self.table)
            object.__setattr__(self, "table", (r, phi))
            object.__setattr__(self, "_pieces", _build_pieces(r, phi))

    def __call__(self, r, nu=0):
        k = self.kappa
        if self.name == "coulomb":
            return (k / r, -k / r**2, 2.0 * k / r**3)[nu]
        if self.name == "harmonic":
            return (0.5 * k * r**2, k * r, k)[nu]
        return k * _eval_pieces(self._pieces, r, nu)

    @property
    def knots(self):
        return self.table[0] if self.table is not None else np.array([])

    def audit_radii(self):
        """Radii where a tabulated profile should be checked for ``dF = 0``.

        Interval midpoints (where the spline is smooth) plus every repeated
        radius, which is where a table can hide a jump.
        """
        if self.table is None:
            return np.array([])
        r = self.table[0]
        u = np.unique(r)
        breaks = r[1:][np.diff(r) == 0]
        return np.concatenate([0.5 * (u[1:] + u[:-1]), breaks])


def _build_pieces(r, phi):
    # repeated radii split the table into independent spline pieces
    if np.any(np.diff(r) < 0):
        raise ValueError("tabulated radii must be non-decreasing")
    breaks = np.flatnonzero(np.diff(r) == 0) + 1
    pieces = []
    for rs, ps in zip(np.split(r, breaks), np.split(phi, breaks)):
        if len(rs) < 2:
            raise ValueError("each tabulated segment needs at least two samples")
        pieces.append((rs[0], rs[-1], CubicSpline(rs, ps)))
    return pieces


def _eval_pieces(pieces, r, nu):
    for lo, hi, spl in pieces:
        if r < hi:
            return float(spl(r, nu))
    return float(pieces[-1][2](r, nu))


def load_profile_table(path):
    """Two-column text file ``r phi`` (``#`` comments allowed)."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (r, phi), got {data.shape[1]}")
    return data[:, 0], data[:, 1]


@dataclass(frozen=True)
class CentralField:
    """Static central electric field ``E = -phi'(r) r / r`` about the origin."""

    profile: RadialProfile
    r_min: float = 1e-6
    U: np.ndarray = field(default_factory=lambda: REST_OBSERVER.copy())

    kind = "central_electric"

    def _radius(self, X):
        r = np.asarray(X, dtype=float)[:3]
        rn = float(np.sqrt(r @ r))
        if rn <= self.r_min:
            raise FieldSingularity(f"field singularity: |r| = {rn:.3e} <= r_min = {self.r_min:.3e}")
        return r, rn

    def electric(self, X):
        r, rn = self._radius(X)
        return -self.profile(rn, 1) * r / rn

    def field(self, X):
        return electric_field_matrix(self.electric(X))

    def electric_jacobian(self, X):
        """``dE_i / dr_j``."""
        r, rn = self._radius(X)
        d1 = self.profile(rn, 1)
        d2 = self.profile(rn, 2)
        rr = np.outer(r, r) / rn**2
        return -(d2 * rr + d1 / rn * (np.eye(3) - rr))

    def gradients(self, X):
        """``out[a] = dF/dX^a``; the time derivative vanishes."""
        jac = self.electric_jacobian(X)
        out = np.zeros((4, 4, 4))
        for a in range(3):
            out[a, :3, 3] = jac[:, a]
            out[a, 3, :3] = jac[:, a]
        return out

    def potential(self, X):
        _, rn = self._radius(X)
        return float(self.profile(rn, 0))

    def scaled(self, eps):
        return replace(self, profile=replace(self.profile, kappa=eps * self.profile.kappa))


@dataclass(frozen=True)
class LinearField:
    """Affine field ``F(X) = F0 + sum_a X^a F_a``.

    Nothing forces the slopes to satisfy ``dF = 0``; this model exists so the
    Maxwell and closedness checks have something to reject.
    """

    F0: np.ndarray
    slopes: np.ndarray  # shape (4, 4, 4), slopes[a] = dF/dX^a
    U: np.ndarray = field(default_factory=lambda: REST_OBSERVER.copy())

    kind = "linear"

    def __post_init__(self):
        F0 = check_skew(np.array(self.F0, dtype=float))
        slopes = np.array(self.slopes, dtype=float)
        if slopes.shape != (4, 4, 4):
            raise ValueError("slopes must have shape (4, 4, 4)")
        for S in slopes:
            check_skew(S)
        object.__setattr__(self, "F0", F0)
        object.__setattr__(self, "slopes", slopes)

    def field(self, X):
        return self.F0 + np.tensordot(np.asarray(X, dtype=float), self.slopes, axes=1)

    def gradients(self, X):
        return self.slopes

    def potential(self, X):
        raise NoPotential("no global static potential for a generic linear field")

    def scaled(self, eps):
        return replace(self, F0=eps * self.F0, slopes=eps * self.slopes)


def uniform(F0, gauge_origin=None):
    return UniformField(F0, gauge_origin=gauge_origin)


def coulomb(kappa, r_min=1e-6):
    return CentralField(RadialProfile("coulomb", kappa), r_min=r_min)


def harmonic(kappa, r_min=1e-6):
    return CentralField(RadialProfile("harmonic", kappa), r_min=r_min)


def tabulated(r, phi, kappa=1.0, r_min=1e-6):
    return CentralField(RadialProfile("tabulated", kappa, (r, phi)), r_min=r_min)


def field_at(model, X):
    return model.field(X)


def grad_field_at(model, X, direction):
    """Directional derivative of ``F`` at ``X`` along ``direction``."""
    return np.tensordot(np.asarray(direction, dtype=float), model.gradients(X), axes=1)


def potential_at(model, X):
    return model.potential(X)


def maxwell_components(model, X, h=1e-4):
    """Central-difference ``dF(e_a, e_b, e_c)`` for the four index triples."""
    X = np.asarray(X, dtype=float)
    dF = []
    for a in range(4):
        step = np.zeros(4)
        step[a] = h
        # lowered two-form components F_bc = (G F)_bc
        dF.append(METRIC @ (model.field(X + step) - model.field(X - step)) / (2 * h))
    dF = np.array(dF)
    out = {}
    for a, b, c in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        out[(a, b, c)] = dF[a, b, c] + dF[b, c, a] + dF[c, a, b]
    return out


def check_maxwell(model, X, h=1e-4):
    """Largest finite-difference component of ``dF`` at ``X``."""
    return float(max(abs(v) for v in maxwell_components(model, X, h).values()))
