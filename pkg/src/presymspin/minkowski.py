"""Minkowski-space linear algebra in the chart (x, y, z, t).

Vectors are plain ``(4,)`` float arrays and skew endomorphisms are ``(4, 4)``
arrays acting on them.  The metric is ``diag(-1, -1, -1, +1)`` and the bar
operation is the metric transpose: for a vector ``a`` the covector
``abar = a @ METRIC``; for a matrix ``A`` it is ``METRIC @ A.T @ METRIC``.

A skew endomorphism ``F`` always has the block form::

    F = [[ j(b), e ],
         [ e^T , 0 ]]

with ``j(w) r = w x r``; ``e`` is its electric part and ``b`` its magnetic
part.  The Hodge star maps ``(b, e) -> (-e, b)``, which is the orientation
for which the star of a purely electric field is ``[[-j(E), 0], [0, 0]]``.
"""
from dataclasses import dataclass

import numpy as np

METRIC = np.diag([-1.0, -1.0, -1.0, 1.0])
METRIC.setflags(write=False)

SKEW_TOL = 1e-10


class ConstraintError(ValueError):
    """A state violates one of the evolution-space constraints."""


_SIGNS = np.array([-1.0, -1.0, -1.0, 1.0])


def mink_inner(a, b):
    """Minkowski product ``abar b = -a_x b_x - a_y b_y - a_z b_z + a_t b_t``.

    Broadcasts over leading axes.
    """
    return np.sum(np.multiply(a, b) * _SIGNS, axis=-1)


def mink_square(a):
    return mink_inner(a, a)


def lower(a):
    """Covector components of ``a`` (flip the spatial signs)."""
    return _SIGNS * np.asarray(a, dtype=float)


def gbar(A):
    """Metric transpose of an endomorphism."""
    return METRIC @ np.asarray(A, dtype=float).T @ METRIC


def skew_residual(A):
    return float(np.max(np.abs(gbar(A) + A)))


def is_skew(A, tol=SKEW_TOL):
    return skew_residual(A) <= tol


def check_skew(A, tol=SKEW_TOL):
    """Return ``A`` as an array, raising if it is not metric-skew."""
    A = np.asarray(A, dtype=float)
    if A.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {A.shape}")
    res = skew_residual(A)
    if res > tol:
        raise ValueError(f"matrix is not metric-skew (residual {res:.3e})")
    return A


def cross_matrix(w):
    """``j(w)``, the 3x3 matrix with ``j(w) r = w x r``."""
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def uncross(A3):
    """Inverse of :func:`cross_matrix` on the antisymmetric part."""
    return 0.5 * np.array([A3[2, 1] - A3[1, 2], A3[0, 2] - A3[2, 0], A3[1, 0] - A3[0, 1]])


def skew_from_parts(b, e):
    """Assemble the skew endomorphism with magnetic part ``b``, electric part ``e``."""
    F = np.zeros((4, 4))
    F[:3, :3] = cross_matrix(b)
    F[:3, 3] = e
    F[3, :3] = e
    return F


def skew_parts(F):
    """Split a skew endomorphism into ``(b, e)``."""
    F = np.asarray(F, dtype=float)
    return uncross(F[:3, :3]), 0.5 * (F[:3, 3] + F[3, :3])


def electric_field_matrix(E):
    return skew_from_parts(np.zeros(3), E)


def magnetic_field_matrix(B):
    return skew_from_parts(B, np.zeros(3))


def _star(F):
    # unchecked: callers on hot paths already hold skew matrices
    out = np.zeros((4, 4))
    bx, by, bz = 0.5 * (F[2, 1] - F[1, 2]), 0.5 * (F[0, 2] - F[2, 0]), 0.5 * (F[1, 0] - F[0, 1])
    ex, ey, ez = 0.5 * (F[0, 3] + F[3, 0]), 0.5 * (F[1, 3] + F[3, 1]), 0.5 * (F[2, 3] + F[3, 2])
    # new magnetic part -e
    out[0, 1], out[1, 0] = ez, -ez
    out[0, 2], out[2, 0] = -ey, ey
    out[1, 2], out[2, 1] = ex, -ex
    # new electric part b
    out[0, 3] = out[3, 0] = bx
    out[1, 3] = out[3, 1] = by
    out[2, 3] = out[3, 2] = bz
    return out


def hodge_star(F):
    """Hodge dual of a skew endomorphism; ``star(star(F)) == -F``."""
    return _star(check_skew(F))


def _wedge(a, b):
    """``a bbar - b abar``, always metric-skew."""
    return np.outer(a, lower(b)) - np.outer(b, lower(a))


def constraint_residuals(I, J):
    """Residuals ``(I^2 - 1, J^2 + 1, Ibar J)``."""
    return mink_square(I) - 1.0, mink_square(J) + 1.0, mink_inner(I, J)


def check_constraints(I, J, tol=1e-9):
    c1, c2, c3 = constraint_residuals(I, J)
    if abs(c1) > tol:
        raise ConstraintError(f"constraint I^2 = 1 violated (residual {c1:.3e})")
    if abs(c2) > tol:
        raise ConstraintError(f"constraint J^2 = -1 violated (residual {c2:.3e})")
    if abs(c3) > tol:
        raise ConstraintError(f"constraint Ibar J = 0 violated (residual {c3:.3e})")


def _spin_tensor(I, J):
    return _star(_wedge(I, J))


def spin_tensor(I, J, tol=1e-9):
    """Normalized spin tensor ``j(I, J) = star(I Jbar - J Ibar)``.

    It annihilates both ``I`` and ``J`` and satisfies ``Omega^3 = -Omega``.
    """
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    check_constraints(I, J, tol)
    return _spin_tensor(I, J)


def _alpha(I, J, F):
    return float(lower(I) @ _star(F) @ J)


def coupling_alpha(I, J, F, tol=1e-9):
    """Spin-field coupling scalar ``Ibar star(F) J``."""
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    check_constraints(I, J, tol)
    return _alpha(I, J, check_skew(F))


def coupling_alpha_trace(I, J, F, tol=1e-9):
    """Same scalar computed as ``-Tr(Omega F) / 2``."""
    return -0.5 * float(np.trace(spin_tensor(I, J, tol) @ check_skew(F)))


@dataclass(frozen=True)
class LabFrameState:
    """Lab-frame description of a point of the evolution space.

    ``u`` is the unit spin direction and ``v`` the 3-velocity; the two Lorentz
    factors are derived on construction.
    """

    r: np.ndarray
    t: float
    v: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        v = np.array(self.v, dtype=float)
        u = np.array(self.u, dtype=float)
        if r.shape != (3,) or v.shape != (3,) or u.shape != (3,):
            raise ValueError("r, v and u must be 3-vectors")
        if not np.dot(v, v) < 1.0:
            raise ValueError(f"superluminal velocity |v| = {np.linalg.norm(v):.6g}")
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError(f"spin direction must be a unit vector (|u| = {np.linalg.norm(u):.15g})")
        for a in (r, v, u):
            a.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))

    @property
    def gamma(self):
        return 1.0 / np.sqrt(1.0 - np.dot(self.v, self.v))

    @property
    def gamma_tilde(self):
        return 1.0 / np.sqrt(1.0 - np.dot(self.u, self.v) ** 2)


def lab_compose(state):
    """``(X, I, J)`` for a lab-frame state: ``I = gamma (v, 1)``, ``J = gamma~ (u, <u,v>)``."""
    X = np.append(state.r, state.t)
    I = state.gamma * np.append(state.v, 1.0)
    J = state.gamma_tilde * np.append(state.u, np.dot(state.u, state.v))
    return X, I, J


def lab_decompose(X, I, J, U=None):
    """Inverse of :func:`lab_compose` for the rest observer ``U = (0, 0, 0, 1)``."""
    if U is not None and not np.allclose(U, [0.0, 0.0, 0.0, 1.0], atol=1e-15):
        raise NotImplementedError("only the rest observer U = (0, 0, 0, 1) is supported")
    X = np.asarray(X, dtype=float)
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    if I[3] <= 0.0:
        raise ConstraintError("I is not future-pointing")
    v = I[:3] / I[3]
    # spatial part of J is gamma~ u with |u| = 1
    u = J[:3] / np.linalg.norm(J[:3])
    return LabFrameState(r=X[:3], t=X[3], v=v, u=u)


def lorentz_generators():
    """Basis of so(3,1): rotations about x, y, z then boosts along x, y, z."""
    gens = []
    for k in range(3):
        w = np.zeros(3)
        w[k] = 1.0
        gens.append(magnetic_field_matrix(w))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        gens.append(electric_field_matrix(e))
    return gens
