"""Lagrange two-forms on the evolution space and their characteristic direction.

Three variants share one formula,

    sigma(d1, d2) = s (d1Ibar Omega d2I - d1Jbar Omega d2J)
                    - d1Pbar d2X + d2Pbar d1X + q d1Xbar F d2X,

and differ only in the momentum ``P``:

* ``free``: ``P = m I`` and no field term;
* ``souriau``: ``P = M I`` with ``M = m - (g/2)(q s/m) alpha``;
* ``stora``: ``P = (m + k alpha) I + l star(F) J`` with the coefficients' ``k, l``.

Tangents live in the ambient chart ``(X, I, J)`` of R^12, in that order.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm_frechet, null_space

from .evolution_space import (
    AmbientTangent,
    EvolutionPoint,
    ModelCoefficients,
    tangent_constraint_matrix,
)
from .minkowski import (
    METRIC,
    _spin_tensor,
    _star,
    lorentz_generators,
    lower,
    mink_inner,
    mink_square,
)

VARIANTS = ("free", "souriau", "stora")

RANK_RTOL = 1e-10
DEGENERACY_RATIO = 10.0


class KernelError(RuntimeError):
    pass


@dataclass(frozen=True)
class TwoFormModel:
    variant: str
    coeffs: ModelCoefficients
    field: object = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant != "free" and self.field is None:
            raise ValueError(f"variant {self.variant!r} needs a field model")

    @property
    def k(self):
        if self.variant == "free":
            return 0.0
        if self.variant == "souriau":
            return -0.5 * self.coeffs.g * self.coeffs.qs_over_m
        return self.coeffs.k

    @property
    def l(self):
        return self.coeffs.l if self.variant == "stora" else 0.0

    @property
    def q(self):
        return 0.0 if self.variant == "free" else self.coeffs.q

    def field_data(self, X):
        """``(F, dF)`` at ``X`` where ``dF[a] = dF/dX^a``; zeros for the free variant."""
        if self.variant == "free":
            return np.zeros((4, 4)), np.zeros((4, 4, 4))
        return self.field.field(X), self.field.gradients(X)

    def scaled(self, eps):
        """Same model with the field multiplied by ``eps``."""
        if self.field is None:
            return self
        return TwoFormModel(self.variant, self.coeffs, self.field.scaled(eps))


def _as_point(point):
    if isinstance(point, EvolutionPoint):
        return point
    return EvolutionPoint.from_array(point)


def _as_array(d):
    return d.as_array() if isinstance(d, AmbientTangent) else np.asarray(d, dtype=float)


def _dP(model, I, J, F, dF, d):
    """Variation of the momentum along the ambient tangent ``d``."""
    dX, dI, dJ = d[:4], d[4:8], d[8:]
    m, k, l = model.coeffs.m, model.k, model.l
    if model.variant == "free":
        return m * dI
    starF = _star(F)
    starDF = _star(np.tensordot(dX, dF, axes=1))
    alpha = float(lower(I) @ starF @ J)
    dalpha = lower(dI) @ starF @ J + lower(I) @ starF @ dJ + lower(I) @ starDF @ J
    return (m + k * alpha) * dI + k * dalpha * I + l * (starF @ dJ + starDF @ J)


def sigma_eval(model, point, d1, d2):
    """Evaluate the two-form of ``model`` at ``point`` on two ambient tangents."""
    point = _as_point(point)
    d1, d2 = _as_array(d1), _as_array(d2)
    I, J = point.I, point.J
    s = model.coeffs.s
    Om = _spin_tensor(I, J)
    F, dF = model.field_data(point.X)
    spin = s * (mink_inner(d1[4:8], Om @ d2[4:8]) - mink_inner(d1[8:], Om @ d2[8:]))
    orbital = -mink_inner(_dP(model, I, J, F, dF, d1), d2[:4]) + mink_inner(_dP(model, I, J, F, dF, d2), d1[:4])
    lorentz = model.q * mink_inner(d1[:4], F @ d2[:4])
    return float(spin + orbital + lorentz)


def momentum_differential(model, point, F=None, dF=None):
    """4x12 matrix ``DP`` with ``dP(d) = DP @ d``."""
    I, J = point.I, point.J
    if F is None:
        F, dF = model.field_data(point.X)
    m, k, l = model.coeffs.m, model.k, model.l
    DP = np.zeros((4, 12))
    if model.variant == "free":
        DP[:, 4:8] = m * np.eye(4)
        return DP
    starF = _star(F)
    gI = lower(I)
    alpha = float(gI @ starF @ J)
    DP[:, 4:8] = (m + k * alpha) * np.eye(4) + k * np.outer(I, lower(starF @ J))
    DP[:, 8:] = k * np.outer(I, gI @ starF) + l * starF
    for a in range(4):
        sD = _star(dF[a])
        DP[:, a] = k * float(gI @ sD @ J) * I + l * (sD @ J)
    return DP


def sigma_matrix(model, point):
    """12x12 antisymmetric matrix ``S[a, b] = sigma(e_a, e_b)`` in the ambient chart."""
    point = _as_point(point)
    F, dF = model.field_data(point.X)
    gOm = METRIC @ _spin_tensor(point.I, point.J)
    s = model.coeffs.s
    S = np.zeros((12, 12))
    S[4:8, 4:8] = s * gOm
    S[8:, 8:] = -s * gOm
    S[:4, :4] = model.q * (METRIC @ F)
    # -d1Pbar d2X + d2Pbar d1X
    B = METRIC @ momentum_differential(model, point, F, dF)  # row c: lowered dP
    S[:, :4] -= B.T
    S[:4, :] += B
    return S


@dataclass(frozen=True)
class KernelSolution:
    """Characteristic direction with its Lagrange multipliers.

    ``delta`` is normalized by ``Ibar dX = 1``; ``gauge`` holds that product
    for the raw unit null vector.  The multipliers follow the convention in
    which the constraint covectors enter as ``-lambda Ibar dI``,
    ``+mu Jbar dJ`` and ``nu (Jbar dI + Ibar dJ)``.
    """

    delta: AmbientTangent
    lam: float
    mu: float
    nu: float
    sigma_min: float
    sigma_min2: float
    gauge: float
    residual: float

    @property
    def multipliers(self):
        return self.lam, self.mu, self.nu


def kernel_system(model, point):
    """The 15x15 matrix of the kernel equations with multipliers.

    Unknowns are ``(dX, dI, dJ, lambda, mu, nu)``; the first 12 rows are
    ``sigma(delta, e_b)`` plus the multiplier covectors, the last 3 the
    tangency conditions.
    """
    point = _as_point(point)
    S = sigma_matrix(model, point)
    gI, gJ = lower(point.I), lower(point.J)
    C = np.zeros((12, 3))
    C[4:8, 0] = -gI
    C[8:, 1] = gJ
    C[4:8, 2] = gJ
    C[8:, 2] = gI
    A = np.zeros((15, 15))
    A[:12, :12] = S.T
    A[:12, 12:] = C
    A[12:, :12] = C.T
    return A


def kernel(model, point):
    """Characteristic direction of the two-form at ``point``."""
    point = _as_point(point)
    A = kernel_system(model, point)
    _, sv, Vt = np.linalg.svd(A)
    smin, smin2 = sv[-1], sv[-2]
    if smin2 <= DEGENERACY_RATIO * smin:
        raise KernelError(
            f"kernel not one-dimensional (rank degeneracy): smallest singular values {smin:.3e}, {smin2:.3e}"
        )
    z = Vt[-1]
    gauge = mink_inner(point.I, z[:4])
    if abs(gauge) < 1e-8:
        raise KernelError("lightlike characteristic direction, gauge fails")
    z = z / gauge
    residual = float(np.linalg.norm(A @ z) / (sv[0] * np.linalg.norm(z)))
    return KernelSolution(
        delta=AmbientTangent.from_array(z[:12]),
        lam=float(z[12]),
        mu=float(z[13]),
        nu=float(z[14]),
        sigma_min=float(smin),
        sigma_min2=float(smin2),
        gauge=float(gauge),
        residual=residual,
    )


def tangent_basis(point):
    """12x9 orthonormal basis of the tangent space of V at ``point``."""
    return null_space(tangent_constraint_matrix(_as_point(point)))


def pullback_matrix(model, point):
    point = _as_point(point)
    T = tangent_basis(point)
    return T.T @ sigma_matrix(model, point) @ T


def rank_at(model, point, rtol=RANK_RTOL):
    """Rank of the two-form restricted to the tangent space of V."""
    sv = np.linalg.svd(pullback_matrix(model, point), compute_uv=False)
    return int(np.sum(sv > rtol * sv[0]))


class VChart:
    """Local chart of V around a base point.

    Coordinates are ``(x, theta)`` in R^4 x R^5: ``X = X0 + x`` and
    ``(I, J) = L0 exp(A(theta)) (e_t, e_z)`` where ``L0`` is a Lorentz frame
    with ``L0 e_t = I0``, ``L0 e_z = J0`` and ``A(theta)`` spans the rotations
    about x and y and the three boosts (the complement of the stabilizer of
    ``(e_t, e_z)``).
    """

    def __init__(self, point):
        point = _as_point(point)
        self.X0 = np.array(point.X)
        self.L0 = lorentz_frame(point.I, point.J)
        gens = lorentz_generators()
        self.gens = [gens[0], gens[1], gens[3], gens[4], gens[5]]

    def _algebra(self, theta):
        return sum(t * G for t, G in zip(theta, self.gens))

    def embed(self, xi):
        """Ambient coordinates and the 12x9 Jacobian at chart point ``xi``."""
        xi = np.asarray(xi, dtype=float)
        A = self._algebra(xi[4:])
        D = np.zeros((12, 9))
        D[:4, :4] = np.eye(4)
        L = None
        for n, G in enumerate(self.gens):
            L, dL = expm_frechet(A, G)
            D[4:8, 4 + n] = self.L0 @ dL[:, 3]
            D[8:, 4 + n] = self.L0 @ dL[:, 2]
        LL = self.L0 @ L
        y = np.concatenate([self.X0 + xi[:4], LL[:, 3], LL[:, 2]])
        return y, D

    def pulled_back(self, model, xi):
        y, D = self.embed(xi)
        point = EvolutionPoint.from_array(y, tol=1e-11)
        return D.T @ sigma_matrix(model, point) @ D


def lorentz_frame(I, J):
    """Lorentz matrix ``L`` (``L^T G L = G``) with columns ``(e1, e2, J, I)``."""
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    basis = [J, I]
    cands = []
    for c in np.eye(4)[:3]:
        w = c - mink_inner(I, c) * I + mink_inner(J, c) * J
        cands.append(w)
    cands.sort(key=lambda w: mink_square(w))  # most spacelike first
    e1 = cands[0] / np.sqrt(-mink_square(cands[0]))
    rest = [w + mink_inner(e1, w) * e1 for w in cands[1:]]
    rest.sort(key=lambda w: mink_square(w))
    e2 = rest[0] / np.sqrt(-mink_square(rest[0]))
    L = np.column_stack([e1, e2] + basis)
    if np.linalg.det(L) < 0:
        L[:, 0] *= -1.0
    return L


def exterior_derivative(model, point, h=1e-4):
    """Central-difference ``d sigma`` in the chart of V at ``point``, shape (9, 9, 9)."""
    chart = VChart(point)
    dS = np.zeros((9, 9, 9))
    for a in range(9):
        e = np.zeros(9)
        e[a] = h
        dS[a] = (chart.pulled_back(model, e) - chart.pulled_back(model, -e)) / (2 * h)
    # (d sigma)_{abc} = d_a S_bc - d_b S_ac + d_c S_ab
    return dS - dS.transpose(1, 0, 2) + dS.transpose(1, 2, 0)


def closedness_residual(model, point, h=1e-4):
    """Largest finite-difference component of ``d sigma`` over all index triples."""
    dsig = exterior_derivative(model, point, h)
    idx = np.array([(a, b, c) for a in range(9) for b in range(a + 1, 9) for c in range(b + 1, 9)])
    return float(np.max(np.abs(dsig[idx[:, 0], idx[:, 1], idx[:, 2]])))
