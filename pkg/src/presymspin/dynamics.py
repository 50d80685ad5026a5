"""Flows on the evolution space: exact kernel flow, weak-field linearization, BMT reference.

All three are integrated with the classical fourth-order Runge-Kutta step.
The kernel and linearized flows are pulled back onto V by
:func:`~presymspin.evolution_space.project_to_V`; the BMT reference flow
evolves ``(X, P, S)`` freely so its conservation laws can be measured.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .evolution_space import (
    AmbientTangent,
    EvolutionPoint,
    ModelCoefficients,
    momentum,
    momentum_jacobian,
    project_to_V,
    starred_frame,
)
from .minkowski import ConstraintError, _alpha, _spin_tensor, _star, constraint_residuals, lower, mink_inner, mink_square
from .presymplectic import KernelError, TwoFormModel, kernel

FLOW_KINDS = ("kernel", "linearized", "bmt_reference")
MAX_DRIFT = 1e-6


class IntegrationError(RuntimeError):
    pass


def effective_coefficients(model):
    """Coefficients whose ``(k, l, q)`` reproduce the momentum used by ``model``."""
    c = model.coeffs
    return ModelCoefficients(c.m, c.s, model.q, c.g, model.k, model.l, "custom")


def bmt_reference_rhs(P, S, X, F, q, g):
    """Right-hand side ``(dX, dP, dS)`` of the BMT equations for field matrix ``F``."""
    P = np.asarray(P, dtype=float)
    S = np.asarray(S, dtype=float)
    P2 = mink_square(P)
    if not P2 > 0.0:
        raise ConstraintError("momentum is not timelike")
    FS = F @ S
    dS = -q * (0.5 * g * FS + (1.0 - 0.5 * g) * P * mink_inner(P, FS) / P2)
    return P.copy(), -q * (F @ P), dS


def _check_compatible(coeffs):
    if not coeffs.bmt_compatible:
        raise ValueError(
            "coefficients are not BMT-compatible: k + l must equal -(g/2) q s / m "
            f"(got k + l = {coeffs.k + coeffs.l:.6g}, need {-0.5 * coeffs.g * coeffs.qs_over_m:.6g})"
        )


def linearized_rhs(coeffs, point, F, form="star", gauge="star"):
    """Weak-field characteristic direction.

    ``form="star"`` uses the momentum frame ``I* = P/|P|``::

        dX  = I* - (q s/m^2)(1 - g/2) Omega* F I*
        dI* = -(q/m) F I*
        dJ  = -(q/m) [(g/2) F J + (1 - g/2) I* (I*bar F J)]

    and converts ``dI*`` back to ``dI``.  ``form="provisional"`` is the
    intermediate expression in the original frame ``I``, which for the Souriau
    coefficients is the classical linearized Souriau system.

    ``gauge="star"`` normalizes ``I*bar dX = 1``; ``gauge="I"`` normalizes
    ``Ibar dX = 1`` to match the kernel flow.
    """
    _check_compatible(coeffs)
    I, J = point.I, point.J
    m, s, q, g, k = coeffs.m, coeffs.s, coeffs.q, coeffs.g, coeffs.k
    if form == "provisional":
        Om = _spin_tensor(I, J)
        FI = F @ I
        dX = I - (k + q * s / m) / m * (Om @ FI)
        dI = -(q / m) * FI
        kl = k + coeffs.l
        FJ = F @ J
        dJ = (kl * FJ - (kl + q * s / m) * I * mink_inner(I, FJ)) / s
        out = np.concatenate([dX, dI, dJ])
        if gauge == "star":
            out = out / mink_inner(starred_frame(coeffs, point, F).I_star, dX)
        elif gauge != "I":
            raise ValueError(f"unknown gauge {gauge!r}")
        return AmbientTangent.from_array(out)
    if form != "star":
        raise ValueError(f"unknown form {form!r}")
    fr = starred_frame(coeffs, point, F)
    Is, Oms = fr.I_star, fr.Omega_star
    FIs = F @ Is
    dX = Is - (q * s / m**2) * (1.0 - 0.5 * g) * (Oms @ FIs)
    dIs = -(q / m) * FIs
    FJ = F @ J
    dJ = -(q / m) * (0.5 * g * FJ + (1.0 - 0.5 * g) * Is * mink_inner(Is, FJ))
    dI = _unstar(coeffs, point, F, fr, dIs, dJ)
    out = np.concatenate([dX, dI, dJ])
    if gauge == "I":
        out = out / mink_inner(I, dX)
    elif gauge != "star":
        raise ValueError(f"unknown gauge {gauge!r}")
    return AmbientTangent.from_array(out)


def _unstar(coeffs, point, F, frame, dIs, dJ):
    """Solve ``D(I*)[dI, dJ] = dIs`` for ``dI`` with ``Ibar dI = 0``."""
    dPdI, dPdJ = momentum_jacobian(coeffs, point.I, point.J, F)
    Is = frame.I_star
    Q = (np.eye(4) - np.outer(Is, lower(Is))) / frame.P_norm
    A = np.vstack([Q @ dPdI, lower(point.I)])
    b = np.append(dIs - Q @ dPdJ @ dJ, 0.0)
    return np.linalg.lstsq(A, b, rcond=None)[0]


@dataclass
class Trajectory:
    """Samples of an integrated flow.

    ``states`` holds ``(X, I, J)`` rows of the ambient chart and ``P`` the
    momentum at each sample; ``diagnostics`` maps names to per-sample arrays.
    """

    kind: str
    h: float
    tau: np.ndarray
    states: np.ndarray
    P: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.tau)

    def point(self, i):
        return EvolutionPoint.from_array(self.states[i])

    @property
    def samples(self):
        for i in range(len(self)):
            yield self.tau[i], self.point(i), self.P[i], {k: v[i] for k, v in self.diagnostics.items()}


def _field_matrix(model, X):
    if model.variant == "free" or model.field is None:
        return np.zeros((4, 4))
    return model.field.field(X)


def _kernel_vector(model, y, gauge):
    point = project_to_V(y[:4], y[4:8], y[8:])
    ks = kernel(model, point)
    d = ks.delta.as_array()
    if gauge == "star":
        fr = starred_frame(effective_coefficients(model), point, _field_matrix(model, point.X))
        d = d / mink_inner(fr.I_star, d[:4])
    return d, ks


def _linearized_vector(model, y, gauge, form):
    point = project_to_V(y[:4], y[4:8], y[8:])
    coeffs = effective_coefficients(model)
    d = linearized_rhs(coeffs, point, _field_matrix(model, point.X), form=form, gauge=gauge)
    return d.as_array(), None


def _bmt_vector(model, y):
    c = model.coeffs
    X, P, S = y[:4], y[4:8], y[8:]
    dX, dP, dS = bmt_reference_rhs(P, S, X, _field_matrix(model, X), c.q, c.g)
    return np.concatenate([dX, dP, dS]), None


def _drift(y):
    return max(abs(r) for r in constraint_residuals(y[4:8], y[8:]))


def integrate(flow_kind, model, start, h, n_steps, project_every=1, gauge="I", form="star",
              record_every=1, diagnostics=True):
    """Integrate a flow from ``start`` for ``n_steps`` RK4 steps of size ``h``.

    For ``kernel`` and ``linearized`` flows ``tau`` is the leaf parameter
    fixed by ``gauge``.  The ``bmt_reference`` flow starts from
    ``P = m I``, ``S = s J`` and ``tau`` is the BMT parameter.
    """
    if flow_kind not in FLOW_KINDS:
        raise ValueError(f"unknown flow kind {flow_kind!r}")
    if not isinstance(model, TwoFormModel):
        raise TypeError("integrate needs a TwoFormModel")
    if flow_kind == "kernel":
        rhs = lambda y: _kernel_vector(model, y, gauge)
    elif flow_kind == "linearized":
        rhs = lambda y: _linearized_vector(model, y, gauge, form)
    else:
        rhs = lambda y: _bmt_vector(model, y)

    c = model.coeffs
    if flow_kind == "bmt_reference":
        y = np.concatenate([start.X, c.m * start.I, c.s * start.J])
    else:
        y = start.as_array()

    recorder = _Recorder(model, flow_kind, diagnostics)
    aux = None
    for n in range(n_steps):
        try:
            k1, aux = rhs(y)
            if n % record_every == 0:
                recorder.add(n * h, y, aux)
            k2, _ = rhs(y + 0.5 * h * k1)
            k3, _ = rhs(y + 0.5 * h * k2)
            k4, _ = rhs(y + h * k3)
        except (ConstraintError, KernelError) as exc:
            raise IntegrationError(f"step {n + 1} failed (h = {h:g}): {exc}; reduce the step size") from exc
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if flow_kind != "bmt_reference":
            drift = _drift(y)
            if drift > MAX_DRIFT:
                raise IntegrationError(
                    f"step size too large: constraint drift {drift:.3e} after step {n + 1} (h = {h:g})"
                )
            if (n + 1) % project_every == 0:
                y = project_to_V(y[:4], y[4:8], y[8:]).as_array()
            recorder.note_drift(drift)
    if n_steps % record_every == 0:
        _, aux = rhs(y)
        recorder.add(n_steps * h, y, aux)
    return recorder.build(h)


class _Recorder:
    def __init__(self, model, kind, diagnostics):
        self.model = model
        self.kind = kind
        self.diagnostics = diagnostics
        self.coeffs = effective_coefficients(model)
        self.tau, self.states, self.P = [], [], []
        self.diag = {}
        self.max_drift = 0.0

    def note_drift(self, drift):
        self.max_drift = max(self.max_drift, drift)

    def _put(self, name, value):
        self.diag.setdefault(name, []).append(value)

    def add(self, tau, y, aux):
        from . import observables  # deferred: observables builds on this module's types

        X = y[:4]
        if self.kind == "bmt_reference":
            P, S = y[4:8], y[8:]
            I = P / np.sqrt(mink_square(P))
            J = S / np.sqrt(-mink_square(S))
            state = np.concatenate([X, I, J])
            self._put("P2", mink_square(P))
            self._put("S2", mink_square(S))
            self._put("PS", mink_inner(P, S))
        else:
            state = np.array(y)
            P = momentum(self.coeffs, EvolutionPoint.from_array(state), _field_matrix(self.model, X))
        self.tau.append(tau)
        self.states.append(state)
        self.P.append(np.array(P))
        c1, c2, c3 = constraint_residuals(state[4:8], state[8:])
        self._put("c1", c1)
        self._put("c2", c2)
        self._put("c3", c3)
        if aux is not None:
            self._put("sigma_min2", aux.sigma_min2)
            self._put("lambda", aux.lam)
            self._put("mu", aux.mu)
            self._put("nu", aux.nu)
        if self.diagnostics:
            point = EvolutionPoint.from_array(state)
            fld = self.model.field if self.model.variant != "free" else None
            self._put("H", observables.energy_or_nan(self.coeffs, point, fld))
            Jam = observables.total_angular_momentum(self.coeffs, point, fld)
            for name, val in zip(("Jx_am", "Jy_am", "Jz_am"), Jam):
                self._put(name, val)

    def build(self, h):
        diag = {k: np.array(v) for k, v in self.diag.items()}
        traj = Trajectory(self.kind, h, np.array(self.tau), np.array(self.states), np.array(self.P), diag)
        traj.max_drift = self.max_drift
        return traj


def default_horizon(model):
    """``min(1 / (q |F|), 10 / m)`` with ``|F|`` the largest field entry at the origin."""
    m = model.coeffs.m
    Fn = float(np.max(np.abs(_field_matrix(model, np.zeros(4)))))
    qF = abs(model.q) * Fn
    return 10.0 / m if qF == 0 else min(1.0 / qF, 10.0 / m)


def default_step(model, horizon=None, target=1e-3, max_step=0.05):
    """Step with ``q |F| h <= target``, capped at ``max_step``."""
    Fn = float(np.max(np.abs(_field_matrix(model, np.zeros(4)))))
    qF = abs(model.q) * Fn
    h = max_step if qF == 0 else min(max_step, target / qF)
    if horizon is not None:
        n = max(1, int(np.ceil(horizon / h - 1e-12)))
        h = horizon / n
    return h


def trajectory_deviation(a, b):
    """Sup over matched samples of the Euclidean distance in the ambient chart."""
    if len(a) != len(b) or not np.allclose(a.tau, b.tau, rtol=0, atol=1e-12):
        raise ValueError("trajectories are not sampled at matching tau")
    return float(np.max(np.linalg.norm(a.states - b.states, axis=1)))


@dataclass
class ConvergenceTable:
    eps: np.ndarray
    deviation: np.ndarray
    slope: float
    horizon: float
    h: float
    reference: str

    def rows(self):
        return list(zip(self.eps.tolist(), self.deviation.tolist()))


def fit_loglog_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def convergence_study(model, start, eps_list, horizon=None, h=None, reference="linearized", form="star"):
    """Kernel flow in the field ``eps F`` against its weak-field approximation.

    ``reference`` is ``"linearized"``.  The deviation is the sup-distance
    between the two trajectories over the horizon; its log-log slope in
    ``eps`` certifies the order of the approximation.
    """
    if reference != "linearized":
        raise ValueError("only the linearized reference flow is supported")
    eps_list = np.asarray(eps_list, dtype=float)
    if len(eps_list) < 4:
        raise ValueError("need at least four eps values")
    emax = model.scaled(float(np.max(eps_list)))
    if horizon is None:
        horizon = default_horizon(emax)
    if h is None:
        h = default_step(emax, horizon)
    n = max(1, int(round(horizon / h)))
    devs = []
    for eps in eps_list:
        scaled = model.scaled(float(eps))
        a = integrate("kernel", scaled, start, h, n, gauge="I", diagnostics=False)
        b = integrate("linearized", scaled, start, h, n, gauge="I", form=form, diagnostics=False)
        devs.append(trajectory_deviation(a, b))
    devs = np.array(devs)
    order = np.argsort(eps_list)
    if np.any(np.diff(devs[order][eps_list[order] > 0]) <= 0):
        warnings.warn("outside asymptotic regime: deviations are not monotone in eps", RuntimeWarning)
    slope = fit_loglog_slope(eps_list, devs)
    return ConvergenceTable(eps_list, devs, slope, float(horizon), float(h), reference)


@dataclass
class MultiplierReport:
    eps: np.ndarray
    residuals: dict  # name -> array over eps
    slopes: dict  # name -> fitted log-log slope, inf for identities exact to round-off
    exact_floor: float

    def passed(self, min_slope=1.8):
        return {k: (v >= min_slope) for k, v in self.slopes.items()}


def multiplier_quantities(model, point):
    """Kernel multipliers and the weak-field formulas they should approach.

    Valid for a uniform field; returns a dict of measured values and
    predictions for a single field strength.
    """
    coeffs = effective_coefficients(model)
    m, s, q, k, l = coeffs.m, coeffs.s, coeffs.q, coeffs.k, coeffs.l
    F = _field_matrix(model, point.X)
    ks = kernel(model, point)
    d = ks.delta
    I, J = point.I, point.J
    alpha = _alpha(I, J, F)
    IdX = mink_inner(I, d.dX)
    lam, mu, nu = ks.lam, ks.mu, ks.nu
    mu_hat_pred = k * IdX + l * lam / m
    IFJ = mink_inner(I, F @ J)
    rho_pred = -IFJ * (k * IdX + (lam / m) * (l + q * s / m))
    starF = _star(F)
    dalpha = mink_inner(d.dI, starF @ J) + mink_inner(I, starF @ d.dJ)
    out = dict(alpha=alpha, IdX=IdX, lam=lam, mu=mu, nu=nu,
               lam_pred=(m + 2.0 * k * alpha) * IdX, mu_pred=alpha * mu_hat_pred,
               rho_pred=rho_pred, dalpha=dalpha)
    if alpha != 0.0:
        mu_hat = mu / alpha
        rho = s * mink_inner(I, d.dJ) - mu_hat * IFJ
        out.update(mu_hat=mu_hat, rho=rho,
                   decomposition=float(np.linalg.norm(s * d.dJ - rho * I - mu_hat * (F @ J))))
    return out


def multiplier_diagnostics(model, point, eps_scan, exact_floor=1e-13):
    """Scaling of the multiplier-formula residuals with the field strength.

    Residuals below ``exact_floor`` (relative to the leading multiplier
    scale) at every ``eps`` are identities rather than approximations; their
    slope is reported as ``inf``.
    """
    eps_scan = np.asarray(eps_scan, dtype=float)
    res = {k: [] for k in ("nu", "mu", "lambda", "rho", "decomposition", "dalpha")}
    for eps in eps_scan:
        Q = multiplier_quantities(model.scaled(float(eps)), point)
        if "rho" not in Q:
            raise ValueError("alpha vanishes at this point; pick a state with spin-field coupling")
        res["nu"].append(abs(Q["nu"]))
        res["mu"].append(abs(Q["mu"] - Q["mu_pred"]))
        res["lambda"].append(abs(Q["lam"] - Q["lam_pred"]))
        res["rho"].append(abs(Q["rho"] - Q["rho_pred"]))
        res["decomposition"].append(Q["decomposition"])
        res["dalpha"].append(abs(Q["dalpha"]))
    scale = model.coeffs.m
    slopes = {}
    for name, vals in res.items():
        vals = np.array(vals)
        res[name] = vals
        if np.all(vals <= exact_floor * scale):
            slopes[name] = float("inf")
        else:
            slopes[name] = fit_loglog_slope(eps_scan, vals)
    return MultiplierReport(eps_scan, res, slopes, exact_floor)
