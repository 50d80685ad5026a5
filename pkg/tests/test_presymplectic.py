import numpy as np
import pytest

from conftest import UNIFORM_F0, coulomb_model, make_model, random_point, uniform_model
from oracles import kernel_equations_oracle, souriau_linearized
from presymspin import fields
from presymspin.dynamics import fit_loglog_slope
from presymspin.evolution_space import AmbientTangent, EvolutionPoint, ModelCoefficients
from presymspin.minkowski import METRIC, _star, coupling_alpha, lower, mink_inner, skew_from_parts, spin_tensor
from presymspin.presymplectic import (
    KernelError,
    TwoFormModel,
    VChart,
    closedness_residual,
    kernel,
    kernel_system,
    lorentz_frame,
    pullback_matrix,
    rank_at,
    sigma_eval,
    sigma_matrix,
    tangent_basis,
)

VARIANTS = ("free", "souriau", "stora")


def random_tangent(rng, point):
    T = tangent_basis(point)
    return T @ rng.normal(size=9)


def test_sigma_matrix_matches_kernel_equations(rng):
    for _ in range(20):
        model = uniform_model("stora", eps=rng.uniform(0.01, 0.5), g=rng.uniform(1.5, 3))
        p = random_point(rng)
        S = sigma_matrix(model, p)
        oracle = kernel_equations_oracle(model.coeffs, p.I, p.J, model.field.F0)
        assert np.max(np.abs(S - oracle)) < 1e-12


@pytest.mark.parametrize("variant", VARIANTS)
def test_sigma_eval_matches_matrix_and_is_antisymmetric(rng, variant):
    for model in (uniform_model(variant), coulomb_model(variant)):
        for _ in range(10):
            p = random_point(rng)
            S = sigma_matrix(model, p)
            np.testing.assert_allclose(S, -S.T, atol=1e-12)
            d1, d2 = rng.normal(size=12), rng.normal(size=12)
            val = sigma_eval(model, p, d1, d2)
            assert abs(val - d1 @ S @ d2) < 1e-12 * max(1, abs(val))
            assert abs(val + sigma_eval(model, p, d2, d1)) < 1e-12
            assert sigma_eval(model, p, d1, d1) == pytest.approx(0.0, abs=1e-13)


def test_free_kernel_direction(rng):
    model = make_model("free")
    p = random_point(rng)
    d1 = AmbientTangent(p.I, np.zeros(4), np.zeros(4))
    for _ in range(10):
        assert abs(sigma_eval(model, p, d1, random_tangent(rng, p))) < 1e-13
    ks = kernel(model, p)
    np.testing.assert_allclose(ks.delta.as_array(), np.concatenate([p.I, np.zeros(8)]), atol=1e-12)
    # in the multiplier convention of the solver the free lambda is m, not zero
    assert abs(ks.lam - model.coeffs.m) < 1e-12
    assert abs(ks.mu) < 1e-12 and abs(ks.nu) < 1e-12


def test_free_sigma_matrix_at_rest():
    model = make_model("free", m=1.7, s=0.6)
    p = EvolutionPoint(np.zeros(4), [0, 0, 0, 1.0], [0, 0, 1.0, 0])
    S = sigma_matrix(model, p)
    # sigma(e_I, e_X) = -m g
    np.testing.assert_allclose(S[4:8, :4], -1.7 * METRIC, atol=1e-15)
    np.testing.assert_allclose(S[:4, 4:8], 1.7 * METRIC, atol=1e-15)
    gOm = METRIC @ spin_tensor(p.I, p.J)
    np.testing.assert_allclose(S[4:8, 4:8], 0.6 * gOm, atol=1e-15)
    np.testing.assert_allclose(S[8:, 8:], -0.6 * gOm, atol=1e-15)
    assert np.all(S[:4, :4] == 0) and np.all(S[:4, 8:] == 0) and np.all(S[4:8, 8:] == 0)


def test_stora_zero_field_equals_free(rng):
    p = random_point(rng)
    stora = uniform_model("stora", eps=0.0)
    np.testing.assert_allclose(sigma_matrix(stora, p), sigma_matrix(make_model("free"), p), atol=1e-15)


@pytest.mark.parametrize("variant", VARIANTS)
def test_kernel_annihilates_tangent_space(rng, variant):
    for model in (uniform_model(variant), coulomb_model(variant)):
        p = random_point(rng)
        ks = kernel(model, p)
        assert ks.delta.is_tangent(p, 1e-10)
        assert ks.residual < 1e-10
        assert abs(mink_inner(p.I, ks.delta.dX) - 1) < 1e-12
        assert ks.delta.dX[3] > 0
        for _ in range(50):
            assert abs(sigma_eval(model, p, ks.delta, random_tangent(rng, p))) < 1e-9


def test_kernel_equations_hold_with_multipliers(rng):
    model = uniform_model("stora", eps=0.2)
    p = random_point(rng)
    ks = kernel(model, p)
    z = np.concatenate([ks.delta.as_array(), [ks.lam, ks.mu, ks.nu]])
    assert np.linalg.norm(kernel_system(model, p) @ z) < 1e-12 * np.linalg.norm(z)


def test_kernel_gauge_covariance(rng):
    g = 2.3
    F = fields.uniform(0.1 * UNIFORM_F0)
    a = TwoFormModel("souriau", ModelCoefficients.souriau(1.0, 1.0, 1.0, g), F)
    b = TwoFormModel("souriau", ModelCoefficients.souriau(2.0, 2.0, 2.0, g), F)
    for _ in range(10):
        p = random_point(rng)
        da, db = kernel(a, p).delta.dX, kernel(b, p).delta.dX
        np.testing.assert_allclose(da / np.linalg.norm(da), db / np.linalg.norm(db), atol=1e-10)


def test_stora_embeds_souriau(rng):
    g = 2.7
    c = ModelCoefficients.custom(1.0, 1.0, 1.0, g, -0.5 * g, 0.0)
    for fld in (fields.uniform(0.1 * UNIFORM_F0), fields.coulomb(0.1)):
        st_ = TwoFormModel("stora", c, fld)
        so = TwoFormModel("souriau", ModelCoefficients.souriau(1.0, 1.0, 1.0, g), fld)
        for _ in range(10):
            p = random_point(rng)
            np.testing.assert_allclose(kernel(st_, p).delta.as_array(), kernel(so, p).delta.as_array(),
                                       atol=1e-12)


def test_souriau_kernel_approaches_linearized_system(rng):
    p = random_point(rng)
    eps = np.array([1e-2, 3e-3, 1e-3, 3e-4])
    g, m, s, q = 2.4, 1.0, 1.0, 1.0
    errs = []
    for e in eps:
        model = uniform_model("souriau", eps=e, g=g)
        lin = souriau_linearized(p.I, p.J, model.field.F0, m, s, q, g)
        errs.append(np.linalg.norm(kernel(model, p).delta.as_array() - lin))
    assert abs(fit_loglog_slope(eps, errs) - 2.0) < 0.2


def test_kernel_degeneracy_detected():
    # without the spin term every spin rotation is in the kernel; the constructor
    # forbids s = 0, so force it
    model = make_model("free")
    object.__setattr__(model.coeffs, "s", 0.0)
    p = EvolutionPoint(np.zeros(4), [0, 0, 0, 1.0], [0, 0, 1.0, 0])
    with pytest.raises(KernelError, match="rank degeneracy"):
        kernel(model, p)


@pytest.mark.parametrize("variant", VARIANTS)
def test_rank_is_eight(rng, variant):
    for model in (uniform_model(variant, eps=0.1), coulomb_model(variant), uniform_model(variant, eps=0.0)):
        for _ in range(10):
            assert rank_at(model, random_point(rng)) == 8


def test_pullback_is_antisymmetric(rng):
    model = coulomb_model("stora")
    P = pullback_matrix(model, random_point(rng))
    np.testing.assert_allclose(P, -P.T, atol=1e-13)


def test_lorentz_frame(rng):
    for _ in range(20):
        p = random_point(rng)
        L = lorentz_frame(p.I, p.J)
        np.testing.assert_allclose(L.T @ METRIC @ L, METRIC, atol=1e-12)
        np.testing.assert_allclose(L[:, 3], p.I, atol=1e-15)
        np.testing.assert_allclose(L[:, 2], p.J, atol=1e-15)
        assert np.linalg.det(L) > 0


def test_chart_lands_on_V(rng):
    p = random_point(rng)
    chart = VChart(p)
    y, D = chart.embed(np.zeros(9))
    np.testing.assert_allclose(y, p.as_array(), atol=1e-14)
    T = tangent_basis(p)
    # the chart Jacobian spans the tangent space
    assert np.linalg.matrix_rank(np.hstack([T, D]), tol=1e-10) == 9
    y, _ = chart.embed(0.1 * rng.normal(size=9))
    EvolutionPoint.from_array(y, tol=1e-13)


@pytest.mark.parametrize("variant", VARIANTS)
def test_closedness(rng, variant):
    for model in (uniform_model(variant, eps=0.2), coulomb_model(variant, kappa=0.3)):
        for _ in range(3):
            res = closedness_residual(model, random_point(rng))
            assert res < (1e-8 if variant == "free" else 1e-5)


def test_closedness_at_r2():
    model = coulomb_model("stora", kappa=1.0)
    p = EvolutionPoint.from_array(np.concatenate([[0, 0, 2.0, 0], [0.1, 0, 0, np.sqrt(1.01)], [0, 1.0, 0, 0]]))
    assert closedness_residual(model, p) < 1e-5


def test_closedness_negative_control(rng):
    slopes = np.zeros((4, 4, 4))
    slopes[0] = skew_from_parts([0, 0, 0], [0, 0, 1.0])
    bad = TwoFormModel("stora", ModelCoefficients.stora(1, 1, 1, 2.5), fields.LinearField(np.zeros((4, 4)), slopes))
    for _ in range(3):
        assert closedness_residual(bad, random_point(rng)) > 1e-3
