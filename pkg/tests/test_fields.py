import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import UNIFORM_F0, random_skew
from presymspin import fields
from presymspin.fields import FieldSingularity, NoPotential
from presymspin.minkowski import _star, is_skew, skew_from_parts, skew_parts


def test_uniform_field_is_constant(rng):
    f = fields.uniform(UNIFORM_F0)
    for _ in range(5):
        X = rng.normal(size=4)
        np.testing.assert_array_equal(fields.field_at(f, X), UNIFORM_F0)
        np.testing.assert_array_equal(fields.grad_field_at(f, X, rng.normal(size=4)), 0.0)
    assert fields.check_maxwell(f, rng.normal(size=4)) == 0.0


def test_uniform_potential_needs_gauge_origin():
    with pytest.raises(NoPotential, match="no global static potential"):
        fields.uniform(UNIFORM_F0).potential(np.zeros(4))
    magnetic = fields.uniform(skew_from_parts([0, 0, 1.0], [0, 0, 0]))
    assert magnetic.potential(np.ones(4)) == 0.0
    f = fields.uniform(UNIFORM_F0, gauge_origin=np.zeros(4))
    X = np.array([0.3, -0.2, 0.5, 1.0])
    _, e = skew_parts(UNIFORM_F0)
    assert abs(f.potential(X) + np.dot(e, X[:3])) < 1e-15


def test_coulomb_example():
    f = fields.coulomb(1.0)
    E = f.electric([0, 0, 2.0, 0])
    np.testing.assert_allclose(E, [0, 0, 0.25], atol=1e-15)
    assert fields.potential_at(f, [0, 0, 2.0, 0]) == 0.5
    # central-difference oracle for E = -grad phi
    X = np.array([0.0, 0.0, 2.0, 0.0])
    h = 1e-6
    grad = [(f.potential(X + h * e) - f.potential(X - h * e)) / (2 * h) for e in np.eye(4)[:3]]
    np.testing.assert_allclose(-np.array(grad), E, rtol=1e-7)


def test_harmonic_potential():
    assert fields.harmonic(1.0).potential([0, 2.0, 0, 0]) == 2.0


@pytest.mark.parametrize("make", [lambda: fields.coulomb(0.7), lambda: fields.harmonic(1.3)])
def test_potential_gradient_matches_field(rng, make):
    f = make()
    for _ in range(10):
        X = np.append(rng.uniform(1, 3) * rng.normal(size=3) / np.sqrt(3), rng.normal())
        h = 1e-5
        grad = np.array([(f.potential(X + h * e) - f.potential(X - h * e)) / (2 * h) for e in np.eye(4)[:3]])
        # F(U, .) restricted to space is the electric part, E = -grad(phi)
        _, e = skew_parts(f.field(X))
        np.testing.assert_allclose(-grad, e, rtol=1e-7, atol=1e-12)


def test_central_field_rotation_covariance(rng):
    f = fields.coulomb(1.0)
    for R in Rotation.random(20, random_state=7).as_matrix():
        r = rng.normal(size=3) * 2
        Rhat = np.eye(4)
        Rhat[:3, :3] = R
        np.testing.assert_allclose(f.field(np.append(R @ r, 0.0)), Rhat @ f.field(np.append(r, 0.0)) @ Rhat.T,
                                   atol=1e-14)


@pytest.mark.parametrize("f", [fields.coulomb(0.8), fields.harmonic(0.4),
                               fields.tabulated(np.linspace(0.5, 5, 60), 1 / np.linspace(0.5, 5, 60))])
def test_gradient_matches_central_difference(rng, f):
    for _ in range(5):
        r = rng.normal(size=3)
        X = np.append(rng.uniform(1, 3) * r / np.linalg.norm(r), 0.0)
        for d in (np.append(r / np.linalg.norm(r), 0.0), rng.normal(size=4)):
            h = 1e-6
            fd = (f.field(X + h * d) - f.field(X - h * d)) / (2 * h)
            an = fields.grad_field_at(f, X, d)
            assert np.max(np.abs(an - fd)) <= 1e-7 * max(1.0, np.max(np.abs(an)))
        np.testing.assert_array_equal(fields.grad_field_at(f, X, [0, 0, 0, 1.0]), 0.0)


def test_singularity():
    with pytest.raises(FieldSingularity, match="field singularity"):
        fields.coulomb(1.0).field([0, 0, 1e-7, 0])
    with pytest.raises(FieldSingularity):
        fields.coulomb(1.0, r_min=0.5).field([0, 0, 0.4, 0])


def test_fields_are_skew_and_star_annihilates_observer(rng):
    f = fields.coulomb(1.0)
    for _ in range(20):
        X = np.append(rng.normal(size=3) * 2, 0.0)
        F = f.field(X)
        assert is_skew(F, 1e-14)
        assert np.max(np.abs(_star(F) @ f.U)) < 1e-12


def test_maxwell_residual_small_for_coulomb(rng):
    f = fields.coulomb(1.0)
    for _ in range(20):
        d = rng.normal(size=3)
        X = np.append(rng.uniform(1, 10) * d / np.linalg.norm(d), rng.normal())
        assert fields.check_maxwell(f, X) < 1e-6


def test_maxwell_flags_non_closed_fields(rng):
    slopes = np.zeros((4, 4, 4))
    slopes[0] = skew_from_parts([0, 0, 0], [0, 0, 1.0])
    bad = fields.LinearField(np.zeros((4, 4)), slopes)
    assert fields.check_maxwell(bad, rng.normal(size=4)) > 0.5
    # random slopes are generically not closed
    rand = fields.LinearField(random_skew(rng), np.array([random_skew(rng) for _ in range(4)]))
    assert fields.check_maxwell(rand, np.zeros(4)) > 1e-3


def _corrupted_table():
    r = np.linspace(0.5, 4.0, 40)
    phi = 1.0 / r
    rr = np.concatenate([r[:20], r[19:]])
    pp = np.concatenate([phi[:20], phi[19:] + 0.3])  # potential jump at r[19]
    return rr, pp


def test_tabulated_profile_matches_analytic():
    r = np.linspace(0.5, 5.0, 200)
    f = fields.tabulated(r, 2.0 / r)
    X = np.array([0.0, 1.3, 0.9, 0.0])
    rn = np.linalg.norm(X[:3])
    assert abs(f.potential(X) - 2.0 / rn) < 1e-5
    np.testing.assert_allclose(f.electric(X), 2.0 / rn**3 * X[:3], rtol=1e-4)


def test_corrupted_table_is_flagged():
    rr, pp = _corrupted_table()
    f = fields.tabulated(rr, pp)
    d = np.array([1.0, 0.7, 0.4]) / np.linalg.norm([1.0, 0.7, 0.4])
    res = [fields.check_maxwell(f, np.append(r * d, 0.0)) for r in f.profile.audit_radii()]
    assert max(res) > 1e-3
    smooth = fields.tabulated(np.unique(rr), 1.0 / np.unique(rr))
    res = [fields.check_maxwell(smooth, np.append(r * d, 0.0)) for r in smooth.profile.audit_radii()]
    assert max(res) < 1e-6


def test_table_loader(tmp_path):
    p = tmp_path / "phi.txt"
    np.savetxt(p, np.column_stack([np.linspace(1, 2, 5), np.linspace(1, 2, 5) ** 2]), header="r phi")
    r, phi = fields.load_profile_table(p)
    assert r.shape == (5,) and phi[-1] == 4.0
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3\n4 5 6\n")
    with pytest.raises(ValueError, match="two columns"):
        fields.load_profile_table(bad)


def test_scaled_is_linear(rng):
    X = np.array([1.0, 0.5, -0.3, 0.0])
    for f in (fields.coulomb(0.3), fields.uniform(UNIFORM_F0)):
        np.testing.assert_allclose(f.scaled(0.25).field(X), 0.25 * f.field(X), atol=1e-15)
