import numpy as np
import pytest

from presymspin import fields
from presymspin.evolution_space import EvolutionPoint, ModelCoefficients
from presymspin.minkowski import LabFrameState, skew_from_parts
from presymspin.presymplectic import TwoFormModel


def random_lab(rng, r_range=(1.0, 3.0), v_max=0.6):
    r = rng.normal(size=3)
    r *= rng.uniform(*r_range) / np.linalg.norm(r)
    v = rng.normal(size=3)
    v *= rng.uniform(0.0, v_max) / np.linalg.norm(v)
    u = rng.normal(size=3)
    return LabFrameState(r=r, t=rng.normal(), v=v, u=u / np.linalg.norm(u))


def random_point(rng, **kw):
    return EvolutionPoint.from_lab(random_lab(rng, **kw))


def random_skew(rng, scale=1.0):
    return skew_from_parts(scale * rng.normal(size=3), scale * rng.normal(size=3))


UNIFORM_F0 = skew_from_parts([0.6, 0.2, -0.4], [0.3, -0.5, 0.8])


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


def make_model(variant, field=None, g=2.5, m=1.0, s=1.0, q=1.0):
    if variant == "free":
        return TwoFormModel("free", ModelCoefficients.free(m, s, q, g), field)
    coeffs = getattr(ModelCoefficients, variant)(m, s, q, g)
    return TwoFormModel(variant, coeffs, field)


def uniform_model(variant, eps=0.05, g=2.5, F0=UNIFORM_F0):
    return make_model(variant, fields.uniform(eps * F0), g=g)


def coulomb_model(variant, kappa=0.05, g=2.5):
    return make_model(variant, fields.coulomb(kappa), g=g)
