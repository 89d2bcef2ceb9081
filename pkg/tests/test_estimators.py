import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from vlinetomo import (
    DomainError,
    FullDataReconstructor,
    HalfDataReconstructor,
    VLineProjector,
    VLineSinogram,
    make_phantom,
    relative_errors,
)
from vlinetomo.phantoms import default_full_spec, default_partial_spec


def test_params_and_clone():
    p = VLineProjector(n_phi=90, coverage="half")
    assert p.get_params()["n_phi"] == 90
    q = clone(p).set_params(n_d=33)
    assert q.n_d == 33 and q.coverage == "half" and p.n_d == 256
    assert HalfDataReconstructor().get_params()["T_max"] == 200.0


def test_not_fitted():
    with pytest.raises(NotFittedError):
        VLineProjector().transform(make_phantom(default_full_spec(1, 1.0, 1.0)))
    with pytest.raises(NotFittedError):
        FullDataReconstructor().predict()


@pytest.mark.parametrize(
    "est",
    [VLineProjector(R=-1.0), VLineProjector(coverage="most"), VLineProjector(n_d=1), VLineProjector(noise_sigma=-0.1), VLineProjector(h=0.0)],
)
def test_projector_validation(est):
    with pytest.raises(DomainError):
        est.fit()


def test_projector_rejects_non_field():
    with pytest.raises(DomainError):
        VLineProjector(n_phi=4, n_d=3).fit().transform(np.zeros(3))


@pytest.fixture(scope="module")
def full_data():
    field = make_phantom(default_full_spec(2, 1.0, math.pi / 3))
    proj = VLineProjector(n_phi=180, n_d=129).fit()
    return field, proj.transform(field)


def test_full_reconstructor(full_data):
    field, sino = full_data
    est = FullDataReconstructor(n_pixels=64)
    rasters = est.fit(sino).predict()
    assert rasters.shape == (3, 64, 64)
    assert est.radon_.kind == "radon" and est.lines_.kind == "transforms" and est.m_ == 2
    l2, linf = relative_errors(rasters, field.rasterize(64, 1.0))
    assert np.all(l2 <= 0.05)
    assert np.array_equal(FullDataReconstructor(n_pixels=64).transform(sino).data, rasters)


def test_full_reconstructor_validation(full_data):
    _, sino = full_data
    with pytest.raises(DomainError):
        FullDataReconstructor(filter="cosine").fit(sino)
    half = VLineSinogram(sino.scene, 2, sino.phi_grid, sino.d_grid[:65], sino.data[:, :, :65])
    with pytest.raises(DomainError):
        FullDataReconstructor().fit(half)
    with pytest.raises(DomainError):
        FullDataReconstructor().fit(np.zeros((3, 4, 4)))


def test_noise_is_seeded():
    field = make_phantom(default_full_spec(1, 1.0, math.pi / 3))
    a = VLineProjector(n_phi=8, n_d=9, noise_sigma=0.01, seed=4).fit().transform(field)
    b = VLineProjector(n_phi=8, n_d=9, noise_sigma=0.01, seed=4).fit().transform(field)
    c = VLineProjector(n_phi=8, n_d=9).fit().transform(field)
    assert np.array_equal(a.data, b.data) and not np.array_equal(a.data, c.data)


def test_half_reconstructor():
    field = make_phantom(default_partial_spec(1.0))
    sino = VLineProjector(n_phi=32, n_d=129, coverage="half").fit().transform(field)
    est = HalfDataReconstructor(N=6, n_radial=128, n_pixels=32, T_max=100.0).fit(sino)
    assert est.predict().shape == (3, 32, 32)
    assert est.report_["ill_conditioned"] == []
    assert list(est.modes_.modes) == list(range(-4, 5))
    with pytest.raises(DomainError):
        HalfDataReconstructor().fit(VLineProjector(n_phi=8, n_d=5).fit().transform(make_phantom(default_full_spec(1, 1.0, math.pi / 3))))


def test_relative_errors():
    ref = np.ones((2, 3, 3))
    l2, linf = relative_errors(ref * 1.1, ref)
    np.testing.assert_allclose(l2, 0.1)
    np.testing.assert_allclose(linf, 0.1)
    mask = np.zeros((3, 3), bool)
    mask[1, 1] = True
    est = ref.copy()
    est[:, 0, 0] = 5
    assert not relative_errors(est, ref, mask)[0].any()
    with pytest.raises(DomainError):
        relative_errors(np.ones((1, 2, 2)), ref)
