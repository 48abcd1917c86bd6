import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrw2d import _kernels, oracles
from qrw2d.config import DISABLE_NUMBA_ENV
from qrw2d.model import builtin_models, make_grover, make_S
from qrw2d.simulate import (
    WaveField,
    amplitude_at,
    basis,
    evolve,
    initial,
    probability_profile,
    site_probability,
    step,
)

MODELS = builtin_models()


def test_initial_state():
    f = initial(basis(1))
    assert f.n == 0 and f.amps.shape == (1, 1, 4)
    with pytest.raises(ValueError):
        initial([1, 1, 0, 0])


def test_one_step_from_first_chirality():
    m = make_S(0.5)
    f = evolve(m, basis(1), 1)
    p = probability_profile(f)
    assert np.count_nonzero(p > 0) == 4
    # chirality i moves along step i carrying U[i, 0]
    for i, (dr, ds) in enumerate([(1, 0), (-1, 0), (0, 1), (0, -1)]):
        assert amplitude_at(f, dr, ds, i + 1) == pytest.approx(m.coin[i, 0])


def test_step_composes():
    m = MODELS["A(1/3)"]
    f = evolve(m, basis(2), 3)
    assert np.allclose(step(f, m).amps, evolve(m, basis(2), 4).amps, atol=1e-15)


@pytest.mark.parametrize("name", list(MODELS))
def test_matches_matrix_power_oracle(name):
    m = MODELS[name]
    for n in (0, 1, 2, 5):
        for j in range(1, 5):
            ref = oracles.matrix_power_field(m, basis(j), n)
            assert np.max(np.abs(evolve(m, basis(j), n).amps - ref)) < 1e-13


@pytest.mark.parametrize("name", ["S(1/8)", "B(1/2)"])
def test_matches_fourier_oracle(name):
    m = MODELS[name]
    start = np.array([0.5, 0.5j, -0.5, 0.5])
    ref = oracles.fourier_amplitudes(m, start, 12)
    assert np.max(np.abs(evolve(m, start, 12).amps - ref)) < 1e-12


@given(st.integers(0, 30), st.sampled_from(list(MODELS)))
def test_norm_and_support(n, name):
    f = evolve(MODELS[name], basis(3), n)
    assert abs(f.norm() - 1) < 1e-10
    r = f.coords[:, None]
    s = f.coords[None, :]
    outside = (np.abs(r) + np.abs(s) > n) | ((r + s - n) % 2 != 0)
    assert np.all(f.amps[outside] == 0)


def test_accessors_out_of_range():
    f = evolve(make_grover(), basis(1), 2)
    assert amplitude_at(f, 5, 0, 1) == 0
    assert site_probability(f, 0, 9) == 0.0
    with pytest.raises(IndexError):
        amplitude_at(f, 0, 0, 5)


def test_wavefield_shape_check():
    with pytest.raises(ValueError):
        WaveField(2, np.zeros((3, 3, 4), complex))


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        evolve(make_grover(), basis(1), -1)


def test_grover_localises_at_origin():
    p = probability_profile(evolve(make_grover(), basis(1), 200))
    assert p[200, 200] > 1e-2


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_numba_and_numpy_kernels_agree(monkeypatch):
    m = MODELS["B(1/2)"]
    start = np.array([0.5, 0.5, 0.5j, -0.5])
    fast = evolve(m, start, 40).amps
    monkeypatch.setenv(DISABLE_NUMBA_ENV, "1")
    assert not _kernels.using_numba()
    slow = evolve(m, start, 40).amps
    assert np.max(np.abs(fast - slow)) < 1e-14


def test_bin_kernels_agree(rng):
    pts = rng.uniform(-1, 1, (1000, 2))
    a = _kernels.bin_points_numpy(pts[:, 0], pts[:, 1], -1.0, 1.0, 16)
    b = _kernels.bin_kernel()(pts[:, 0], pts[:, 1], -1.0, 1.0, 16)
    assert np.array_equal(a, b)
    assert a.sum() == 1000
