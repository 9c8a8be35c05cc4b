import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from eegrid import oracles
from eegrid.features import (band_features, feature_layout, mean_band_energy, model1_matrix,
                             relative_energies, wavelet_entropy)
from eegrid.preprocess import WindowSegment
from eegrid.wavelet import DEAP_BANDS, SAD_BANDS

energy_vectors = arrays(float, st.integers(1, 8), elements=st.floats(0, 1e6)).filter(lambda e: e.sum() > 0)


def test_mean_band_energy_examples():
    assert mean_band_energy([2, 2]) == 4
    assert mean_band_energy(np.zeros(5)) == 0
    assert mean_band_energy([3]) == 9
    with pytest.raises(ValueError):
        mean_band_energy([])


@given(arrays(float, st.integers(1, 50), elements=st.floats(-1e3, 1e3)), st.floats(-100, 100))
def test_mean_band_energy_is_two_homogeneous(c, a):
    assert math.isclose(mean_band_energy(a * c), a * a * mean_band_energy(c), rel_tol=1e-12, abs_tol=1e-300)


def test_relative_energy_examples():
    np.testing.assert_allclose(relative_energies([1, 1, 2]), [0.25, 0.25, 0.5])
    np.testing.assert_allclose(relative_energies([5]), [1.0])
    with pytest.raises(ValueError, match="degenerate"):
        relative_energies([0, 0, 0])
    with pytest.raises(ValueError):
        relative_energies([1, -1])


def test_entropy_examples():
    assert wavelet_entropy([1.0])[0] == 0
    assert wavelet_entropy([0.0])[0] == 0
    assert math.isclose(wavelet_entropy([1 / math.e])[0], 1 / math.e, rel_tol=1e-15)
    with pytest.raises(ValueError):
        wavelet_entropy([1.5])


@given(energy_vectors)
def test_relative_energy_and_entropy_match_oracle(e):
    q = relative_energies(e)
    w = wavelet_entropy(q)
    q_ref, w_ref = oracles.relative_energy_entropy(e)
    assert abs(q.sum() - 1) <= 1e-12
    np.testing.assert_allclose(q, q_ref, atol=1e-15)
    np.testing.assert_allclose(w, w_ref, atol=1e-15)
    assert 0 <= w.sum() <= math.log(len(e)) + 1e-12
    assert np.all(w[(q == 0) | (q == 1)] == 0)


def window(rng, m, seconds, rate=128):
    return WindowSegment("S", "T", 0, rng.normal(size=(m, seconds * rate)), 1,
                         tuple(f"C{i}" for i in range(m)))


@pytest.mark.parametrize("m,seconds,bands,entropy,shape", [
    (34, 5, SAD_BANDS, False, (34, 5)),
    (34, 5, SAD_BANDS, True, (34, 10)),
    (32, 4, DEAP_BANDS, True, (32, 8)),
    (32, 4, DEAP_BANDS, False, (32, 4)),
])
def test_model1_shapes(rng, m, seconds, bands, entropy, shape):
    fm = model1_matrix(window(rng, m, seconds), bands, entropy)
    assert fm.data.shape == shape
    assert fm.feature_layout == feature_layout(bands, entropy)
    assert fm.label == 1 and fm.channels[0] == "C0"


def test_model1_columns_are_energies_then_entropies(rng):
    win = window(rng, 3, 1)
    fm = model1_matrix(win, SAD_BANDS, True)
    e = fm.data[:, :5]
    np.testing.assert_allclose(fm.data[:, 5:], wavelet_entropy(relative_energies(e)))
    assert fm.feature_layout[0] == "Delta:energy" and fm.feature_layout[5] == "Delta:entropy"


def test_model1_rejects_bad_length(rng):
    bad = WindowSegment("S", "T", 0, rng.normal(size=(2, 100)))
    with pytest.raises(ValueError):
        model1_matrix(bad, SAD_BANDS, False)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_entropy_features_are_scale_invariant(seed, a):
    x = np.random.default_rng(seed).normal(size=(2, 128))
    f1 = band_features(x, SAD_BANDS, True)
    f2 = band_features(a * x, SAD_BANDS, True)
    np.testing.assert_allclose(f2[:, 5:], f1[:, 5:], atol=1e-9)
    np.testing.assert_allclose(f2[:, :5], a * a * f1[:, :5], rtol=1e-9)
