import numpy as np
import pytest
from hypothesis import given, strategies as st

from eegrid import oracles
from eegrid.wavelet import (DEAP_BANDS, SAD_BANDS, Band, band_extract, band_spec, daubechies_lowpass,
                            frequency_order, make_db4, natural_to_frequency, wpd_decompose, analysis_step)

# Published db4 scaling filter (8 taps, minimum phase).
DB4_TABLE = np.array([0.2303778133088964, 0.7148465705529154, 0.6308807679298587, -0.02798376941685985,
                      -0.18703481171909309, 0.030841381835560764, 0.032883011666885, -0.010597401785069032])


def test_db4_invariants():
    q = make_db4()
    h, g = q.lowpass, q.highpass
    assert len(h) == 8
    assert abs(h.sum() - np.sqrt(2)) < 1e-10
    assert abs(np.sum(h**2) - 1) < 1e-10
    np.testing.assert_allclose(g, [(-1) ** k * h[7 - k] for k in range(8)])
    for s in (2, 4, 6):
        assert abs(np.dot(h[s:], h[:-s])) < 1e-10
    assert abs(np.dot(h, g)) < 1e-12


def test_db4_matches_published_table():
    np.testing.assert_allclose(make_db4().lowpass, DB4_TABLE, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 6])
def test_spectral_factorization_is_orthonormal(n):
    h = daubechies_lowpass(n)
    assert len(h) == 2 * n
    assert abs(h.sum() - np.sqrt(2)) < 1e-9
    for s in range(0, 2 * n, 2):
        assert abs(np.dot(h[s:], h[:len(h) - s]) - (s == 0)) < 1e-9
    # vanishing moments of the highpass
    g = (-1.0) ** np.arange(2 * n) * h[::-1]
    for p in range(n):
        assert abs(np.sum(g * np.arange(2 * n) ** p)) < 1e-6 * 10**p


def circular_step(x, h):
    L = len(x)
    return np.array([sum(h[k] * x[(2 * n + k) % L] for k in range(len(h))) for n in range(L // 2)])


def test_analysis_step_matches_circular_convolution(rng):
    q = make_db4()
    x = rng.normal(size=64)
    a, d = analysis_step(x, q)
    np.testing.assert_allclose(a, circular_step(x, q.lowpass), atol=1e-12)
    np.testing.assert_allclose(d, circular_step(x, q.highpass), atol=1e-12)
    assert abs((a @ a + d @ d) - x @ x) <= 1e-9 * (x @ x)


def test_analysis_step_shapes_and_errors():
    a, d = analysis_step(np.zeros(8))
    assert a.shape == d.shape == (4,)
    assert not a.any() and not d.any()
    with pytest.raises(ValueError):
        analysis_step(np.zeros(7))


def test_640_samples_give_16_leaves_of_40(rng):
    leaves = wpd_decompose(rng.normal(size=640))
    assert leaves.data.shape == (16, 40)
    assert leaves.n_leaves == 16 and leaves.leaf_length == 40
    with pytest.raises(ValueError):
        wpd_decompose(np.zeros(100))


@given(st.integers(1, 5), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_parseval_at_every_depth(level, blocks, seed):
    x = np.random.default_rng(seed).normal(size=blocks * 2**level)
    e = np.sum(wpd_decompose(x, level).data ** 2)
    assert abs(e - x @ x) <= 1e-9 * (x @ x)


def test_batched_decomposition_matches_single(rng):
    x = rng.normal(size=(3, 128))
    batch = wpd_decompose(x).data
    for i in range(3):
        np.testing.assert_allclose(batch[i], wpd_decompose(x[i]).data, atol=1e-12)


def test_frequency_order_small_levels():
    assert frequency_order(1).tolist() == [0, 1]
    assert frequency_order(2).tolist() == [0, 1, 3, 2]
    with pytest.raises(ValueError):
        frequency_order(0)


@pytest.mark.parametrize("level", [2, 3, 4])
def test_frequency_order_tone_probe(level):
    rate, n = 128.0, 2048
    width = rate / 2 / 2**level
    t = np.arange(n)
    order = frequency_order(level)
    for b in range(2**level):
        f = (b + 0.5) * width
        x = np.cos(2 * np.pi * f * t / rate)
        e = np.sum(wpd_decompose(x, level).data ** 2, axis=-1)
        assert np.argmax(e) == order[b]


def test_frequency_order_is_a_bijection_with_inverse():
    for level in range(1, 7):
        p = frequency_order(level)
        assert sorted(p.tolist()) == list(range(2**level))
        np.testing.assert_array_equal(p[natural_to_frequency(level)], np.arange(2**level))


def test_tone_leaf_energy_matches_cascade_oracle():
    # Tones on a bin edge alias onto themselves at the last stage; the
    # cascade-response formula only holds away from those frequencies.
    h = make_db4().lowpass
    t = np.arange(1024)
    for f in (2.0, 10.0, 22.0, 33.0, 62.0):
        x = np.cos(2 * np.pi * f * t / 128.0)
        e = np.sum(wpd_decompose(x).data ** 2, axis=-1) / (x @ x)
        np.testing.assert_allclose(e, oracles.leaf_energy_fractions(f, 128.0, h), atol=1e-10)


def direct_leaves(x, h, level=4):
    g = (-1.0) ** np.arange(len(h)) * h[::-1]
    nodes = [x]
    for _ in range(level):
        nodes = [c for n in nodes for c in (circular_step(n, h), circular_step(n, g))]
    return np.array(nodes)


def test_twenty_hz_tone_peaks_in_an_adjacent_leaf():
    t = np.arange(640)
    x = np.sin(2 * np.pi * 20 * t / 128.0)
    leaves = wpd_decompose(x)
    direct = direct_leaves(x, make_db4().lowpass)
    np.testing.assert_allclose(leaves.data, direct, atol=1e-10)
    e = np.sum(leaves.frequency_ordered() ** 2, axis=-1) / (x @ x)
    assert np.argmax(e) in (4, 5)
    # db4 transition bands are wide: the two neighbouring leaves hold about 81%.
    assert e[4] + e[5] > 0.8


def test_band_leaf_sets():
    idx = {b.band: b.leaf_indices for b in SAD_BANDS}
    assert idx[Band.DELTA] == (0,)
    assert idx[Band.THETA] == (1,)
    assert idx[Band.ALPHA] == (2,)
    assert idx[Band.BETA] == (3, 4, 5, 6, 7)
    assert idx[Band.GAMMA] == (8, 9, 10, 11)
    flat = [i for v in idx.values() for i in v]
    assert len(flat) == len(set(flat)) == 12
    assert [b.band for b in DEAP_BANDS] == [Band.THETA, Band.ALPHA, Band.BETA, Band.GAMMA]


def test_band_spec_errors():
    with pytest.raises(ValueError):
        band_spec("Alpha", hz_range=(7.0, 12.0))
    with pytest.raises(ValueError):
        band_spec("Gamma", hz_range=(32.0, 80.0))


def test_band_extract_concatenates_in_frequency_order(rng):
    leaves = wpd_decompose(rng.normal(size=256))
    beta = band_extract(leaves, SAD_BANDS[3])
    nat = frequency_order(4)
    ref = np.concatenate([leaves.leaf(nat[i]) for i in range(3, 8)])
    np.testing.assert_array_equal(beta, ref)
    bad = band_spec("Alpha")
    with pytest.raises(IndexError):
        band_extract(wpd_decompose(rng.normal(size=64), level=1), bad)
