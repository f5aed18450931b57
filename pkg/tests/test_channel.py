import numpy as np
import pytest

from imnoma.channel import (NoiseModel, db_to_linear, draw_channel, observe_freq, propagate_time)
from imnoma.tx import add_cp, remove_cp, to_freq_domain, to_time_domain


def test_single_tap_is_flat(rng):
    ch = draw_channel(1, 1.0, 64, rng)
    assert np.allclose(np.abs(ch.freq), np.abs(ch.taps[0]))


def test_frequency_response_definition(rng):
    N, v = 16, 5
    ch = draw_channel(v, 2.0, N, rng)
    phi = np.arange(N)
    direct = np.array([np.sum(ch.taps * np.exp(-2j * np.pi * np.arange(v) * f / N)) for f in phi])
    assert np.allclose(ch.freq, direct)


def test_subcarrier_power_matches_variance(rng):
    sigma2 = 0.5
    ch = draw_channel(10, sigma2, 128, rng, size=100_000)
    for phi in (0, 17, 127):
        p = np.abs(ch.freq[:, phi]) ** 2
        assert abs(p.mean() - sigma2) < 3 * p.std() / np.sqrt(p.size)
    taps = np.sum(np.abs(ch.taps) ** 2, axis=1)
    assert abs(taps.mean() - sigma2) < 3 * taps.std() / np.sqrt(taps.size)


def test_far_user_variance_value():
    assert db_to_linear(-3) == pytest.approx(0.5012, abs=1e-4)


def test_draw_is_deterministic():
    a = draw_channel(10, 1.0, 128, np.random.default_rng(5))
    b = draw_channel(10, 1.0, 128, np.random.default_rng(5))
    assert np.array_equal(a.taps, b.taps)


def test_noise_model():
    nm = NoiseModel.from_snr_db(30)
    assert nm.N0 == pytest.approx(1e-3)
    assert nm.snr_db == pytest.approx(30)
    with pytest.raises(ValueError):
        NoiseModel(0.0)


def test_propagate_zero_input_is_noise(rng):
    ch = draw_channel(10, 1.0, 128, rng)
    y = np.concatenate([propagate_time(np.zeros(144), ch, 0.1, rng) for _ in range(200)])
    assert np.mean(np.abs(y) ** 2) == pytest.approx(0.1, rel=0.05)


def test_propagate_identity_channel(rng):
    ch = draw_channel(1, 1.0, 8, rng)
    ch = type(ch)(taps=np.array([1.0 + 0j]), freq=np.ones(8, complex), sigma2=1.0)
    x = rng.standard_normal(10) + 0j
    assert np.allclose(propagate_time(x, ch, 0.0), x)


def test_propagate_rejects_short_cp(rng):
    ch = draw_channel(10, 1.0, 128, rng)
    with pytest.raises(ValueError):
        propagate_time(np.zeros(128 + 8), ch, 0.0)


def test_time_and_frequency_paths_agree(rng):
    N, C = 128, 16
    for v in (1, 5, 10, 17):
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        ch = draw_channel(v, 1.0, N, rng)
        y_time = to_freq_domain(remove_cp(propagate_time(add_cp(to_time_domain(x), C), ch, 0.0), C))
        assert np.max(np.abs(y_time - observe_freq(x, ch, 0.0))) < 1e-9


def test_time_path_noise_maps_to_frequency_noise(rng):
    # same time-domain noise realisation, transformed, reproduces the per-subcarrier model
    N, C, N0 = 64, 8, 0.05
    x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    ch = draw_channel(6, 1.0, N, rng)
    noise_rng = np.random.default_rng(99)
    y_cp = propagate_time(add_cp(to_time_domain(x), C), ch, N0, noise_rng)
    w_time = propagate_time(np.zeros(N + C), ch, N0, np.random.default_rng(99))
    w_freq = to_freq_domain(remove_cp(w_time, C))
    assert np.allclose(to_freq_domain(remove_cp(y_cp, C)), ch.freq * x + w_freq, atol=1e-9)


def test_observe_freq_noiseless_and_noise_variance(rng):
    h = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    x = rng.standard_normal(32) + 0j
    assert np.array_equal(observe_freq(x, h, 0.0), h * x)
    y = observe_freq(np.zeros((20_000, 4)), np.ones(4), 0.2, rng)
    var = np.mean(np.abs(y) ** 2, axis=0)
    se = 0.2 / np.sqrt(20_000)
    assert np.all(np.abs(var - 0.2) < 3 * se)
