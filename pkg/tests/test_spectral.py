import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsysid.estimator import error_metrics
from qsysid.model import ModelParams
from qsysid.sampling import stratified_grid, uniform_grid
from qsysid.simulator import DataVector, exact_trace
from qsysid.spectral import PowerSpectrum, find_peak, frequency_grid, nudft, power_spectrum

OMEGA_REF = 4.0484


def test_constant_at_zero_frequency():
    t = stratified_grid(10.0, 20, 1).times
    assert nudft(np.full(20, 0.3), t, [0.0])[0] == pytest.approx(20 * 0.3, abs=1e-13)


def test_length_mismatch():
    with pytest.raises(ValueError):
        nudft(np.ones(3), np.arange(4.0), [1.0])


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 50, 40))
    d, e = rng.random(40), rng.random(40)
    w = rng.uniform(0, 10, 25)
    lhs = nudft(a * d + b * e, t, w)
    rhs = a * nudft(d, t, w) + b * nudft(e, t, w)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(lhs)))


def test_matches_fft_on_uniform_grid():
    n, T = 128, 100.0
    t = uniform_grid(T, n).times
    d = np.random.default_rng(0).random(n)
    w = 2 * np.pi * np.arange(n) / T
    ref = np.fft.fft(d)
    assert np.max(np.abs(nudft(d, t, w) - ref)) < 1e-9 * np.max(np.abs(ref))


def test_on_bin_tone():
    n, T, k = 256, 100.0, 20
    t = uniform_grid(T, n).times
    w_star = 2 * np.pi * k / T
    out = np.abs(nudft(np.cos(w_star * t), t, frequency_grid(n, T)))
    assert out[k] == pytest.approx(n / 2, rel=1e-12)
    others = np.delete(out, k)
    assert np.max(others) <= 1e-9 * n


def test_constant_data_flat_spectrum():
    d = DataVector(uniform_grid(100.0, 64).times, np.full(64, 0.7))
    spec = power_spectrum(d)
    assert np.all(spec.values == pytest.approx(0.0, abs=1e-9))
    assert np.all(spec.values >= 0)


def test_offset_invariance():
    g = stratified_grid(100.0, 128, 3)
    d = exact_trace(ModelParams(1.2, 0.8), g)
    shifted = DataVector(g.times, d.values * 0.5 + 0.25, horizon=100.0)
    scaled = DataVector(g.times, d.values * 0.5, horizon=100.0)
    assert np.allclose(power_spectrum(shifted).values, power_spectrum(scaled).values, atol=1e-9)


def test_grid_top_frequency():
    spec = power_spectrum(exact_trace(ModelParams(1.0, 0.5), uniform_grid(100.0, 128)))
    assert spec.omegas[-1] == pytest.approx(np.pi * 128 / 100, abs=1e-12)
    assert spec.omegas[-1] == pytest.approx(4.021, abs=1e-3)


def test_pure_tone_peak():
    t = uniform_grid(100.0, 256).times
    d = DataVector(t, 0.5 + 0.5 * np.cos(2.0 * t), horizon=100.0)
    peak = find_peak(power_spectrum(d))
    assert peak.valid
    assert abs(peak.omega - 2.0) <= 2 * np.pi / 100


def test_on_bin_tone_exact_bin():
    k = 33
    t = uniform_grid(100.0, 256).times
    d = DataVector(t, 0.5 + 0.4 * np.cos(2 * np.pi * k / 100 * t), horizon=100.0)
    peak = find_peak(power_spectrum(d))
    assert peak.valid and peak.index == k


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 7.5), st.integers(0, 1000))
def test_tone_within_one_bin(w_star, seed):
    g = stratified_grid(100.0, 256, seed) if seed % 2 else uniform_grid(100.0, 256)
    d = DataVector(g.times, 0.5 + 0.5 * np.cos(w_star * g.times), horizon=100.0)
    spec = power_spectrum(d)
    k = 1 + int(np.argmax(spec.values[1:]))
    assert abs(spec.omegas[k] - w_star) <= 2 * np.pi / 100 + 1e-12


def test_peak_for_reference_system():
    d = exact_trace(ModelParams(OMEGA_REF, np.pi / 4), uniform_grid(100.0, 256))
    peak = find_peak(power_spectrum(d))
    assert peak.valid
    assert error_metrics(peak.omega, OMEGA_REF)[0] < 0.01


@pytest.mark.parametrize("nt", [32, 64, 128])
def test_no_peak_when_out_of_range(nt):
    d = exact_trace(ModelParams(OMEGA_REF, np.pi / 4), uniform_grid(100.0, nt))
    peak = find_peak(power_spectrum(d))
    assert peak is not None and not peak.valid
    assert peak.reason


def test_noise_floor_peak_rejected():
    # white noise of small amplitude: no bin clears median + 10
    rng = np.random.default_rng(1)
    t = uniform_grid(100.0, 256).times
    d = DataVector(t, 0.5 + 1e-3 * rng.standard_normal(256), horizon=100.0)
    assert not find_peak(power_spectrum(d)).valid


def test_dc_only_spectrum_has_no_peak():
    spec = PowerSpectrum(np.array([0.0]), np.array([0.0]), 1.0)
    assert find_peak(spec) is None
