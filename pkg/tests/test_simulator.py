import numpy as np
import pytest
from scipy import stats

from qsysid.model import ModelParams, p11
from qsysid.sampling import stratified_grid, uniform_grid
from qsysid.simulator import (
    DataVector,
    exact_trace,
    point_rng,
    simulate_fixed_point,
    simulate_point,
    simulate_trace,
)

HALF = ModelParams(2.0, np.pi / 4)


def test_exact_trace_values():
    g = uniform_grid(100.0, 64)
    d = exact_trace(HALF, g)
    assert d.values[0] == 1.0
    assert np.all(exact_trace(ModelParams(1.0, np.pi / 2), g).values == pytest.approx(1.0, abs=1e-15))
    assert p11(HALF, np.pi / 4) == pytest.approx(0.25, abs=1e-15)
    assert d.horizon == 100.0


def test_certain_outcome_stops_after_one_batch(rng):
    rec = simulate_point(ModelParams(3.0, np.pi / 2), 1.234, rng)
    assert (rec.shots, rec.successes, rec.estimate) == (100, 100, 1.0)


def test_zero_probability_hits_cap(rng):
    # x = 1 and omega t = pi/2 gives p11 = cos^2 = 0
    rec = simulate_point(ModelParams(1.0, 0.0), np.pi / 2, rng)
    assert rec.successes == 0 and rec.shots == 10_000


def test_half_probability_mean_shots():
    p = ModelParams(1.0, 0.0)
    t = np.pi / 4  # cos^2 = 0.5
    shots = [simulate_point(p, t, point_rng(s, 0)).shots for s in range(200)]
    assert all(100 <= n <= 10_000 for n in shots)
    assert 300 <= np.mean(shots) <= 500


def test_stopping_rule_always_satisfied():
    g = stratified_grid(100.0, 200, 5)
    params = ModelParams(1.7, 0.9)
    _, records = simulate_trace(params, g, 11, return_records=True)
    for rec in records:
        assert rec.estimate * np.sqrt(rec.shots) >= 10.0 or rec.shots == 10_000
        assert 0 <= rec.successes <= rec.shots <= 10_000


def test_odd_cap_truncates_last_batch(rng):
    rec = simulate_point(ModelParams(1.0, 0.0), np.pi / 2, rng, max_shots=250, batch=100)
    assert rec.shots == 250


@pytest.mark.parametrize("kwargs", [dict(snr_target=0), dict(batch=0), dict(batch=200, max_shots=100)])
def test_rule_validation(rng, kwargs):
    with pytest.raises(ValueError):
        simulate_point(HALF, 0.1, rng, **kwargs)


def test_large_fixed_shots_converge():
    g = uniform_grid(100.0, 50)
    params = ModelParams(1.0, 0.0)
    data = simulate_trace(params, g, 3, fixed_shots=1_000_000)
    exact = p11(params, g.times)
    near_half = np.abs(exact - 0.5) < 0.3
    # binomial standard error at p = 0.5 and 1e6 shots is 5e-4
    assert np.all(np.abs(data.values - exact)[near_half] < 3e-3)


def test_trace_seed_determinism():
    g = stratified_grid(100.0, 64, 2)
    a = simulate_trace(HALF, g, 99)
    b = simulate_trace(HALF, g, 99)
    c = simulate_trace(HALF, g, 100)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.shots, b.shots)
    assert not np.array_equal(a.values, c.values)


def test_point_streams_independent_of_order():
    g = uniform_grid(100.0, 16)
    full = simulate_trace(HALF, g, 4)
    rec = simulate_point(HALF, g.times[9], point_rng(4, 9))
    assert full.values[9] == rec.estimate


def test_fixed_shot_estimate_unbiased():
    t = 0.3
    p = float(p11(HALF, t))
    n = 400
    est = np.array([simulate_fixed_point(HALF, t, point_rng(s, 0), n).estimate for s in range(10_000)])
    se = np.sqrt(p * (1 - p) / n) / np.sqrt(est.size)
    assert abs(est.mean() - p) < 4 * se


def test_error_distribution_roughly_gaussian():
    # fixed-shot errors at p in [0.2, 0.8] are close to symmetric
    params = ModelParams(1.0, 0.0)
    ts = np.linspace(0.5, 0.9, 40)  # cos^2 over this range spans about 0.4..0.77
    errors = []
    for i, t in enumerate(ts):
        p = float(p11(params, t))
        assert 0.2 <= p <= 0.8
        for s in range(100):
            rec = simulate_fixed_point(params, t, point_rng(1000 * i + s, 1), 100)
            errors.append((rec.estimate - p) / np.sqrt(p * (1 - p) / 100))
    assert abs(stats.skew(errors)) < 0.5


def test_data_vector_validation():
    with pytest.raises(ValueError):
        DataVector([0.0, 1.0], [0.5])
    with pytest.raises(ValueError):
        DataVector([0.0, 1.0], [0.5, 1.5])
    with pytest.raises(ValueError):
        DataVector([0.0, 1.0], [0.5, 0.5], shots=[1])
    d = DataVector(uniform_grid(10.0, 4).times, [1.0, 0.5, 0.5, 1.0])
    assert d.span == pytest.approx(10.0)
