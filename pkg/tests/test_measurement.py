import numpy as np
import pytest
from scipy import stats

from optent import core, measurement, models
from optent.errors import ValidationError
from optent.measurement import MeasurementSetting, SourceConfig
from optent.models import ModelPoint

S0 = MeasurementSetting(0.0, 0.0)
S45 = MeasurementSetting(np.pi / 4, np.pi / 4)


def test_projector_examples():
    np.testing.assert_allclose(measurement.projector(0, S0), core.pure_density(core.HH), atol=1e-15)
    np.testing.assert_allclose(measurement.projector(3, S0), core.pure_density(core.VV), atol=1e-15)
    dd = core.tensor(core.D, core.D)
    np.testing.assert_allclose(measurement.projector(0, S45), core.pure_density(dd), atol=1e-15)


def test_projectors_complete_and_orthogonal(rng):
    for _ in range(20):
        s = MeasurementSetting(*rng.uniform(-np.pi, np.pi, 2))
        ps = [measurement.projector(x, s) for x in range(4)]
        np.testing.assert_allclose(sum(ps), np.eye(4), atol=1e-14)
        for i in range(4):
            for j in range(4):
                expected = ps[i] if i == j else 0
                np.testing.assert_allclose(ps[i] @ ps[j], expected, atol=1e-14)


def test_projector_bad_outcome():
    with pytest.raises(ValidationError):
        measurement.projector(4, S0)


def test_born_probabilities_examples():
    np.testing.assert_allclose(measurement.born_probabilities(core.pure_density(core.PHI_PLUS), S45),
                               [0.5, 0, 0, 0.5], atol=1e-15)
    np.testing.assert_allclose(measurement.born_probabilities(core.pure_density(core.HH), S0),
                               [1, 0, 0, 0], atol=1e-15)
    p = 0.6
    np.testing.assert_allclose(measurement.born_probabilities(models.werner_state(ModelPoint(p, 0.5)), S0),
                               [p / 2 + (1 - p) / 4, (1 - p) / 4, (1 - p) / 4, p / 2 + (1 - p) / 4])


def test_born_probabilities_sum_to_one(rng):
    from conftest import random_density
    for _ in range(20):
        probs = measurement.born_probabilities(random_density(rng), MeasurementSetting(*rng.normal(size=2)))
        assert probs.sum() == pytest.approx(1, abs=1e-12)


def test_sample_window_examples(rng):
    assert measurement.sample_window([0.25] * 4, 0, rng).counts == (0, 0, 0, 0)
    k = measurement.sample_window([1, 0, 0, 0], 5000, rng)
    assert k.counts[1:] == (0, 0, 0)
    assert abs(k.counts[0] - 5000) < 6 * np.sqrt(5000)


def test_sample_counts_law_of_large_numbers(rng):
    probs = np.array([0.4, 0.1, 0.2, 0.3])
    k = measurement.sample_counts(probs, 1000, size=100_000, rng=rng)
    se = np.sqrt(1000 * probs / 100_000)
    assert np.all(np.abs(k.mean(axis=0) - 1000 * probs) < 3 * se)


def test_sample_counts_poisson_goodness_of_fit(rng):
    probs = np.array([0.4, 0.1, 0.2, 0.3])
    mean = 50.0
    k = measurement.sample_counts(probs, mean, size=100_000, rng=rng)
    for x in range(4):
        lam = mean * probs[x]
        lo, hi = int(stats.poisson.ppf(1e-3, lam)), int(stats.poisson.isf(1e-3, lam))
        vals = np.arange(lo + 1, hi)
        observed = [np.sum(k[:, x] <= lo)] + [np.sum(k[:, x] == v) for v in vals] + [np.sum(k[:, x] >= hi)]
        expected = np.concatenate([[stats.poisson.cdf(lo, lam)], stats.poisson.pmf(vals, lam),
                                   [stats.poisson.sf(hi - 1, lam)]]) * k.shape[0]
        _, pval = stats.chisquare(observed, expected)
        assert pval > 1e-3


def test_channels_are_uncorrelated(rng):
    k = measurement.sample_counts([0.25] * 4, 2000, size=20_000, rng=rng)
    c = np.corrcoef(k.T)
    assert np.max(np.abs(c - np.eye(4))) < 0.04


def test_coincidence_vector_validation():
    with pytest.raises(ValidationError):
        measurement.CoincidenceVector((1, 2, 3), S0)
    with pytest.raises(ValidationError):
        measurement.CoincidenceVector((1, 2, 3, -1), S0)


def test_source_config_validation():
    with pytest.raises(ValidationError):
        SourceConfig("werner", ModelPoint(1, 0.5), mean_total_rate=0)
    with pytest.raises(ValidationError):
        SourceConfig("werner", ModelPoint(1, 0.5), fano=0.5)


def test_run_acquisition_determinism_and_totals():
    cfg = SourceConfig("decoherence", ModelPoint(0.9, 0.5), seed=7)
    a = measurement.run_acquisition(cfg, measurement.OPTIMAL)
    b = measurement.run_acquisition(cfg, measurement.OPTIMAL)
    assert a == b and len(a) == 40
    total = sum(w.total for w in a)
    expected = 40 * cfg.mean_total
    assert abs(total - expected) < 4 * np.sqrt(expected)


def test_run_acquisition_single_window_matches_sample_window():
    cfg = SourceConfig("decoherence", ModelPoint(0.9, 0.5), windows=1, seed=3)
    a = measurement.run_acquisition(cfg, S0)[0]
    probs = measurement.born_probabilities(cfg.state(), S0)
    b = measurement.sample_window(probs, cfg.mean_total, np.random.default_rng(3), setting=S0)
    assert a == b


def test_phase_scan_examples():
    out = dict(measurement.phase_scan([0.0, np.pi / 2, np.pi]))
    assert out[0.0] == pytest.approx(0.5, abs=1e-12)
    assert out[np.pi / 2] == pytest.approx(0.25, abs=1e-12)
    assert out[np.pi] == pytest.approx(0.0, abs=1e-12)


def test_fano_factor_examples(rng):
    assert measurement.fano_factor([5, 5, 5, 5]) == 0
    x = rng.poisson(1000, 10_000)
    assert measurement.fano_factor(x) == pytest.approx(1, abs=0.05)
    assert measurement.fano_factor(2 * x) == pytest.approx(2, abs=0.1)
    with pytest.raises(ValidationError):
        measurement.fano_factor([3])


@pytest.mark.parametrize("mode", ["common", "independent"])
def test_fano_inflation_of_window_totals(rng, mode):
    k = measurement.sample_counts([0.25] * 4, 5000, size=10_000, rng=rng, fano=2.0, fano_mode=mode)
    assert measurement.fano_factor(k.sum(axis=1)) == pytest.approx(2, abs=0.1)
    assert k.sum(axis=1).mean() == pytest.approx(5000, rel=0.01)
