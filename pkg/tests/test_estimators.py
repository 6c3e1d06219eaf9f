import numpy as np
import pytest

from optent import estimators, measurement, models
from optent.errors import ValidationError
from optent.measurement import CoincidenceVector, MeasurementSetting, OPTIMAL
from optent.models import ModelPoint

S0 = MeasurementSetting(0.0, 0.0)
S45 = MeasurementSetting(np.pi / 4, np.pi / 4)


def exact(kind, p, q, setting, total=1.0):
    return total * measurement.born_probabilities(models.model_state(kind, ModelPoint(p, q)), setting)


def test_visibility_examples():
    assert estimators.visibility((10, 0, 0, 10)) == 1
    assert estimators.visibility((0, 10, 10, 0)) == -1
    assert estimators.visibility(CoincidenceVector((5, 0, 0, 5), S45)) == 1
    with pytest.raises(ValidationError):
        estimators.visibility((0, 0, 0, 0))


def test_epsilon_hat_examples():
    assert estimators.epsilon_hat(CoincidenceVector((5000, 0, 0, 5000), OPTIMAL)) == 1
    for p, q in [(0.7, 0.3), (0.95, 0.1)]:
        assert estimators.epsilon_from_probabilities(exact("decoherence", p, q, S45), S45) == pytest.approx(
            2 * p * np.sqrt(q * (1 - q)), abs=1e-12)
    s = MeasurementSetting(np.pi / 8, np.pi / 8)
    assert estimators.epsilon_from_probabilities(exact("decoherence", 1, 0.5, s), s) == pytest.approx(1, abs=1e-12)


def test_epsilon_hat_unbiased_across_settings(rng):
    for _ in range(20):
        p, q = rng.uniform(0, 1), rng.uniform(0, 1)
        s = MeasurementSetting(*rng.uniform(0.2, 1.3, 2))
        assert estimators.epsilon_from_probabilities(exact("decoherence", p, q, s), s) == pytest.approx(
            models.model_negativity("decoherence", ModelPoint(p, q)), abs=1e-10)


def test_epsilon_hat_singular_setting():
    with pytest.raises(ValidationError):
        estimators.epsilon_hat(CoincidenceVector((1, 1, 1, 1), S0))


def test_epsilon_hat_not_clamped():
    assert estimators.epsilon_hat(np.array([1.0, 0, 0, 0])) == 1
    assert estimators.epsilon_hat(np.array([0, 1.0, 0, 0])) == -1
    assert estimators.clamp_unit(-0.2) == 0


def test_p_hat_decoherence_examples():
    assert estimators.p_hat_decoherence((5000, 0, 0, 5000), (5000, 0, 0, 5000)) == pytest.approx(1)
    assert estimators.p_hat_decoherence((5000, 0, 0, 5000), (2500, 2500, 2500, 2500)) == pytest.approx(0, abs=1e-15)
    p = 0.8
    r = exact("decoherence", p, 0.25, S0, 1e4)
    k = exact("decoherence", p, 0.25, OPTIMAL, 1e4)
    assert estimators.p_hat_decoherence(r, k) == pytest.approx(p, abs=1e-12)
    with pytest.raises(ValidationError):
        estimators.p_hat_decoherence((10, 0, 0, 0), (5, 0, 0, 5))


def test_werner_estimators_examples():
    assert estimators.werner_estimators((5, 0, 0, 5), (5, 0, 0, 5)) == (1, 1)
    k = exact("werner", 1 / 3, 0.5, OPTIMAL)
    r = exact("werner", 1 / 3, 0.5, S0)
    assert estimators.werner_estimators(k, r)[1] == pytest.approx(0, abs=1e-12)
    p_hat, eps_hat = estimators.werner_estimators((1, 1, 1, 1), (1, 1, 1, 1))
    assert (p_hat, eps_hat) == (0, -0.5)


def test_werner_estimators_reproduce_closed_form():
    for p in np.linspace(0.4, 1, 7):
        for q in (0.3, 0.5, 0.7):
            if p < 1 / (1 + 4 * np.sqrt(q * (1 - q))):
                continue
            p_hat, eps_hat = estimators.werner_estimators(exact("werner", p, q, OPTIMAL), exact("werner", p, q, S0))
            assert eps_hat == pytest.approx(models.model_negativity("werner", ModelPoint(p, q)), abs=1e-12)
            if q == 0.5:
                assert p_hat == pytest.approx(p, abs=1e-12)


def test_reference_epsilon_examples():
    assert estimators.reference_epsilon("decoherence", 1, np.pi / 4) == pytest.approx(1)
    assert estimators.reference_epsilon("decoherence", 0.97, np.radians(10)) == pytest.approx(
        0.97 * np.sin(np.radians(20)), abs=1e-12)
    assert estimators.reference_epsilon("decoherence", 0.97, np.radians(10)) == pytest.approx(0.3318, abs=1e-4)
    assert estimators.reference_epsilon("werner", 0.5, np.pi / 4) == pytest.approx(0.25)


def test_sample_stats_examples(rng):
    assert estimators.sample_stats([1, 1, 1]) == (1, 0)
    assert estimators.sample_stats([0, 2]) == (1, 2)
    eps, total = 0.6, 5000
    q = models.epsilon_to_q("decoherence", 1, eps)
    probs = measurement.born_probabilities(models.decoherence_state(ModelPoint(1, q)), OPTIMAL)
    k = measurement.sample_counts(probs, total, size=100_000, rng=rng)
    _, var = estimators.sample_stats(estimators.epsilon_hat(k))
    assert var * total == pytest.approx(1 - eps ** 2, rel=0.02)


def test_propagated_variance_examples():
    assert estimators.propagated_variance([2500, 0, 0, 2500], [2500, 0, 0, 2500]) == 0
    assert estimators.propagated_variance([2500] * 4, [2500] * 4) == pytest.approx(1e-4)
    assert estimators.propagated_variance([3, 1, 1, 3], [3, 1, 1, 3]) == pytest.approx(4 * 96 / 4096)


def test_propagated_variance_matches_finite_difference_gradient(rng):
    k = rng.uniform(10, 100, 4)
    d = rng.uniform(1, 50, 4)
    grad = np.empty(4)
    h = 1e-6
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        grad[i] = (estimators.visibility(k + e) - estimators.visibility(k - e)) / (2 * h)
    assert estimators.propagated_variance(k, d) == pytest.approx(np.sum(grad ** 2 * d), rel=1e-7)


def test_reports():
    rep = estimators.report([0.9, 1.1, 1.0, 1.0], [5000, 5000, 5000, 5000])
    assert rep.mean == pytest.approx(1.0) and rep.clamped_mean == 1.0
    assert rep.normalized_variance == pytest.approx(rep.sample_variance * 5000)
    wins = [CoincidenceVector((2500, 10, 10, 2480), OPTIMAL), CoincidenceVector((2400, 5, 7, 2600), OPTIMAL)]
    rep = estimators.epsilon_report(wins)
    assert rep.M == 2
    with pytest.raises(ValidationError):
        estimators.epsilon_report([wins[0], CoincidenceVector((1, 1, 1, 1), S45)])


def test_visibility_identity_pure_states_on_setting_grid():
    angles = np.linspace(-np.pi / 2, np.pi / 2, 13)
    for q in (0.1, 0.3, 0.5, 0.8):
        rho = models.decoherence_state(ModelPoint(1.0, q))
        for a in angles:
            for b in angles:
                if abs(np.sin(2 * a) * np.sin(2 * b)) < 1e-6:
                    continue
                s = MeasurementSetting(a, b)
                probs = measurement.born_probabilities(rho, s)
                assert estimators.epsilon_from_probabilities(probs, s) == pytest.approx(
                    2 * np.sqrt(q * (1 - q)), abs=1e-10)


def test_unbiasedness_monte_carlo():
    rng = np.random.default_rng(31)
    for p in (1.0, 0.8, 0.5):
        for q in (0.97, 0.93, 0.88, 0.78, 0.5):
            pt = ModelPoint(p, q)
            probs = measurement.born_probabilities(models.decoherence_state(pt), OPTIMAL)
            k = measurement.sample_counts(probs, 5000, size=(10_000, 40), rng=rng)
            means = estimators.epsilon_hat(k).mean(axis=1)
            se = means.std(ddof=1) / np.sqrt(means.size)
            assert abs(means.mean() - models.model_negativity("decoherence", pt)) <= 3 * se + 1e-15
