import json

import numpy as np
import pytest

from optent import core, models, tomography
from optent.errors import ValidationError
from optent.models import ModelKind, ModelPoint

from conftest import random_density


def random_model_state(rng):
    kind = list(ModelKind)[rng.integers(2)]
    return models.model_state(kind, ModelPoint(rng.uniform(), rng.uniform()))


def test_j16_order_and_states():
    j = tomography.j16_protocol()
    ps = j.projectors
    np.testing.assert_allclose(ps[0], core.pure_density(core.HH))
    np.testing.assert_allclose(ps[9], core.pure_density(core.tensor(core.D, core.D)), atol=1e-15)
    assert j.labels[:4] == ("HH", "HV", "VV", "VH") and j.labels[-1] == "RL"
    np.testing.assert_allclose(core.R, np.array([1, -1j]) / np.sqrt(2))
    np.testing.assert_allclose(core.L, np.array([1, 1j]) / np.sqrt(2))


@pytest.mark.parametrize("make", [tomography.j16_protocol, tomography.r16_protocol])
def test_gram_rank(make):
    assert make().gram_rank() == 16


def test_r16_tetrahedron_geometry():
    kets = [tomography.bloch_ket(n) for n in tomography.TETRAHEDRON]
    vecs = [tomography.bloch_vector(k) for k in kets]
    for i in range(4):
        np.testing.assert_allclose(vecs[i], tomography.TETRAHEDRON[i], atol=1e-14)
        for j in range(i + 1, 4):
            assert np.dot(vecs[i], vecs[j]) == pytest.approx(-1 / 3, abs=1e-14)
    np.testing.assert_allclose(sum(np.outer(k, k.conj()) for k in kets), 2 * np.eye(2), atol=1e-14)


def test_protocol_json_round_trip():
    for name in ("J16", "R16"):
        proto = tomography.protocol(name)
        doc = json.loads(proto.to_json())
        assert all(len(s["qubit_a"]) == 4 and len(s["qubit_b"]) == 4 for s in doc["settings"])
        back = tomography.TomoProtocol.from_dict(doc)
        assert back.labels == proto.labels
        np.testing.assert_allclose(back.projectors, proto.projectors, atol=1e-15)
    with pytest.raises(ValidationError):
        tomography.protocol("X9")


def test_tomo_data_validation():
    with pytest.raises(ValidationError):
        tomography.TomoData((1,) * 15, tomography.j16_protocol())


def test_simulated_counts():
    j = tomography.j16_protocol()
    bell = core.pure_density(core.PHI_PLUS)
    e = tomography.expected_probabilities(bell, j)
    assert e[0] == pytest.approx(e[2]) and e[1] == pytest.approx(0) and e[3] == pytest.approx(0)
    a = tomography.simulate_tomo_counts(bell, j, 1e4, rng=5)
    b = tomography.simulate_tomo_counts(bell, j, 1e4, rng=5)
    assert a.counts == b.counts
    big = tomography.simulate_tomo_counts(bell, j, 1e9, rng=1)
    np.testing.assert_allclose(np.array(big.counts) / 1e9, e / e.sum(), atol=6e-5)
    with pytest.raises(ValidationError):
        tomography.simulate_tomo_counts(bell, j, 0)


@pytest.mark.parametrize("name", ["J16", "R16"])
def test_exact_round_trip(name, rng):
    proto = tomography.protocol(name)
    for _ in range(100):
        rho = random_model_state(rng) if rng.uniform() < 0.5 else random_density(rng)
        data = tomography.TomoData(tuple(7.0 * tomography.expected_probabilities(rho, proto)), proto)
        assert np.linalg.norm(tomography.reconstruct_linear(data) - rho) <= 1e-10


def test_bell_reconstruction_corners():
    proto = tomography.j16_protocol()
    bell = core.pure_density(core.PHI_PLUS)
    data = tomography.TomoData(tuple(tomography.expected_probabilities(bell, proto)), proto)
    rho = tomography.reconstruct_linear(data)
    for i, j in [(0, 0), (0, 3), (3, 0), (3, 3)]:
        assert rho[i, j] == pytest.approx(0.5, abs=1e-12)
    mask = np.ones((4, 4), bool)
    mask[[0, 0, 3, 3], [0, 3, 0, 3]] = False
    assert np.max(np.abs(rho[mask])) <= 1e-12


def test_project_physical_examples():
    np.testing.assert_allclose(tomography.project_physical(np.diag([1.1, 0, 0, -0.1])),
                               np.diag([1, 0, 0, 0]), atol=1e-15)
    np.testing.assert_allclose(np.diag(tomography.project_physical(np.diag([0.6, 0.5, 0, -0.1]))).real,
                               [0.55, 0.45, 0, 0], atol=1e-15)
    rho = models.werner_state(ModelPoint(0.7, 0.3))
    np.testing.assert_allclose(tomography.project_physical(rho), rho, atol=1e-12)


def test_project_physical_is_closest_on_random_eigenvalues(rng):
    """Compare against brute force over a fine simplex grid in the eigenbasis."""
    grid = np.array([(a, b, c, 1 - a - b - c) for a in np.linspace(0, 1, 41) for b in np.linspace(0, 1, 41)
                     for c in np.linspace(0, 1, 41) if a + b + c <= 1 + 1e-12])
    for _ in range(5):
        w = rng.normal(0.25, 0.3, 4)
        w += (1 - w.sum()) / 4
        out = tomography.project_physical(np.diag(w))
        best = grid[np.argmin(np.sum((grid - w) ** 2, axis=1))]
        assert np.sum((np.diag(out).real - w) ** 2) <= np.sum((best - w) ** 2) + 1e-12


def test_project_physical_idempotent_and_contracting(rng):
    proto = tomography.j16_protocol()
    closer = 0
    for _ in range(100):
        rho = random_model_state(rng)
        raw = tomography.reconstruct_linear(tomography.simulate_tomo_counts(rho, proto, 2000, rng))
        phys = tomography.project_physical(raw)
        np.testing.assert_allclose(tomography.project_physical(phys), phys, atol=1e-12)
        closer += np.linalg.norm(phys - rho) <= np.linalg.norm(raw - rho) + 1e-12
    assert closer >= 95


def test_project_physical_rejects_bad_trace():
    with pytest.raises(ValidationError):
        tomography.project_physical(np.eye(4))


def test_tomo_negativity_bell_and_werner(rng):
    proto = tomography.r16_protocol()
    bell = core.pure_density(core.PHI_PLUS)
    exact = tomography.TomoData(tuple(1e12 * tomography.expected_probabilities(bell, proto)), proto)
    res = tomography.tomo_negativity(exact, 50, rng, reference=bell)
    assert res.negativity == pytest.approx(1, abs=1e-9)
    assert res.negativity_sigma < 1e-4
    assert res.fidelity_vs_reference == pytest.approx(1, abs=1e-9)
    p = 0.8
    w = models.werner_state(ModelPoint(p, 0.5))
    data = tomography.TomoData(tuple(tomography.expected_probabilities(w, proto)), proto)
    assert tomography.tomo_negativity(data, 0).negativity == pytest.approx((3 * p - 1) / 2, abs=1e-10)


def test_tomo_negativity_sigma_matches_repeat_spread(rng):
    proto = tomography.j16_protocol()
    rho = models.decoherence_state(ModelPoint(0.97, 0.5))
    res = tomography.tomo_negativity(tomography.simulate_tomo_counts(rho, proto, 2e5, rng), 200, rng)
    repeats = [tomography.tomo_negativity(tomography.simulate_tomo_counts(rho, proto, 2e5, rng), 0).negativity
               for _ in range(200)]
    assert res.negativity_sigma == pytest.approx(np.std(repeats, ddof=1), rel=0.35)
    assert core.negativity(res.rho_physical) == pytest.approx(res.negativity)


def test_negativity_batch_matches_core(rng):
    rhos = np.array([random_density(rng) for _ in range(10)])
    np.testing.assert_allclose(tomography._negativity_batch(rhos), [core.negativity(r) for r in rhos], atol=1e-12)


def test_r16_vs_j16_fidelity_reported(capsys):
    """Average fidelity of both protocols at equal budget; reported, not asserted."""
    rng = np.random.default_rng(16)
    fid = {"J16": [], "R16": []}
    for _ in range(500):
        rho = random_model_state(rng)
        for name in fid:
            proto = tomography.protocol(name)
            data = tomography.simulate_tomo_counts(rho, proto, 5e4, rng)
            fid[name].append(core.fidelity(tomography.project_physical(tomography.reconstruct_linear(data)), rho))
    j, r = np.mean(fid["J16"]), np.mean(fid["R16"])
    with capsys.disabled():
        print(f"\nmean fidelity over 500 states at 5e4 counts: J16 {j:.5f}, R16 {r:.5f} "
              f"(R16 higher: {r >= j})")
    assert 0 < j <= 1 and 0 < r <= 1
