"""
Two-qubit state tomography from 16 product projectors.

Two projector sets are provided: ``J16`` (H, V, D, R, L combinations) and
``R16`` (products of four single-qubit states forming a regular
tetrahedron on the Bloch sphere). Reconstruction is linear inversion in
the Pauli product basis followed by projection onto the closest density
matrix; the negativity uncertainty comes from a parametric bootstrap.

Single-qubit conventions: H = (1, 0), V = (0, 1), D = (H + V)/sqrt2,
R = (H - iV)/sqrt2, L = (H + iV)/sqrt2.
"""
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .errors import ValidationError

PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

_SINGLE = {"H": core.H, "V": core.V, "D": core.D, "R": core.R, "L": core.L}

J16_LABELS = ("HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
              "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL")

TETRAHEDRON = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)


def bloch_ket(n):
    """Single-qubit ket with Bloch vector ``n`` (z axis = H/V)."""
    n = np.asarray(n, dtype=float)
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bloch_vector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.array([np.vdot(psi, s @ psi).real for s in PAULI[1:]])


@dataclass(frozen=True)
class TomoProtocol:
    """Ordered list of 16 labelled product states ``|a> (x) |b>``."""
    name: str
    labels: tuple
    states: tuple  # pairs (ket_a, ket_b)

    def __post_init__(self):
        if len(self.labels) != 16 or len(self.states) != 16:
            raise ValidationError("a tomography protocol needs exactly 16 settings")

    @property
    def projectors(self):
        return np.array([core.projector(np.kron(a, b)) for a, b in self.states])

    def design_matrix(self):
        """``A[i, 4 mu + nu] = <a_i|s_mu|a_i> <b_i|s_nu|b_i>`` (Pauli products, s_0 = I)."""
        rows = []
        for a, b in self.states:
            sa = np.array([np.vdot(a, s @ a).real for s in PAULI])
            sb = np.array([np.vdot(b, s @ b).real for s in PAULI])
            rows.append(np.outer(sa, sb).ravel())
        return np.array(rows)

    def gram_rank(self):
        ops = self.projectors.reshape(16, 16)
        return int(np.linalg.matrix_rank(ops @ ops.conj().T))

    def to_dict(self):
        def reals(v):
            return [float(x) for c in v for x in (c.real, c.imag)]
        return {"name": self.name,
                "settings": [{"label": lab, "qubit_a": reals(a), "qubit_b": reals(b)}
                             for lab, (a, b) in zip(self.labels, self.states)]}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d):
        def cplx(xs):
            return np.array([complex(xs[0], xs[1]), complex(xs[2], xs[3])])
        settings = d["settings"]
        return cls(d["name"], tuple(s["label"] for s in settings),
                   tuple((cplx(s["qubit_a"]), cplx(s["qubit_b"])) for s in settings))


def j16_protocol():
    states = tuple((_SINGLE[lab[0]], _SINGLE[lab[1]]) for lab in J16_LABELS)
    return TomoProtocol("J16", J16_LABELS, states)


def r16_protocol():
    kets = [bloch_ket(n) for n in TETRAHEDRON]
    labels, states = [], []
    for i, a in enumerate(kets):
        for j, b in enumerate(kets):
            labels.append(f"T{i + 1}T{j + 1}")
            states.append((a, b))
    return TomoProtocol("R16", tuple(labels), tuple(states))


def protocol(name):
    try:
        return {"J16": j16_protocol, "R16": r16_protocol}[name.upper()]()
    except KeyError:
        raise ValidationError(f"unknown protocol {name!r}") from None


@dataclass(frozen=True)
class TomoData:
    counts: tuple
    protocol: TomoProtocol
    exposure: float = 1.0

    def __post_init__(self):
        counts = tuple(float(c) for c in self.counts)
        if len(counts) != 16 or min(counts) < 0:
            raise ValidationError("tomography data needs 16 nonnegative counts")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class ReconstructionResult:
    rho_raw: np.ndarray
    rho_physical: np.ndarray
    negativity: float
    negativity_sigma: float
    fidelity_vs_reference: Optional[float] = None


def expected_probabilities(rho, proto):
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.real(np.vdot(np.kron(a, b), rho @ np.kron(a, b))) for a, b in proto.states])


def simulate_tomo_counts(rho, proto, budget, rng=None):
    """Poisson counts for equal exposure of all 16 settings.

    The source intensity is chosen so that the expected total over the
    16 settings equals ``budget``.
    """
    if not budget > 0:
        raise ValidationError("budget must be positive")
    rng = np.random.default_rng(rng)
    probs = expected_probabilities(rho, proto)
    means = budget * probs / probs.sum()
    return TomoData(tuple(rng.poisson(means).tolist()), proto)


def _pauli_products():
    return np.array([np.kron(PAULI[m], PAULI[n]) for m in range(4) for n in range(4)])


_PP = _pauli_products()


def _linear_solve(counts, proto):
    """Unnormalized operators ``X`` with ``Tr[X Pi_i] = counts_i``; counts shape (..., 16)."""
    a = proto.design_matrix()
    if np.linalg.matrix_rank(a) < 16:
        raise ValidationError(f"protocol {proto.name} is not informationally complete")
    x = np.linalg.solve(a, np.moveaxis(np.asarray(counts, dtype=float), -1, 0).reshape(16, -1))
    ops = np.einsum("kb,kij->bij", x, _PP) / 4.0
    return ops.reshape(np.shape(counts)[:-1] + (4, 4))


def reconstruct_linear(data):
    """Linear-inversion estimate, Hermitian with unit trace (possibly not PSD).

    The unknown source intensity drops out through the trace normalization.
    """
    x = _linear_solve(np.array(data.counts), data.protocol)
    tr = np.trace(x).real
    if tr <= 0:
        raise ValidationError("reconstructed operator has non-positive trace")
    return x / tr


def _simplex_projection(mu):
    """Euclidean projection of each row of ``mu`` (sorted descending) onto the unit simplex."""
    css = np.cumsum(mu, axis=-1) - 1.0
    k = np.arange(1, mu.shape[-1] + 1)
    cond = mu - css / k > 0
    kmax = mu.shape[-1] - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, (kmax - 1)[..., None], axis=-1) / kmax[..., None]
    return np.clip(mu - theta, 0.0, None)


def project_physical_batch(raw):
    raw = np.asarray(raw, dtype=complex)
    raw = 0.5 * (raw + np.conj(np.swapaxes(raw, -1, -2)))
    w, v = np.linalg.eigh(raw)
    w, v = w[..., ::-1], v[..., ::-1]
    lam = _simplex_projection(w)
    return np.einsum("...ik,...k,...jk->...ij", v, lam, v.conj())


def project_physical(raw):
    """Closest density matrix in Frobenius norm to a unit-trace Hermitian matrix.

    Eigenvalues are projected onto the probability simplex (negative ones
    clipped, the deficit shared equally by the rest); eigenvectors are kept.
    """
    raw = core.check_hermitian(raw)
    if abs(np.trace(raw).real - 1.0) > 1e-9:
        raise ValidationError("project_physical expects a unit-trace matrix")
    return core.density_matrix(project_physical_batch(raw))


def _negativity_batch(rhos):
    m = np.asarray(rhos).reshape(np.shape(rhos)[:-2] + (2, 2, 2, 2))
    pt = np.swapaxes(m, -4, -2).reshape(np.shape(rhos))
    return np.abs(np.linalg.eigvalsh(pt)).sum(axis=-1) - 1.0


def tomo_negativity(data, bootstrap_B=200, rng=None, reference=None):
    """Negativity of the reconstructed state with a parametric-bootstrap error.

    Each of ``bootstrap_B`` resamples redraws every count as Poisson around
    the observed value, is reconstructed and projected; ``negativity_sigma``
    is the standard deviation of the resampled negativities.
    """
    rng = np.random.default_rng(rng)
    raw = reconstruct_linear(data)
    rho = project_physical(raw)
    eps = core.negativity(rho)
    sigma = float("nan")
    if bootstrap_B >= 2:
        obs = np.array(data.counts)
        resamples = rng.poisson(obs, size=(bootstrap_B, 16)).astype(float)
        ops = _linear_solve(resamples, data.protocol)
        tr = np.trace(ops, axis1=-2, axis2=-1).real
        ok = tr > 0
        phys = project_physical_batch(ops[ok] / tr[ok, None, None])
        sigma = float(np.std(_negativity_batch(phys), ddof=1))
    fid = core.fidelity(rho, reference) if reference is not None else None
    return ReconstructionResult(raw, rho, eps, sigma, fid)
