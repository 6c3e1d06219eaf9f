"""
Parametric two-qubit state families.

Two noisy versions of the pure state ``sqrt(q)|HH> + sqrt(1-q)|VV>`` are
modelled: the decoherence (dephasing) model, which mixes in the
diagonal part ``q|HH><HH| + (1-q)|VV><VV|``, and the Werner model, which
mixes in white noise ``I/4``. Both are parametrized by ``(p, q)`` with
``p`` the weight of the pure component.
"""
import enum
from dataclasses import dataclass

import numpy as np

from . import core
from .errors import DomainError, ValidationError


class ModelKind(enum.Enum):
    DECOHERENCE = "decoherence"
    WERNER = "werner"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown model {value!r}; expected 'decoherence' or 'werner'") from None


@dataclass(frozen=True)
class ModelPoint:
    """Mixing parameter ``p`` and population ``q`` of a model state."""
    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class PhasePoint:
    """Pump angle ``phi`` and relative phase ``Phi`` (radians) of the source state."""
    phi: float
    Phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.phi <= np.pi / 2 + 1e-15):
            raise ValidationError(f"phi must lie in [0, pi/2], got {self.phi!r}")
        if not (0.0 <= self.Phi < 2 * np.pi):
            raise ValidationError(f"Phi must lie in [0, 2pi), got {self.Phi!r}")


def pure_state(point):
    """cos(phi)|HH> + sin(phi) e^{i Phi}|VV>."""
    amps = np.zeros(4, dtype=complex)
    amps[0] = np.cos(point.phi)
    amps[3] = np.sin(point.phi) * np.exp(1j * point.Phi)
    return core.ket(amps, normalize=True)


def q_to_phi(q):
    """Pump angle giving population ``q = cos^2(phi)``."""
    return float(np.arccos(np.sqrt(q)))


def _psi_q(q):
    amps = np.zeros(4, dtype=complex)
    amps[0] = np.sqrt(q)
    amps[3] = np.sqrt(1.0 - q)
    return amps


def decoherence_state(pt):
    psi = _psi_q(pt.q)
    dephased = np.diag([pt.q, 0.0, 0.0, 1.0 - pt.q]).astype(complex)
    return core.density_matrix(pt.p * np.outer(psi, psi.conj()) + (1.0 - pt.p) * dephased)


def werner_state(pt):
    psi = _psi_q(pt.q)
    return core.density_matrix(pt.p * np.outer(psi, psi.conj()) + (1.0 - pt.p) / 4.0 * np.eye(4))


def model_state(kind, pt):
    kind = ModelKind.parse(kind)
    if kind is ModelKind.DECOHERENCE:
        return decoherence_state(pt)
    return werner_state(pt)


def decoherence_eigensystem(pt):
    """Closed-form spectrum of the decoherence-model state.

    The support is the {|HH>, |VV>} block with eigenvalues
    ``(1 +- s)/2``, ``s = sqrt(1 - 4(1-p^2) q(1-q))``. With
    ``f_+- = 1 - 2q +- s`` and ``g = 2p sqrt(q(1-q))`` the eigenvector of
    ``(1 + s)/2`` is proportional to ``(-f_-, 0, 0, g)`` and that of
    ``(1 - s)/2`` to ``(-f_+, 0, 0, g)``. |HV> and |VH> span the kernel.
    """
    p, q = pt.p, pt.q
    s = np.sqrt(max(0.0, 1.0 - 4.0 * (1.0 - p * p) * q * (1.0 - q)))
    lam_plus = 0.5 * (1.0 + s)
    lam_minus = 0.5 * (1.0 - s)
    g = 2.0 * p * np.sqrt(q * (1.0 - q))
    f_plus = 1.0 - 2.0 * q + s
    f_minus = 1.0 - 2.0 * q - s

    def block_vector(f):
        v = np.array([-f, 0.0, 0.0, g], dtype=complex)
        n = np.linalg.norm(v)
        return v / n if n > 1e-14 else None

    v_plus = block_vector(f_minus)
    v_minus = block_vector(f_plus)
    if v_plus is None or v_minus is None:
        # g = 0: the state is diagonal, eigenvectors are |HH> and |VV>
        if q >= 0.5:
            v_plus, v_minus = core.HH.copy(), core.VV.copy()
        else:
            v_plus, v_minus = core.VV.copy(), core.HH.copy()

    evals = np.array([lam_plus, lam_minus, 0.0, 0.0])
    evecs = np.column_stack([core._canonical_phase(v_plus), core._canonical_phase(v_minus),
                             core.HV, core.VH])
    evals.flags.writeable = False
    evecs.flags.writeable = False
    return core.Spectrum(evals, evecs)


def model_negativity(kind, pt):
    """Closed-form negativity: ``2p sqrt(q(1-q))`` (decoherence) or
    ``max(0, (p(1 + 4 sqrt(q(1-q))) - 1)/2)`` (Werner)."""
    kind = ModelKind.parse(kind)
    g = np.sqrt(pt.q * (1.0 - pt.q))
    if kind is ModelKind.DECOHERENCE:
        return float(2.0 * pt.p * g)
    return float(max(0.0, 0.5 * (pt.p * (1.0 + 4.0 * g) - 1.0)))


def max_negativity(kind, p):
    kind = ModelKind.parse(kind)
    if kind is ModelKind.DECOHERENCE:
        return float(p)
    return float(max(0.0, 0.5 * (3.0 * p - 1.0)))


def epsilon_to_q(kind, p, epsilon, tol=1e-12):
    """Population ``q <= 1/2`` at which the model has negativity ``epsilon``.

    For the Werner model at ``epsilon = 0`` the inverse is not unique;
    the separability boundary is returned (or 0 if the model is
    separable for every ``q``).
    """
    kind = ModelKind.parse(kind)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    eps_max = max_negativity(kind, p)
    if epsilon < -tol or epsilon > eps_max + tol:
        raise DomainError(f"negativity {epsilon!r} unreachable for {kind.value} model at p={p!r} "
                          f"(maximum {eps_max!r})")
    epsilon = min(max(epsilon, 0.0), eps_max)
    if kind is ModelKind.DECOHERENCE:
        if p == 0.0:
            return 0.0
        g = epsilon / (2.0 * p)
    else:
        if p == 0.0:
            return 0.0
        g = max(0.0, ((2.0 * epsilon + 1.0) / p - 1.0) / 4.0)
    # q(1 - q) = g^2, smaller root
    disc = max(0.0, 1.0 - 4.0 * g * g)
    return float(0.5 * (1.0 - np.sqrt(disc)))
