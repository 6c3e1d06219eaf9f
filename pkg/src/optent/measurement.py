"""
Coincidence-count simulator standing in for the optical bench.

Each qubit passes a linear polarizer at angle ``theta``, projecting onto
``|theta> = cos(theta)|H> + sin(theta)|V>``. Outcome ``x = s + 2 s'`` of a
setting ``(alpha, beta)`` is the product projector onto
``|alpha + s pi/2> (x) |beta + s' pi/2>``. Counts in each of the four
channels are independent Poisson variables.
"""
from dataclasses import dataclass

import numpy as np

from . import core, models
from .errors import ValidationError
from .models import ModelKind, ModelPoint, PhasePoint

DEFAULT_WINDOW_SECONDS = 10.0
DEFAULT_WINDOWS = 40
DEFAULT_RATE = 500.0  # counts/s; gives <K> = 5000 per 10 s window


@dataclass(frozen=True)
class MeasurementSetting:
    """Polarizer angles (radians) on qubit A and qubit B."""
    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValidationError("measurement angles must be finite")

    def canonical(self):
        """Same projectors with both angles reduced to [0, pi)."""
        return MeasurementSetting(float(np.mod(self.alpha, np.pi)), float(np.mod(self.beta, np.pi)))


OPTIMAL = MeasurementSetting(-np.pi / 4, -np.pi / 4)
ZERO = MeasurementSetting(0.0, 0.0)


@dataclass(frozen=True)
class CoincidenceVector:
    """Counts ``(k0, k1, k2, k3)`` recorded in one acquisition window."""
    counts: tuple
    setting: MeasurementSetting
    window_seconds: float = DEFAULT_WINDOW_SECONDS

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 4 or min(counts) < 0:
            raise ValidationError(f"expected four nonnegative counts, got {self.counts!r}")
        if not self.window_seconds > 0:
            raise ValidationError("window_seconds must be positive")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return sum(self.counts)

    def as_array(self):
        return np.array(self.counts, dtype=float)


@dataclass(frozen=True)
class SourceConfig:
    """A simulated source: model state, count rate and acquisition plan."""
    kind: ModelKind
    point: ModelPoint
    mean_total_rate: float = DEFAULT_RATE
    windows: int = DEFAULT_WINDOWS
    window_seconds: float = DEFAULT_WINDOW_SECONDS
    seed: int = 0
    fano: float = 1.0
    fano_mode: str = "common"

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if not self.mean_total_rate > 0:
            raise ValidationError("mean_total_rate must be positive")
        if int(self.windows) != self.windows or self.windows < 1:
            raise ValidationError("windows must be a positive integer")
        if not self.window_seconds > 0:
            raise ValidationError("window_seconds must be positive")
        if self.fano < 1.0:
            raise ValidationError("fano must be >= 1 (only super-Poissonian inflation is modelled)")
        if self.fano_mode not in ("common", "independent"):
            raise ValidationError("fano_mode must be 'common' or 'independent'")

    @property
    def mean_total(self):
        return self.mean_total_rate * self.window_seconds

    def state(self):
        return models.model_state(self.kind, self.point)


def _polarizer(theta):
    return np.array([np.cos(theta), np.sin(theta)], dtype=complex)


def projector_ket(x, setting):
    if x not in (0, 1, 2, 3):
        raise ValidationError(f"outcome index must be 0..3, got {x!r}")
    s, s2 = x % 2, x // 2
    return np.kron(_polarizer(setting.alpha + s * np.pi / 2),
                   _polarizer(setting.beta + s2 * np.pi / 2))


def projector(x, setting):
    """Rank-1 projector for outcome ``x`` of ``setting``."""
    return core.projector(projector_ket(x, setting))


def born_probabilities(rho, setting):
    """``Tr[rho Pi_x]`` for the four outcomes of a setting."""
    rho = np.asarray(rho, dtype=complex)
    kets = [projector_ket(x, setting) for x in range(4)]
    probs = np.array([np.real(np.vdot(k, rho @ k)) for k in kets])
    return np.clip(probs, 0.0, None)


def _inflate(counts, mean_total, fano, mode, rng):
    """Turn Poisson counts into super-Poissonian ones by multiply-and-round.

    ``common`` scales all channels of a window by one random factor with
    mean 1 (a fluctuating source intensity); the window total then has
    Fano factor ``fano``. ``independent`` rescales each channel from
    Poisson(mean/fano) by ``fano``, so each channel has Fano factor ``fano``.
    """
    if fano == 1.0:
        return counts
    if mode == "common":
        var = (fano - 1.0) / (1.0 + mean_total)
        scale = rng.gamma(1.0 / var, var, size=counts.shape[:-1] + (1,))
        return np.rint(counts * scale).astype(np.int64)
    return np.rint(counts * fano).astype(np.int64)


def sample_counts(probs, mean_total, size=None, rng=None, fano=1.0, fano_mode="common"):
    """Poisson counts with means ``mean_total * probs``; shape ``size + (4,)``."""
    rng = np.random.default_rng(rng)
    probs = np.asarray(probs, dtype=float)
    if mean_total < 0:
        raise ValidationError("mean_total must be nonnegative")
    shape = (() if size is None else tuple(np.atleast_1d(size))) + probs.shape
    if fano != 1.0 and fano_mode == "independent":
        base = rng.poisson(mean_total * probs / fano, size=shape)
    else:
        base = rng.poisson(mean_total * probs, size=shape)
    return _inflate(base, mean_total, fano, fano_mode, rng)


def sample_window(probs, mean_total, rng=None, setting=ZERO, window_seconds=DEFAULT_WINDOW_SECONDS):
    """One window of four independent Poisson counts."""
    k = sample_counts(probs, mean_total, rng=rng)
    return CoincidenceVector(tuple(k.tolist()), setting, window_seconds)


def acquisition_counts(cfg, setting, rng=None, size=None):
    """Raw count array of shape ``size + (windows, 4)`` for a source config."""
    rng = np.random.default_rng(cfg.seed if rng is None else rng)
    probs = born_probabilities(cfg.state(), setting)
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (cfg.windows,)
    return sample_counts(probs, cfg.mean_total, size=shape, rng=rng,
                         fano=cfg.fano, fano_mode=cfg.fano_mode)


def run_acquisition(cfg, setting, rng=None):
    """``cfg.windows`` independent windows at one setting.

    Determined by ``cfg.seed`` unless an explicit generator is passed.
    """
    counts = acquisition_counts(cfg, setting, rng)
    return [CoincidenceVector(tuple(row.tolist()), setting, cfg.window_seconds) for row in counts]


def phase_scan(Phi_grid):
    """Coincidence probability ``p0(Phi)`` of ``Pi_0(pi/4, pi/4)`` on the
    balanced source state with relative phase ``Phi``; equals ``(1 + cos Phi)/4``."""
    setting = MeasurementSetting(np.pi / 4, np.pi / 4)
    ket0 = projector_ket(0, setting)
    out = []
    for Phi in np.asarray(Phi_grid, dtype=float):
        psi = models.pure_state(PhasePoint(np.pi / 4, float(np.mod(Phi, 2 * np.pi))))
        out.append((float(Phi), float(abs(np.vdot(ket0, psi)) ** 2)))
    return out


def fano_factor(samples):
    """Unbiased sample variance over sample mean."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValidationError("Fano factor needs at least two samples")
    mu = x.mean()
    if mu == 0:
        raise ValidationError("Fano factor is undefined for zero mean")
    return float(x.var(ddof=1) / mu)
