"""
Visibility-based entanglement estimators and their statistics.

Functions accept either :class:`CoincidenceVector` objects or raw count
arrays whose last axis holds ``(k0, k1, k2, k3)``; array inputs are
evaluated element-wise over the leading axes.

The estimators are unbiased and therefore not clamped to [0, 1]; use
:func:`clamp_unit` for display.
"""
from dataclasses import dataclass

import numpy as np

from . import models
from .errors import ValidationError
from .measurement import OPTIMAL, CoincidenceVector, MeasurementSetting
from .models import ModelKind, ModelPoint

SINGULAR_TOL = 1e-9


def _counts(k):
    if isinstance(k, CoincidenceVector):
        return k.as_array(), k.setting
    a = np.asarray(k, dtype=float)
    if a.shape[-1] != 4:
        raise ValidationError("count arrays need a trailing axis of length 4")
    return a, None


def _totals(a):
    tot = a.sum(axis=-1)
    if np.any(tot <= 0):
        raise ValidationError("empty window: total coincidence count is zero")
    return tot


def visibility(k):
    """Correlation ``V = (k0 - k1 - k2 + k3) / K``."""
    a, _ = _counts(k)
    v = (a[..., 0] - a[..., 1] - a[..., 2] + a[..., 3]) / _totals(a)
    return float(v) if np.ndim(v) == 0 else v


def epsilon_hat(k, setting=None):
    """Negativity estimate ``(V - cos2a cos2b) / (sin2a sin2b)``.

    The setting is taken from ``k`` when it is a CoincidenceVector,
    otherwise from ``setting`` (default: the optimal ``(-pi/4, -pi/4)``,
    where the estimate is just ``V``).
    """
    a, own = _counts(k)
    setting = own or setting or OPTIMAL
    s2a, s2b = np.sin(2 * setting.alpha), np.sin(2 * setting.beta)
    for name, val in (("sin(2 alpha)", s2a), ("sin(2 beta)", s2b)):
        if abs(val) < SINGULAR_TOL:
            raise ValidationError(f"setting is singular for this estimator: {name} = 0")
    return (visibility(a) - np.cos(2 * setting.alpha) * np.cos(2 * setting.beta)) / (s2a * s2b)


def epsilon_from_probabilities(probs, setting):
    """The same estimator evaluated on exact outcome probabilities."""
    return epsilon_hat(np.asarray(probs, dtype=float), setting)


def p_hat_decoherence(r, k):
    """Mixing-parameter estimate ``eps_hat(k) R / (2 sqrt(r0 r3))``.

    ``r`` is recorded at ``(0, 0)`` and ``k`` at ``(-pi/4, -pi/4)``.
    """
    ra, _ = _counts(r)
    r0, r3 = ra[..., 0], ra[..., 3]
    if np.any(r0 * r3 <= 0):
        raise ValidationError("degenerate populations: r0 * r3 = 0")
    out = 0.5 * epsilon_hat(k) * _totals(ra) / np.sqrt(r0 * r3)
    return float(out) if np.ndim(out) == 0 else out


def werner_estimators(k, r):
    """Werner-model estimates ``(p_hat, eps_hat)``.

    ``p_hat = V(0, 0)`` and ``eps_hat = -1/2 + V(0, 0)/2 + V(-pi/4, -pi/4)``
    with ``k`` at ``(-pi/4, -pi/4)`` and ``r`` at ``(0, 0)``.
    """
    v00 = visibility(r)
    v45 = visibility(k)
    return v00, -0.5 + 0.5 * v00 + v45


def reference_epsilon(kind, p_est, phi):
    """Reference negativity from an estimated mixing parameter and the pump angle.

    Decoherence: ``p sin(2 phi)``. Werner: the Werner negativity at
    ``q = cos^2 phi``.
    """
    kind = ModelKind.parse(kind)
    if p_est < 0:
        raise ValidationError("p_est must be nonnegative")
    if kind is ModelKind.DECOHERENCE:
        return float(p_est * np.sin(2 * phi))
    g = np.cos(phi) * np.sin(phi)
    return float(max(0.0, 0.5 * (p_est * (1.0 + 4.0 * g) - 1.0)))


def sample_stats(values):
    """Sample mean and unbiased (M - 1) variance."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise ValidationError("sample variance needs at least two values")
    return float(x.mean()), float(x.var(ddof=1))


def propagated_variance(mean_counts, count_variances):
    """Linear error propagation of ``eps_hat = (k0 - k1 - k2 + k3)/K``::

        4/<K>^4 [ (<k0>+<k3>)^2 (dk1^2 + dk2^2) + (<k1>+<k2>)^2 (dk0^2 + dk3^2) ]

    With Poisson variances ``dk_x^2 = <k_x>`` this equals ``(1 - eps^2)/<K>``.
    """
    k = np.asarray(mean_counts, dtype=float)
    d = np.asarray(count_variances, dtype=float)
    total = k.sum(axis=-1)
    if np.any(total <= 0):
        raise ValidationError("mean total count must be positive")
    a = k[..., 0] + k[..., 3]
    b = k[..., 1] + k[..., 2]
    out = 4.0 / total ** 4 * (a ** 2 * (d[..., 1] + d[..., 2]) + b ** 2 * (d[..., 0] + d[..., 3]))
    return float(out) if np.ndim(out) == 0 else out


def clamp_unit(x):
    return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class EstimationReport:
    """Summary of one acquisition run of ``M`` windows."""
    mean: float
    sample_variance: float
    M: int
    mean_total_counts: float
    cr_bound: float
    normalized_variance: float

    @property
    def clamped_mean(self):
        return float(clamp_unit(self.mean))

    @property
    def standard_error(self):
        return float(np.sqrt(self.sample_variance / self.M))


def report(values, totals):
    """Build an :class:`EstimationReport` from per-window estimates and totals.

    ``cr_bound`` is the single-window bound ``(1 - mean^2)/<K>``.
    """
    mean, var = sample_stats(values)
    mean_k = float(np.mean(totals))
    return EstimationReport(mean=mean, sample_variance=var, M=int(np.size(values)),
                            mean_total_counts=mean_k,
                            cr_bound=(1.0 - mean ** 2) / mean_k,
                            normalized_variance=var * mean_k)


def epsilon_report(windows):
    """Report for optimal-setting windows (CoincidenceVectors or an (M, 4) array)."""
    if len(windows) and isinstance(windows[0], CoincidenceVector):
        settings = {w.setting for w in windows}
        if len(settings) != 1:
            raise ValidationError("windows were recorded at different settings")
        setting = settings.pop()
        arr = np.array([w.counts for w in windows], dtype=float)
    else:
        setting, arr = OPTIMAL, np.asarray(windows, dtype=float)
    return report(epsilon_hat(arr, setting), arr.sum(axis=-1))
