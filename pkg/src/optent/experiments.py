"""
Seeded experiment drivers behind the command-line interface.

Every experiment takes an :class:`ExperimentConfig` and returns a list of
flat row dicts (one CSV line each) plus optional raw data. Randomness is
drawn from ``numpy.random.SeedSequence(cfg.seed)`` spawned once per
sweep point, so results depend only on (config, seed) and not on the
order in which points are evaluated.
"""
import csv
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import core, estimation, estimators, measurement, models, tomography
from .errors import ConfigError, DomainError, ValidationError
from .measurement import OPTIMAL, ZERO
from .models import ModelKind, ModelPoint

EXPERIMENTS = ("qfi-table", "saturation-sweep", "mixture-sweep", "tomo-compare",
               "phase-scan", "fano-check")

PHI_DEGREES = (10.0, 15.0, 20.0, 28.0, 45.0)
Q_GRID = (0.97, 0.93, 0.88, 0.78, 0.5)
DECOHERENCE_MIXTURES = (0.995, 0.83, 0.74, 0.50, 0.33)
WERNER_MIXTURES = (0.995, 0.76, 0.62, 0.52, 0.45)

OUTPUT_DIR_ENV = "OPTENT_OUTPUT_DIR"


@dataclass
class ExperimentConfig:
    experiment: str
    model: ModelKind = ModelKind.DECOHERENCE
    points: list = field(default_factory=list)
    M: int = measurement.DEFAULT_WINDOWS
    window_seconds: float = measurement.DEFAULT_WINDOW_SECONDS
    rate: float = measurement.DEFAULT_RATE
    seed: int = 0
    replications: int = 1
    output_path: str = ""
    bootstrap: int = 200
    fano_mode: str = "common"
    state: dict = field(default_factory=lambda: {"p": 0.98, "q": 0.5})

    @property
    def mean_total(self):
        return self.rate * self.window_seconds


_KEYS = {f.name for f in fields(ExperimentConfig)}


def _default_points(experiment, model):
    if experiment == "qfi-table":
        return [{"p": p, "q": q} for p in (0.1, 0.3, 0.5, 0.7, 0.9) for q in (0.1, 0.3, 0.5)]
    if experiment == "saturation-sweep":
        return list(PHI_DEGREES)
    if experiment == "mixture-sweep":
        return list(DECOHERENCE_MIXTURES if model is ModelKind.DECOHERENCE else WERNER_MIXTURES)
    if experiment == "tomo-compare":
        return [{"p": 0.972, "q": 0.5}]
    if experiment == "phase-scan":
        return list(np.linspace(0.0, 360.0, 37))
    return [1.0, 1.5, 2.0]


def load_config(source=None, experiment=None, seed=None):
    """Validate a JSON config (path, JSON text or dict) and fill defaults.

    Unknown keys are rejected. ``experiment`` and ``seed`` override the
    document when given (the experiment must not contradict it).
    """
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = dict(source)
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}", field=unknown[0])

    exp = raw.get("experiment", experiment)
    if experiment is not None and exp != experiment:
        raise ConfigError(f"config is for {exp!r}, not {experiment!r}", field="experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}", field="experiment")
    raw["experiment"] = exp
    try:
        raw["model"] = ModelKind.parse(raw.get("model", "decoherence"))
    except ValidationError as exc:
        raise ConfigError(str(exc), field="model") from None
    if seed is not None:
        raw["seed"] = seed

    cfg = ExperimentConfig(**raw)
    for name in ("M", "replications", "bootstrap", "seed"):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name} must be an integer", field=name)
    if cfg.M < 2:
        raise ConfigError("M must be >= 2 (sample variance)", field="M")
    if cfg.replications < 1:
        raise ConfigError("replications must be >= 1", field="replications")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative", field="seed")
    for name in ("rate", "window_seconds"):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"{name} must be a positive number", field=name)
    if cfg.fano_mode not in ("common", "independent"):
        raise ConfigError("fano_mode must be 'common' or 'independent'", field="fano_mode")
    if not isinstance(cfg.points, list):
        raise ConfigError("points must be a list", field="points")
    if not cfg.points:
        cfg.points = _default_points(exp, cfg.model)
    _check_points(cfg)
    return cfg


def _model_point(obj, name="points"):
    if not isinstance(obj, dict) or set(obj) != {"p", "q"}:
        raise ConfigError("model points must be objects with keys 'p' and 'q'", field=name)
    try:
        return ModelPoint(float(obj["p"]), float(obj["q"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=name) from None


def _check_points(cfg):
    exp = cfg.experiment
    for pt in cfg.points:
        if exp in ("qfi-table", "tomo-compare"):
            _model_point(pt)
        elif exp == "saturation-sweep":
            if isinstance(pt, dict):
                _model_point(pt)
            elif not isinstance(pt, (int, float)) or not 0 <= pt <= 90:
                raise ConfigError("saturation points are {p, q} objects or pump angles in [0, 90] degrees",
                                  field="points")
        elif exp == "mixture-sweep":
            if not isinstance(pt, (int, float)) or not 0 < pt <= 1:
                raise ConfigError("mixture points are mixing fractions in (0, 1]", field="points")
        elif exp == "phase-scan":
            if not isinstance(pt, (int, float)):
                raise ConfigError("phase-scan points are phases in degrees", field="points")
        elif exp == "fano-check":
            if not isinstance(pt, (int, float)) or pt < 1:
                raise ConfigError("fano-check points are inflation factors >= 1", field="points")
    if exp == "tomo-compare" and len(cfg.points) != 1:
        raise ConfigError("tomo-compare takes exactly one model point", field="points")
    if exp == "fano-check":
        _model_point(cfg.state, "state")


def _streams(cfg, n):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(n)]


# -- saturation -------------------------------------------------------------

@dataclass
class PointSimulation:
    """Per-window estimates of one sweep point, shape (replications, M)."""
    epsilon_true: float
    phi: float
    k: np.ndarray
    r: np.ndarray

    @property
    def K(self):
        return self.k.sum(axis=-1)

    def decoherence_estimates(self):
        eps = estimators.epsilon_hat(self.k, OPTIMAL)
        p_hat = estimators.p_hat_decoherence(self.r, self.k)
        return eps, p_hat

    def werner_estimates(self):
        p_hat, eps = estimators.werner_estimators(self.k, self.r)
        return eps, p_hat


def simulate_point(probs_k, probs_r, mean_total, M, replications, rng, epsilon_true, phi,
                   fano=1.0, fano_mode="common"):
    k = measurement.sample_counts(probs_k, mean_total, size=(replications, M), rng=rng,
                                  fano=fano, fano_mode=fano_mode)
    r = measurement.sample_counts(probs_r, mean_total, size=(replications, M), rng=rng,
                                  fano=fano, fano_mode=fano_mode)
    return PointSimulation(epsilon_true, phi, k, r)


def simulate_source(kind, pt, mean_total, M, replications, rng, fano=1.0, fano_mode="common"):
    rho = models.model_state(kind, pt)
    return simulate_point(measurement.born_probabilities(rho, OPTIMAL),
                          measurement.born_probabilities(rho, ZERO),
                          mean_total, M, replications, rng,
                          models.model_negativity(kind, pt), models.q_to_phi(pt.q),
                          fano=fano, fano_mode=fano_mode)


def variance_band(epsilon, M):
    """Half-width of the 3-sigma band of a single run's normalized sample
    variance around ``1 - eps^2`` (Gaussian approximation, M - 1 dof)."""
    return 3.0 * (1.0 - epsilon ** 2) * np.sqrt(2.0 / (M - 1))


def summarize(sim, method, source_model, point_label):
    """Aggregate one simulated point under an analysis model into a result row."""
    if method == "decoherence":
        eps, p_hat = sim.decoherence_estimates()
        kind = ModelKind.DECOHERENCE
    else:
        eps, p_hat = sim.werner_estimates()
        kind = ModelKind.WERNER
    K = sim.K
    var = eps.var(axis=-1, ddof=1)
    mean_k = K.mean(axis=-1)
    norm_var = var * mean_k
    p_mean = float(np.mean(p_hat))
    eps_t = estimators.reference_epsilon(kind, p_mean, sim.phi)
    bound = 1.0 - sim.epsilon_true ** 2
    half = variance_band(sim.epsilon_true, eps.shape[-1])
    in_band = np.abs(norm_var - bound) <= half + 1e-15
    n = eps.size
    return {
        "model": source_model.value,
        "method": method,
        "point": point_label,
        "epsilon_true": sim.epsilon_true,
        "epsilon_hat_mean": float(eps.mean()),
        "epsilon_hat_sem": float(eps.std(ddof=1) / np.sqrt(n)),
        "epsilon_t": eps_t,
        "var_sample": float(var.mean()),
        "var_normalized": float(norm_var.mean()),
        "qfi_bound": bound,
        "in_band_fraction": float(in_band.mean()),
        "p_hat_mean": p_mean,
        "mean_K": float(mean_k.mean()),
        "replications": int(eps.shape[0]),
    }


def _saturation_point(p):
    if isinstance(p, dict):
        return ModelPoint(float(p["p"]), float(p["q"]))
    phi = np.radians(float(p))
    return ModelPoint(1.0, float(np.cos(phi) ** 2))


def run_saturation_sweep(cfg, keep_raw=False):
    """Optimal-estimator runs at each point, analysed under both models."""
    rows, raw = [], []
    for pt_spec, rng in zip(cfg.points, _streams(cfg, len(cfg.points))):
        pt = _saturation_point(pt_spec)
        sim = simulate_source(cfg.model, pt, cfg.mean_total, cfg.M, cfg.replications, rng)
        label = f"p={pt.p:g};q={pt.q:.6g}"
        for method in ("decoherence", "werner"):
            rows.append(summarize(sim, method, cfg.model, label))
        if keep_raw:
            raw.append({"point": label, "k": sim.k.tolist(), "r": sim.r.tolist()})
    return rows, raw


# -- mixtures ---------------------------------------------------------------

def _admixture(kind):
    if kind is ModelKind.DECOHERENCE:
        return np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
    return np.eye(4, dtype=complex) / 4.0


def simulate_mixture(kind, p, mean_total, M, replications, rng):
    """Bell-state counts plus separately sampled admixture counts.

    The pure component contributes ``p * mean_total`` expected counts per
    window and the unentangled admixture ``(1 - p) * mean_total``.
    """
    kind = ModelKind.parse(kind)
    if not 0 < p <= 1:
        raise DomainError("mixture fraction must lie in (0, 1]")
    bell = core.pure_density(core.PHI_PLUS)
    noise = _admixture(kind)
    shape = (replications, M)
    k = measurement.sample_counts(measurement.born_probabilities(bell, OPTIMAL), p * mean_total,
                                  size=shape, rng=rng)
    r = measurement.sample_counts(measurement.born_probabilities(bell, ZERO), p * mean_total,
                                  size=shape, rng=rng)
    if p < 1:
        k = k + measurement.sample_counts(measurement.born_probabilities(noise, OPTIMAL),
                                          (1 - p) * mean_total, size=shape, rng=rng)
        r = r + measurement.sample_counts(measurement.born_probabilities(noise, ZERO),
                                          (1 - p) * mean_total, size=shape, rng=rng)
    eps_true = models.model_negativity(kind, ModelPoint(p, 0.5))
    return PointSimulation(eps_true, np.pi / 4, k, r)


def run_mixture_sweep(cfg, keep_raw=False):
    rows, raw = [], []
    method = cfg.model.value
    for p, rng in zip(cfg.points, _streams(cfg, len(cfg.points))):
        sim = simulate_mixture(cfg.model, float(p), cfg.mean_total, cfg.M, cfg.replications, rng)
        label = f"p={float(p):g};q=0.5"
        rows.append(summarize(sim, method, cfg.model, label))
        if keep_raw:
            raw.append({"point": label, "k": sim.k.tolist(), "r": sim.r.tolist()})
    return rows, raw


# -- tomography comparison --------------------------------------------------

def run_tomo_compare(cfg, keep_raw=False):
    """Optimal estimator vs J16 and R16 tomography at equal total counts.

    ``delta_epsilon`` is the standard error of each method's final
    estimate from ``M * <K>`` coincidences; for the optimal method it is
    propagated from the summed counts, for tomography it is the bootstrap
    spread. ``delta_epsilon_window`` is the single-window propagated error
    of the optimal method.
    """
    pt = _model_point(cfg.points[0])
    rho = models.model_state(cfg.model, pt)
    rng_opt, rng_j, rng_r = _streams(cfg, 3)
    k = measurement.sample_counts(measurement.born_probabilities(rho, OPTIMAL), cfg.mean_total,
                                  size=cfg.M, rng=rng_opt)
    eps = estimators.epsilon_hat(k, OPTIMAL)
    total = k.sum(axis=0)
    mean_counts = k.mean(axis=0)
    budget = float(k.sum())
    rows = [{
        "method": "optimal",
        "epsilon": float(eps.mean()),
        "delta_epsilon": float(np.sqrt(estimators.propagated_variance(total, total))),
        "delta_epsilon_window": float(np.sqrt(estimators.propagated_variance(mean_counts, mean_counts))),
        "delta_epsilon_sample": float(eps.std(ddof=1)),
        "total_counts": budget,
        "fidelity": float("nan"),
        "epsilon_true": models.model_negativity(cfg.model, pt),
    }]
    raw = [{"method": "optimal", "k": k.tolist()}] if keep_raw else []
    for proto, rng in ((tomography.j16_protocol(), rng_j), (tomography.r16_protocol(), rng_r)):
        data = tomography.simulate_tomo_counts(rho, proto, budget, rng)
        res = tomography.tomo_negativity(data, cfg.bootstrap, rng, reference=rho)
        rows.append({
            "method": proto.name,
            "epsilon": res.negativity,
            "delta_epsilon": res.negativity_sigma,
            "delta_epsilon_window": float("nan"),
            "delta_epsilon_sample": float("nan"),
            "total_counts": float(sum(data.counts)),
            "fidelity": res.fidelity_vs_reference,
            "epsilon_true": rows[0]["epsilon_true"],
        })
        if keep_raw:
            raw.append({"method": proto.name, "counts": list(data.counts)})
    return rows, raw


# -- tables -----------------------------------------------------------------

def run_qfi_table(cfg, keep_raw=False):
    rows = []
    for spec in cfg.points:
        pt = _model_point(spec)
        row = {"model": cfg.model.value, "p": pt.p, "q": pt.q,
               "epsilon": models.model_negativity(cfg.model, pt),
               "H_pp": float("nan"), "H_qq": float("nan"),
               "Hinv_pp_p_eps": float("nan"), "Hinv_epseps_p_eps": float("nan"), "error": ""}
        try:
            h = estimation.qfi_closed_form(cfg.model, pt)
            row["H_pp"], row["H_qq"] = float(h[0, 0]), float(h[1, 1])
            hpe = estimation.qfi_p_epsilon(cfg.model, pt.p, row["epsilon"])
            inv = np.linalg.inv(hpe.entries)
            row["Hinv_pp_p_eps"], row["Hinv_epseps_p_eps"] = float(inv[0, 0]), float(inv[1, 1])
        except (DomainError, ValidationError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows, []


def run_phase_scan(cfg, keep_raw=False):
    phis = np.radians(np.asarray(cfg.points, dtype=float))
    return [{"Phi_deg": float(np.degrees(P)), "Phi_rad": P, "p0": p0,
             "p0_expected": float((1 + np.cos(P)) / 4)}
            for P, p0 in measurement.phase_scan(phis)], []


def run_fano_check(cfg, keep_raw=False):
    """Fano factor of window totals and estimator efficiency per inflation factor."""
    pt = _model_point(cfg.state, "state")
    rows, raw = [], []
    for f, rng in zip(cfg.points, _streams(cfg, len(cfg.points))):
        sim = simulate_source(cfg.model, pt, cfg.mean_total, cfg.M, cfg.replications, rng,
                              fano=float(f), fano_mode=cfg.fano_mode)
        row = summarize(sim, "decoherence", cfg.model, f"p={pt.p:g};q={pt.q:g}")
        rows.append({"inflation": float(f), "fano_mode": cfg.fano_mode,
                     "fano_total": measurement.fano_factor(sim.K),
                     "fano_channel0": measurement.fano_factor(sim.k[..., 0]),
                     "var_normalized": row["var_normalized"], "qfi_bound": row["qfi_bound"],
                     "relative_deviation": row["var_normalized"] / row["qfi_bound"] - 1.0,
                     "mean_K": row["mean_K"], "windows": int(sim.K.size)})
        if keep_raw:
            raw.append({"inflation": float(f), "k": sim.k.tolist()})
    return rows, raw


RUNNERS = {
    "qfi-table": run_qfi_table,
    "saturation-sweep": run_saturation_sweep,
    "mixture-sweep": run_mixture_sweep,
    "tomo-compare": run_tomo_compare,
    "phase-scan": run_phase_scan,
    "fano-check": run_fano_check,
}


def run(cfg, keep_raw=False):
    return RUNNERS[cfg.experiment](cfg, keep_raw)


# -- output -----------------------------------------------------------------

def resolve_output(path):
    out = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def write_csv(rows, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if not rows:
            return path
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return path


def config_dict(cfg):
    d = asdict(cfg)
    d["model"] = cfg.model.value
    return d


def write_report(cfg, rows, raw, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"config": config_dict(cfg), "rows": rows}
    if raw:
        doc["raw"] = raw
    path.write_text(json.dumps(doc, indent=1, allow_nan=True))
    return path
