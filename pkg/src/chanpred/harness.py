"""Monte Carlo trials and parameter sweeps comparing the predictors.

Per-trial seeds come from ``derive_seed(base_seed, point_index, trial_index)``,
which hashes the key through ``numpy.random.SeedSequence`` and keeps the
first 64-bit word. Trial results depend only on their own seed, so running
trials in a process pool gives the same numbers as running them serially.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from chanpred.channel import corrupt_to_ls, draw_sos_parameters, generate_trace, jakes_acf, white_trace
from chanpred.neural import Architecture, TrainConfig, init_model, predict_segment_nn, train
from chanpred.numerics import DomainError
from chanpred.wiener import design, exact_acf, predict_segment, sample_acf

PREDICTORS = ("wiener", "rnn", "lstm")
SWEEP_AXES = ("window", "horizon", "snr_db", "fd_max")
CSV_HEADER = ("axis", "axis_value", "predictor", "trials", "mse", "mse_db")
DB_FLOOR = -300.0


def derive_seed(*keys: int) -> int:
    """Mix non-negative integer keys into one 64-bit seed."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)
    return int(state[0])


def mse_to_db(mse: float) -> float:
    if mse < 0 or math.isnan(mse):
        raise DomainError(f"MSE must be >= 0, got {mse}")
    if mse == 0:
        return DB_FLOOR
    return 10.0 * math.log10(mse)


@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo trial.

    ``wiener_acf="jakes"`` designs the Wiener filter from the exact Jakes ACF,
    with the noise variance as diagonal loading, instead of the sample ACF. ``white_channel`` replaces the fading channel with i.i.d.
    unit-power noise, as a diagnostic.
    """

    total_samples: int = 1000
    train_fraction: float = 0.75
    window: int = 5
    horizon: int = 1
    snr_db: float = 10.0
    fd_max: float = 100.0
    ts: float = 1e-3
    num_sinusoids: int = 200
    predictors: tuple[str, ...] = PREDICTORS
    arch: Architecture = field(default_factory=Architecture)
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0
    wiener_acf: str = "sample"
    white_channel: bool = False

    def __post_init__(self):
        object.__setattr__(self, "predictors", tuple(self.predictors))
        unknown = set(self.predictors) - set(PREDICTORS)
        if unknown or not self.predictors:
            raise DomainError(f"predictors must be a non-empty subset of {PREDICTORS}, got {self.predictors}")
        if not 0.0 < self.train_fraction < 1.0:
            raise DomainError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.window < 1 or self.horizon < 1:
            raise DomainError("window and horizon must be >= 1")
        if self.test_len < self.window + self.horizon:
            raise DomainError(
                f"test segment of {self.test_len} samples is shorter than N + l = {self.window + self.horizon}")
        if self.wiener_acf not in ("sample", "jakes"):
            raise DomainError(f"wiener_acf must be 'sample' or 'jakes', got {self.wiener_acf!r}")

    @property
    def train_len(self) -> int:
        return int(math.floor(self.train_fraction * self.total_samples))

    @property
    def test_len(self) -> int:
        return self.total_samples - self.train_len


@dataclass(frozen=True)
class TrialResult:
    mse: dict[str, float]
    predictions: int
    epochs: dict[str, int]
    wall_time: float = field(default=0.0, compare=False)


def _wiener_mse(cfg: TrialConfig, ls, train_part, test_est, test_truth) -> float:
    max_lag = cfg.window - 1 + cfg.horizon
    if cfg.wiener_acf == "jakes":
        acf = exact_acf([jakes_acf(k, cfg.fd_max, cfg.ts) for k in range(max_lag + 1)])
        pred = design(acf, cfg.window, cfg.horizon, loading=ls.noise_variance)
    else:
        pred = design(sample_acf(train_part, max_lag), cfg.window, cfg.horizon)
    err = test_truth - predict_segment(pred, test_est)
    return float(np.mean(err.real**2 + err.imag**2))


def run_trial(cfg: TrialConfig) -> TrialResult:
    """Generate a channel, corrupt it, design/train every predictor, score on the test tail."""
    start = time.perf_counter()
    if cfg.white_channel:
        trace = white_trace(cfg.total_samples, cfg.seed, cfg.ts)
    else:
        params = draw_sos_parameters(cfg.num_sinusoids, cfg.seed)
        trace = generate_trace(params, cfg.fd_max, cfg.ts, cfg.total_samples)
    ls = corrupt_to_ls(trace, cfg.snr_db, cfg.seed)
    split = cfg.train_len
    train_part, test_est = ls.estimates[:split], ls.estimates[split:]
    test_truth = trace.samples[split + cfg.window - 1 + cfg.horizon :]

    mse, epochs = {}, {}
    for name in cfg.predictors:
        if name == "wiener":
            mse[name] = _wiener_mse(cfg, ls, train_part, test_est, test_truth)
            epochs[name] = 0
            continue
        kind_index = PREDICTORS.index(name)
        arch = replace(cfg.arch, cell_kind=name, window=cfg.window)
        model = init_model(arch, derive_seed(cfg.seed, kind_index, 0))
        tcfg = replace(cfg.train_cfg, seed=derive_seed(cfg.seed, kind_index, 1))
        fit = train(model, train_part, cfg.window, cfg.horizon, tcfg)
        err = test_truth - predict_segment_nn(fit.model, test_est, cfg.horizon)
        mse[name] = float(np.mean(err.real**2 + err.imag**2))
        epochs[name] = fit.epochs
    return TrialResult(mse, test_truth.size, epochs, time.perf_counter() - start)


@dataclass
class SweepResult:
    """Per-trial MSE for every (axis point, predictor).

    ``trial_mse[p]`` has shape ``(len(values), trials)``.
    """

    axis: str
    values: list
    predictors: tuple[str, ...]
    trials: int
    trial_mse: dict[str, np.ndarray] = field(default_factory=dict)

    def mean_mse(self, predictor: str) -> np.ndarray:
        return self.trial_mse[predictor].mean(axis=1)

    def mean_mse_db(self, predictor: str) -> np.ndarray:
        return np.array([mse_to_db(m) for m in self.mean_mse(predictor)])

    def rows(self):
        """``(axis, axis_value, predictor, trials, mse, mse_db)`` sorted by value then predictor."""
        out = []
        for i, value in enumerate(self.values):
            for p in self.predictors:
                mean = float(self.trial_mse[p][i].mean())
                out.append((self.axis, value, p, self.trials, mean, mse_to_db(mean)))
        out.sort(key=lambda r: (_sort_key(r[1]), r[2]))
        return out


def _sort_key(value):
    if isinstance(value, tuple):
        return tuple(float(v) for v in value)
    return (float(value),)


def _run_many(configs: list[TrialConfig], workers: int) -> list[TrialResult]:
    if workers <= 1 or len(configs) <= 1:
        return [run_trial(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, configs, chunksize=max(1, len(configs) // (4 * workers))))


def _collect(axis, values, predictors, trials, configs, workers) -> SweepResult:
    results = _run_many(configs, workers)
    sweep = SweepResult(axis, list(values), tuple(predictors), trials)
    for p in predictors:
        sweep.trial_mse[p] = np.array([r.mse[p] for r in results]).reshape(len(values), trials)
    return sweep


def run_sweep(base: TrialConfig, axis: str, values, trials: int, workers: int = 1) -> SweepResult:
    """Average ``trials`` independent trials at each value of one config field.

    Seeds are ``derive_seed(base.seed, value_index, trial_index)``.
    """
    values = list(values)
    if axis not in SWEEP_AXES:
        raise DomainError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if not values:
        raise DomainError("sweep needs at least one axis value")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    cast = int if axis in ("window", "horizon") else float
    values = [cast(v) for v in values]
    configs = [
        replace(base, **{axis: v}, seed=derive_seed(base.seed, i, t))
        for i, v in enumerate(values)
        for t in range(trials)
    ]
    return _collect(axis, values, base.predictors, trials, configs, workers)


def architecture_sweep(base: TrialConfig, grid, doppler_values, trials: int, workers: int = 1) -> SweepResult:
    """RNN MSE for each ``(hidden_layers, hidden_units)`` across Doppler values.

    Axis values are ``(n_o, n_h, fd_max)`` tuples. All architectures at one
    Doppler value see the same channel realizations (seeds depend on the
    Doppler index and trial index only).
    """
    grid = [(int(a), int(b)) for a, b in grid]
    doppler_values = [float(f) for f in doppler_values]
    if not grid or not doppler_values:
        raise DomainError("architecture sweep needs a non-empty grid and Doppler list")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    values, configs = [], []
    for layers, units in grid:
        for j, fd in enumerate(doppler_values):
            values.append((layers, units, fd))
            arch = replace(base.arch, cell_kind="rnn", hidden_layers=layers, hidden_units=units)
            for t in range(trials):
                configs.append(replace(base, predictors=("rnn",), arch=arch, fd_max=fd,
                                       seed=derive_seed(base.seed, j, t)))
    return _collect("architecture", values, ("rnn",), trials, configs, workers)


def format_value(value) -> str:
    if isinstance(value, tuple):
        layers, units, fd = value
        return f"{layers}x{units}@{fd:.17g}"
    return f"{value:.17g}"


def results_csv(sweep: SweepResult) -> str:
    """The sweep as CSV text (LF endings, 17 significant digits)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for axis, value, p, trials, mse, db in sweep.rows():
        writer.writerow([axis, format_value(value), p, trials, f"{mse:.16e}", f"{db:.16e}"])
    return buf.getvalue()


def write_results(sweep: SweepResult, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(results_csv(sweep))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
