"""Monte Carlo evaluation of the predictors against ground truth and the CRB."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import crb
from ..channel import (
    ChannelConfig,
    PathSet,
    add_noise,
    response_from_params,
    sample_grid,
    scenario_one_paths,
    scenario_two_paths,
)
from ..exceptions import ConfigError, StageError
from ..predictor import FitOptions, fit, predict
from ..stacking import Model
from ..utils import read_key_values, stream, wrap_angle
from . import metrics

log = logging.getLogger(__name__)

PROFILES = {
    "desk": dict(channel=dict(n_time=30, n_freq=32), n_trials=100),
    "paper": dict(channel=dict(n_time=50, n_freq=64), n_trials=500, r=10, t=8),
}

_STRUCT = ("mu_r", "mu_t", "gamma", "eta")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: int = 1
    models: tuple = (Model.DODDOA, Model.TSSM, Model.MSSM)
    snr_db_grid: tuple = (15.0,)
    horizons_lambda: tuple = (1.0,)
    n_trials: int = 100
    channel: ChannelConfig = field(default_factory=lambda: ChannelConfig(n_time=30, n_freq=32))
    r: int | None = None
    t: int | None = None
    sigma_reg: float = 1e-5
    rng_seed: int = 0
    z_override: int | None = None
    z_hint: int | None = None
    n_paths: int = 6
    paths: PathSet | None = None
    threads: int = 1
    failure_ceiling: float = 0.05
    bounds: bool = True

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise ConfigError(f"scenario must be 1 or 2, got {self.scenario}")
        models = tuple(Model.parse(m) for m in _as_tuple(self.models))
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "snr_db_grid", tuple(float(s) for s in _as_tuple(self.snr_db_grid)))
        object.__setattr__(self, "horizons_lambda",
                           tuple(float(h) for h in _as_tuple(self.horizons_lambda)))
        if not models or not self.snr_db_grid or not self.horizons_lambda:
            raise ConfigError("models, snr_db_grid and horizons_lambda must be non-empty")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @classmethod
    def from_profile(cls, profile: str = "desk", **overrides) -> "ExperimentConfig":
        try:
            base = dict(PROFILES[profile])
        except KeyError:
            raise ConfigError(f"unknown profile {profile!r}") from None
        chan = dict(base.pop("channel"))
        chan.update(overrides.pop("channel", {}))
        base.update(overrides)
        return cls(channel=ChannelConfig(**chan), **base)

    @classmethod
    def from_dict(cls, d: dict, profile: str = "desk") -> "ExperimentConfig":
        chan_names = {f.name for f in dataclasses.fields(ChannelConfig)}
        own = {f.name for f in dataclasses.fields(cls)} - {"channel", "paths"}
        unknown = set(d) - chan_names - own - {"profile", "paths_file"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        profile = d.get("profile", profile)
        kw = {k: v for k, v in d.items() if k in own}
        kw["channel"] = {k: v for k, v in d.items() if k in chan_names}
        if d.get("paths_file"):
            kw["paths"] = PathSet.from_file(d["paths_file"])
        try:
            return cls.from_profile(profile, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path, profile: str = "desk") -> "ExperimentConfig":
        return cls.from_dict(read_key_values(path), profile)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def horizon_index(self, horizon_lambda: float) -> int:
        """Time index ``horizon_lambda`` wavelengths past the last observed sample."""
        c = self.channel
        return c.n_time - 1 + int(round(horizon_lambda * c.spatial_rate_per_lambda))

    def fit_options(self) -> FitOptions:
        return FitOptions(r=self.r, t=self.t, sigma_reg=self.sigma_reg,
                          z_override=self.z_override, z_hint=self.z_hint)


def _as_tuple(v):
    if isinstance(v, (list, tuple)):
        return tuple(v)
    return (v,)


@dataclass(frozen=True)
class Row:
    model: str
    snr_db: float
    horizon_lambda: float | None
    metric: str
    value: float
    n_trials: int
    seed: int

    @property
    def key(self):
        return (self.model, self.snr_db, self.horizon_lambda, self.metric)


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    nse_samples: list = field(default_factory=list)  # (model, snr, horizon, trial, nse)
    degraded: bool = False

    def add(self, row: Row):
        self.rows.append(row)

    def get(self, model, snr_db, horizon_lambda, metric) -> float:
        key = (str(model), float(snr_db),
               None if horizon_lambda is None else float(horizon_lambda), metric)
        for row in self.rows:
            if row.key == key:
                return row.value
        raise KeyError(key)

    def samples(self, model, snr_db, horizon_lambda) -> np.ndarray:
        return np.array([s[4] for s in self.nse_samples
                         if s[0] == str(model) and s[1] == float(snr_db)
                         and s[2] == float(horizon_lambda)])

    def check_unique(self):
        keys = [r.key for r in self.rows]
        if len(set(keys)) != len(keys):
            raise AssertionError("duplicate result keys")


@dataclass
class _ModelOutcome:
    nse: dict | None = None  # horizon -> mean NSE over subcarriers
    errors: dict | None = None  # name -> per-true-path wrapped errors (nan if unmatched)
    z_hat: int | None = None
    failure: str | None = None


@dataclass
class _TrialOutcome:
    index: int
    z_true: int
    by_key: dict  # (model, snr) -> _ModelOutcome
    bounds: dict  # (snr, horizon) -> normalized trace bound


def _trial_paths(cfg: ExperimentConfig, index: int) -> PathSet:
    if cfg.scenario == 1:
        return cfg.paths or scenario_one_paths()
    return scenario_two_paths(cfg.n_paths, stream(cfg.rng_seed, index, 0), cfg.channel)


def run_trial(cfg: ExperimentConfig, index: int) -> _TrialOutcome:
    c = cfg.channel
    paths = _trial_paths(cfg, index)
    truth_params = paths.normalized(c)
    clean = sample_grid(paths, c)
    power = metrics.grid_power(clean.samples)
    k_all = np.arange(c.n_freq)
    q_h = [cfg.horizon_index(h) for h in cfg.horizons_lambda]
    truth_h = response_from_params(truth_params, c.n_rx, c.n_tx,
                                   np.asarray(q_h)[:, None], k_all[None, :])
    opts = cfg.fit_options()
    truth_dict = {n: getattr(truth_params, n) for n in _STRUCT}
    by_key = {}
    bounds = {}
    for si, snr in enumerate(cfg.snr_db_grid):
        noisy = add_noise(clean, snr, stream(cfg.rng_seed, index, 1, si))
        for model in cfg.models:
            out = _ModelOutcome()
            try:
                est = fit(noisy, model, opts)
            except StageError as exc:
                out.failure = str(exc)
                by_key[(model, snr)] = out
                continue
            pred = predict(est, q_h, k_all, c)
            per_h = metrics.nse(pred, truth_h, power).mean(axis=1)
            out.nse = dict(zip(cfg.horizons_lambda, per_h))
            out.z_hat = est.z_hat
            est_dict = est.structural.as_dict()
            match = metrics.match_paths(truth_dict, est_dict)
            out.errors = {}
            for name, values in est_dict.items():
                err = np.full(len(paths), np.nan)
                ok = match >= 0
                err[ok] = wrap_angle(values[match[ok]] - truth_dict[name][ok])
                out.errors[name] = err
            by_key[(model, snr)] = out
        if cfg.bounds and np.isfinite(snr):
            sigma2 = clean.mean_power() / 10 ** (snr / 10)
            rep = crb.build_fim(truth_params, c, sigma2)
            for h, q in zip(cfg.horizons_lambda, q_h):
                b = [crb.prediction_bound(rep, truth_params, c, q, k, power).normalized_trace
                     for k in k_all]
                bounds[(snr, h)] = float(np.mean(b))
    return _TrialOutcome(index, len(paths), by_key, bounds)


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Run every trial and reduce to a :class:`ResultTable`.

    Trials may run on a thread pool; each draws from its own seeded stream and
    results are reduced in trial order, so the table does not depend on
    ``cfg.threads``.
    """
    indices = range(cfg.n_trials)
    if cfg.threads == 1:
        outcomes = [run_trial(cfg, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(lambda i: run_trial(cfg, i), indices))
    outcomes.sort(key=lambda o: o.index)
    return _reduce(cfg, outcomes)


def _reduce(cfg: ExperimentConfig, outcomes) -> ResultTable:
    table = ResultTable()
    seed = cfg.rng_seed
    for snr in cfg.snr_db_grid:
        for model in cfg.models:
            name = model.value
            runs = [o.by_key[(model, snr)] for o in outcomes]
            good = [(o, r) for o, r in zip(outcomes, runs) if r.failure is None]
            n_ok = len(good)
            fail_rate = 1.0 - n_ok / len(runs)
            if fail_rate > cfg.failure_ceiling:
                table.degraded = True
                log.warning("%s at %s dB: %.0f%% of trials failed", name, snr, 100 * fail_rate)
            table.add(Row(name, snr, None, "failure_rate", fail_rate, len(runs), seed))
            if not n_ok:
                continue
            order_ok = np.mean([r.z_hat == o.z_true for o, r in good])
            table.add(Row(name, snr, None, "order_rate", float(order_ok), n_ok, seed))
            for h in cfg.horizons_lambda:
                vals = np.array([r.nse[h] for _, r in good])
                table.add(Row(name, snr, h, "nmse", float(vals.mean()), n_ok, seed))
                table.add(Row(name, snr, h, "median_nse", float(np.median(vals)), n_ok, seed))
                for (o, r), v in zip(good, vals):
                    table.nse_samples.append((name, snr, h, o.index, float(v)))
            for param in good[0][1].errors:
                errs = np.array([r.errors[param] for _, r in good])  # trials x Z
                if cfg.scenario == 1:
                    for z in range(errs.shape[1]):
                        col = errs[:, z][np.isfinite(errs[:, z])]
                        if col.size:
                            table.add(Row(name, snr, None, f"rmse_{param}[{z}]",
                                          float(np.sqrt(np.mean(col**2))), col.size, seed))
                pooled = errs[np.isfinite(errs)]
                if pooled.size:
                    table.add(Row(name, snr, None, f"rmse_{param}",
                                  float(np.sqrt(np.mean(pooled**2))), n_ok, seed))
        if cfg.bounds and np.isfinite(snr):
            for h in cfg.horizons_lambda:
                vals = [o.bounds[(snr, h)] for o in outcomes]
                table.add(Row("bound", snr, h, "nmse", float(np.mean(vals)), len(vals), seed))
            if cfg.scenario == 1:
                _add_crb_rows(table, cfg, snr)
    table.check_unique()
    return table


def _add_crb_rows(table: ResultTable, cfg: ExperimentConfig, snr: float):
    c = cfg.channel
    paths = cfg.paths or scenario_one_paths()
    clean = sample_grid(paths, c)
    rep = crb.build_fim(paths, c, clean.mean_power() / 10 ** (snr / 10))
    for param in _STRUCT:
        for z, v in enumerate(rep.group(param)):
            table.add(Row("bound", snr, None, f"rmse_{param}[{z}]", float(np.sqrt(v)),
                          cfg.n_trials, cfg.rng_seed))
