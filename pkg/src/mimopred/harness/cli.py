"""Command line entry point: ``mimopred <subcommand> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .. import crb
from ..channel import ChannelConfig, ChannelTensor, PathSet, add_noise, sample_grid
from ..exceptions import ConfigError, StageError
from ..predictor import fit
from ..stacking import Model
from ..utils import format_float, read_key_values, stream
from . import io
from .experiment import ExperimentConfig, _trial_paths, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGRADED = 3

log = logging.getLogger("mimopred")


def _floats(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list: {text!r}")
    return out


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--profile", choices=("desk", "paper"), default=None)
    p.add_argument("--scenario", type=int, choices=(1, 2))
    p.add_argument("--model", choices=("doddoa", "tssm", "mssm", "all"))
    p.add_argument("--snr", type=_floats, help="comma separated SNR list in dB (inf = clean)")
    p.add_argument("--horizon-lambda", type=_floats, help="comma separated horizons in wavelengths")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--z", type=int, help="model order override")
    p.add_argument("--threads", type=int)
    p.add_argument("--paths", type=Path, help="path table replacing the scenario I rays")
    p.add_argument("--out", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimopred", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a channel tensor (.npz) and its path table")
    _common(p)
    p.add_argument("--trial", type=int, default=0, help="trial index for scenario II draws")

    p = sub.add_parser("fit", help="fit one model and print the estimate as JSON")
    _common(p)
    p.add_argument("--tensor", type=Path, help=".npz written by simulate")
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("bound", help="write CRB tables")
    _common(p)

    p = sub.add_parser("experiment", help="full Monte Carlo run")
    _common(p)

    p = sub.add_parser("report", help="turn results.csv into per-figure CSVs")
    p.add_argument("--input", type=Path, required=True, help="directory holding results.csv")
    p.add_argument("--out", type=Path, default=Path("."))
    return parser


def experiment_config(args) -> ExperimentConfig:
    """Merge profile, config file and command-line flags (flags win)."""
    d = read_key_values(args.config) if args.config else {}
    if args.profile:
        d["profile"] = args.profile
    flags = {
        "scenario": args.scenario,
        "snr_db_grid": args.snr,
        "horizons_lambda": args.horizon_lambda,
        "n_trials": args.trials,
        "rng_seed": args.seed,
        "z_override": args.z,
        "threads": args.threads,
        "paths_file": str(args.paths) if args.paths else None,
    }
    if args.model:
        flags["models"] = list(Model) if args.model == "all" else [args.model]
    d.update({k: v for k, v in flags.items() if v is not None})
    try:
        return ExperimentConfig.from_dict(d)
    except (ValueError, TypeError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _noisy_tensor(cfg: ExperimentConfig, trial: int) -> tuple:
    paths = _trial_paths(cfg, trial)
    clean = sample_grid(paths, cfg.channel)
    snr = cfg.snr_db_grid[0]
    return paths, add_noise(clean, snr, stream(cfg.rng_seed, trial, 1, 0))


def cmd_simulate(args) -> int:
    cfg = experiment_config(args)
    paths, tensor = _noisy_tensor(cfg, args.trial)
    args.out.mkdir(parents=True, exist_ok=True)
    np.savez(args.out / "tensor.npz", samples=tensor.samples, noise_var=tensor.noise_var,
             config=json.dumps(dataclasses.asdict(cfg.channel)))
    (args.out / "paths.txt").write_text(paths.to_text())
    print(f"wrote {args.out / 'tensor.npz'} and {args.out / 'paths.txt'}")
    return EXIT_OK


def load_tensor(path) -> ChannelTensor:
    with np.load(path) as data:
        config = ChannelConfig(**json.loads(str(data["config"])))
        return ChannelTensor(config, np.array(data["samples"]), float(data["noise_var"]))


def cmd_fit(args) -> int:
    cfg = experiment_config(args)
    tensor = load_tensor(args.tensor) if args.tensor else _noisy_tensor(cfg, args.trial)[1]
    docs = []
    for model in cfg.models:
        try:
            est = fit(tensor, model, cfg.fit_options())
        except StageError as exc:
            docs.append({"model": model.value, "error": str(exc), "stage": exc.stage})
            continue
        docs.append(est.to_dict())
    print(json.dumps(docs if len(docs) > 1 else docs[0], indent=2))
    return EXIT_OK if all("error" not in d for d in docs) else EXIT_DEGRADED


def cmd_bound(args) -> int:
    cfg = experiment_config(args)
    c = cfg.channel
    paths = cfg.paths or _trial_paths(cfg, 0)
    clean = sample_grid(paths, c)
    power = float(np.mean(np.sum(np.abs(clean.samples) ** 2, axis=(-2, -1))))
    args.out.mkdir(parents=True, exist_ok=True)
    param_lines = ["snr_db,parameter,path,sqrt_crb"]
    pred_lines = ["snr_db,horizon_lambda,q,bound_nmse"]
    for snr in cfg.snr_db_grid:
        if not np.isfinite(snr):
            continue
        rep = crb.build_fim(paths, c, clean.mean_power() / 10 ** (snr / 10))
        for g in crb.PARAM_GROUPS:
            for z, v in enumerate(rep.group(g)):
                param_lines.append(f"{format_float(snr)},{g},{z},{format_float(float(np.sqrt(v)))}")
        for h in cfg.horizons_lambda:
            q = cfg.horizon_index(h)
            vals = [crb.prediction_bound(rep, paths, c, q, k, power).normalized_trace
                    for k in range(c.n_freq)]
            pred_lines.append(f"{format_float(snr)},{format_float(h)},{q},"
                              f"{format_float(float(np.mean(vals)))}")
    (args.out / "crb_parameters.csv").write_text("\n".join(param_lines) + "\n")
    (args.out / "crb_prediction.csv").write_text("\n".join(pred_lines) + "\n")
    print(f"wrote {args.out / 'crb_parameters.csv'} and {args.out / 'crb_prediction.csv'}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = experiment_config(args)
    start = time.perf_counter()
    table = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    extra = {"scenario": cfg.scenario, "n_trials": cfg.n_trials, "rng_seed": cfg.rng_seed,
             "channel": dataclasses.asdict(cfg.channel)}
    written = io.write_results(table, args.out, extra)
    for p in written.values():
        print(f"wrote {p}")
    log.info("experiment finished in %.1f s", elapsed)
    if table.degraded:
        print("run degraded: failure rate above ceiling", file=sys.stderr)
        return EXIT_DEGRADED
    return EXIT_OK


def cmd_report(args) -> int:
    table = io.read_csv(args.input / "results.csv")
    samples = args.input / "nse_samples.csv"
    if samples.exists():
        io.read_samples_csv(samples, table)
    for p in io.write_report(table, args.out):
        print(f"wrote {p}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "bound": cmd_bound,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
