"""
Command line entry point, ``nsatp <command>``:

    simulate      simulate service days and write a dataset file
    train         train (or score, for baselines) the configured model
    evaluate      score a checkpoint on a dataset split
    adf           ADF statistic of a one-column CSV series
    gradcheck     finite-difference check of every op and both tiny models
    ablate        stationarization x compensation ablation grid
    compare       NSATP against its base model over several seeds
    stationarity  mean ADF before/after window-wise stationarization

Exit codes: 0 success, 1 failed gradient checks, 2 config error, 3 divergence, 4 I/O error.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from nsatp._version import __version__
from nsatp.exceptions import ConfigError, DivergenceError
from nsatp.harness.ablation import ablate
from nsatp.harness.config import ExperimentConfig, load_config
from nsatp.harness.data import dataset_for, simulate_dataset
from nsatp.harness.diagnostics import compare_compensation, stationarity_shift
from nsatp.harness.evaluate import evaluate, load_model
from nsatp.harness.gradcheck import run_suite
from nsatp.harness.report import format_table, horizon_table, metrics_table
from nsatp.harness.trainer import train
from nsatp.stats.adf import KINDS, adf_test
from nsatp.transit.dataset import Dataset
from nsatp.transit.simulator import make_route

logger = logging.getLogger("nsatp")


def _config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    return config.with_overrides(seed=getattr(args, "seed", None), dataset=getattr(args, "dataset", None))


def _write_json(json_data: dict, out_dir: str, name: str) -> None:
    print(json.dumps(json_data, indent=2))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, name), "w") as f:
            json.dump(json_data, f, indent=2)


def cmd_simulate(args) -> int:
    config = _config(args)
    dataset = simulate_dataset(config, n_future=args.horizon, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    filename = os.path.join(args.out, f"dataset_{dataset.n_past}_{dataset.n_future}.jsonl")
    dataset.save(filename)
    print(json.dumps({"dataset": filename, "splits": dataset.split_counts, "skipped_trips": dataset.skipped_trips}))
    return 0


def cmd_train(args) -> int:
    config = _config(args)
    _, report = train(config, dataset_for(config), out_dir=args.out)
    print(metrics_table({config.model: report}))
    if report.test is not None:
        print(horizon_table(report.test))
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.checkpoint)
    evaluation = evaluate(model, Dataset.from_file(args.dataset), n_future=args.horizon, split=args.split)
    _write_json({"metrics": evaluation.metrics.to_json(), "adf_ratio": evaluation.adf_ratio,
                 "adf_scored": evaluation.adf_scored, "adf_skipped": evaluation.adf_skipped},
                args.out, "evaluation.json")
    return 0


def cmd_adf(args) -> int:
    if not os.path.exists(args.csv):
        raise FileNotFoundError(f"Series file {args.csv} does not exist")
    series = np.loadtxt(args.csv, delimiter=",", ndmin=1, dtype=np.float64)
    if series.ndim != 1:
        raise ConfigError(f"{args.csv} must hold exactly one column")
    result = adf_test(series, max_lag=args.max_lag, kind=args.kind, min_length=args.min_length)
    print(json.dumps(result.to_json(), indent=2))
    return 0


def cmd_gradcheck(args) -> int:
    results = run_suite(seed=args.seed or 0, models=not args.ops_only)
    print(format_table(["check", "passed", "inputs", "seconds"],
                       [[r.name, "yes" if r.passed else "NO", r.n_inputs, r.seconds] for r in results]))
    return 0 if all(r.passed for r in results) else 1


def cmd_ablate(args) -> int:
    config = _config(args)
    table = ablate(config, dataset_for(config), jobs=args.jobs)
    print(table)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "ablation.json"), "w") as f:
            json.dump(table.to_json(), f, indent=2)
    return 0


def cmd_compare(args) -> int:
    config = _config(args)
    comparison = compare_compensation(config, dataset_for(config), seeds=range(args.seeds))
    print(comparison)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"compare_{comparison.backbone}_{comparison.n_future}.json"), "w") as f:
            json.dump(comparison.to_json(), f, indent=2)
    return 0


def cmd_stationarity(args) -> int:
    config = _config(args)
    route = make_route(config.simulation.n_stops, seed=config.simulation.route_seed,
                       signal_fraction=config.simulation.signal_fraction)
    shift = stationarity_shift(route, config.delay_process, n_windows=args.windows, length=args.length,
                               window=args.window)
    _write_json(shift.to_json(), args.out, "stationarity.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsatp", description="Non-stationary arrival time prediction toolkit")
    parser.add_argument("--version", action="version", version=f"nsatp {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, config=True, out="runs"):
        sub = commands.add_parser(name, help=help)
        if config:
            sub.add_argument("--config", help="experiment TOML file")
            sub.add_argument("--seed", type=int)
        sub.add_argument("--out", default=out, help="output directory")
        sub.set_defaults(func=func)
        return sub

    sub = add("simulate", cmd_simulate, "simulate a dataset", out="data")
    sub.add_argument("--horizon", type=int, help="N_f, overrides the config")
    sub.add_argument("--jobs", type=int, default=1)

    sub = add("train", cmd_train, "train and score a model")
    sub.add_argument("--dataset", help="dataset file, overrides the config")

    sub = add("evaluate", cmd_evaluate, "score a checkpoint", config=False, out=None)
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--dataset", required=True)
    sub.add_argument("--horizon", type=int, help="expected N_f")
    sub.add_argument("--split", default="test")

    sub = add("adf", cmd_adf, "ADF statistic of a CSV series", config=False, out=None)
    sub.add_argument("csv")
    sub.add_argument("--kind", choices=KINDS, default="constant_and_trend")
    sub.add_argument("--max-lag", type=int)
    sub.add_argument("--min-length", type=int, default=20)

    sub = add("gradcheck", cmd_gradcheck, "finite-difference gradient suite", config=False, out=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--ops-only", action="store_true")

    sub = add("ablate", cmd_ablate, "run the ablation grid")
    sub.add_argument("--dataset")
    sub.add_argument("--jobs", type=int, default=1)

    sub = add("compare", cmd_compare, "compensation on vs off over several seeds")
    sub.add_argument("--dataset")
    sub.add_argument("--seeds", type=int, default=5)

    sub = add("stationarity", cmd_stationarity, "ADF before/after stationarization", out=None)
    sub.add_argument("--windows", type=int, default=500)
    sub.add_argument("--length", type=int, default=20)
    sub.add_argument("--window", type=int, default=5)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as ex:
        logger.error("config error: %s", ex)
        return 2
    except DivergenceError as ex:
        logger.error("training diverged: %s", ex)
        return 3
    except OSError as ex:
        logger.error("I/O error: %s", ex)
        return 4


if __name__ == "__main__":
    sys.exit(main())
