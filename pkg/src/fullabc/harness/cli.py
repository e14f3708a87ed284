"""Command-line entry point: ``fullabc {simulate,calibrate,run,metrics}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..core import DATA_STREAM, SeedSpec
from ..models import get_model
from .experiment import (METHODS, ExperimentConfig, calibrate, run_experiment, save_dataset,
                         simulate_dataset)
from .metrics import compute_metrics, load_results


def _floats(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def cmd_simulate(args) -> int:
    model = get_model(args.model)
    theta = _floats(args.theta) if args.theta else list(model.true_theta)
    if len(theta) != len(model.param_names):
        raise SystemExit(f"{args.model} takes {len(model.param_names)} parameters "
                         f"{model.param_names}, got {len(theta)}")
    n = args.n if args.n is not None else model.default_n
    data = simulate_dataset(model, theta, n, SeedSpec(args.seed, 0, DATA_STREAM))
    save_dataset(model, args.out, data)
    return 0


def cmd_calibrate(args) -> int:
    kw = dict(model=args.model, method=args.method, transform=args.transform, q=args.q,
              pool=args.pool, seed=args.seed)
    if args.dataset:
        kw["dataset"] = args.dataset
    elif args.theta:
        kw["theta_true"] = _floats(args.theta)
    if args.n is not None:
        kw["n"] = args.n
    if args.m is not None:
        kw["m"] = args.m if args.m == "auto" else int(args.m)
    cal = calibrate(ExperimentConfig(**kw))
    print(json.dumps(cal.to_dict()))
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    out = args.out or cfg_default_out(args.config)
    manifest = run_experiment(cfg, out)
    print(f"{manifest['replicates_completed']}/{cfg.replicates} replicates written to {out}")
    return 0


def cfg_default_out(config_path) -> Path:
    p = Path(config_path)
    return p.with_name(p.stem + "_results")


def cmd_metrics(args) -> int:
    d = Path(args.inp)
    manifest = json.loads((d / "manifest.json").read_text())
    truth = manifest["config"].get("theta_true")
    results = load_results(d / "results.json")
    if truth is None:
        raise SystemExit("real-data run: no true parameter, metrics unavailable "
                         "(posterior summaries are in results.json)")
    table = compute_metrics(results, truth)
    table.to_csv(args.out)
    print(table.format())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fullabc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one dataset")
    s.add_argument("--model", required=True)
    s.add_argument("--theta", help="comma-separated parameter values (default: reference value)")
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", help="calibrate the ABC tolerance or BSL/KDE m")
    c.add_argument("--model", required=True)
    c.add_argument("--method", required=True, choices=METHODS)
    c.add_argument("--q", type=float, default=0.01)
    c.add_argument("--pool", type=int, default=10_000)
    c.add_argument("--transform", default="raw", choices=("raw", "log"))
    c.add_argument("--theta")
    c.add_argument("--dataset")
    c.add_argument("--n", type=int)
    c.add_argument("--m")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_calibrate)

    r = sub.add_parser("run", help="run a study from a YAML/JSON config or a manifest")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="results directory (default: <config stem>_results)")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("metrics", help="bias/sd/coverage table from a results directory")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
