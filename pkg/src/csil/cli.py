"""Command-line harness: ``csil {gen,run,oracle,plot,sweep}``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.
"""
import argparse
import csv
import itertools
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import plotting
from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .meta_learner import run_stream
from .oracle import best_theta, read_comparator, write_comparator
from .rng import derive_seed, substream
from .taskgen import generate, read_stream, write_stream
from .trace import emit_trace, read_trace

logger = logging.getLogger("csil")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment TOML file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--mode", choices=("sample", "aggregate-mc"))
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="csil", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="write a synthetic stream")
    p = sub.add_parser("run", parents=[common], help="run the learner and write a trace")
    p.add_argument("--stream", help="stream CSV (default: generate from the config)")
    p.add_argument("--comparator", help="directory holding comparator.csv/json")
    p = sub.add_parser("oracle", parents=[common], help="compute the comparator only")
    p.add_argument("--stream", help="stream CSV (default: generate from the config)")
    p = sub.add_parser("plot", parents=[common], help="trace CSV(s) -> SVG")
    p.add_argument("traces", nargs="+", help="trace CSV files")
    sub.add_parser("sweep", parents=[common], help="grid over T, n, N, N1, eta, zeta")
    return parser


def _load(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("must be non-negative", field="--seed")
        cfg = cfg.with_seed(args.seed)
    if args.mode:
        cfg = cfg.with_mode(args.mode)
        cfg.learner_config()
    return cfg


def _stream(cfg, path):
    if path is None:
        return generate(cfg.stream)
    prov = Path(path).with_suffix(".json")
    return read_stream(path, prov if prov.exists() else None, M=cfg.stream.M)


def _oracle(cfg, stream):
    lc = cfg.learner_config(stream.config.M)
    return best_theta(stream, lc.loss, lc.within.ball, lc.within.dictionary,
                      cfg.oracle.strategy, grid_step=cfg.oracle.grid_step,
                      n_random=cfg.oracle.n_random,
                      rng=substream(cfg.seed, "oracle/random-search"))


def _run_one(cfg, stream, oracle=None):
    lc = cfg.learner_config(stream.config.M)
    if oracle is None:
        oracle = _oracle(cfg, stream)
    trace = run_stream(stream, lc, derive_seed(cfg.seed, "learner"), oracle=oracle)
    return trace, oracle


def cmd_gen(args, out):
    cfg = _load(args)
    stream = generate(cfg.stream)
    write_stream(stream, out / "stream.csv", out / "stream.json")
    logger.info("wrote %d tasks x %d rounds to %s", stream.T, cfg.stream.n, out / "stream.csv")


def cmd_oracle(args, out):
    cfg = _load(args)
    stream = _stream(cfg, args.stream)
    oracle = _oracle(cfg, stream)
    write_comparator(oracle, out / "comparator.csv", out / "comparator.json")
    logger.info("comparator %.6g (%s)", oracle.comparator_value, oracle.strategy)


def cmd_run(args, out):
    cfg = _load(args)
    stream = _stream(cfg, args.stream)
    oracle = None
    if args.comparator:
        d = Path(args.comparator)
        oracle = read_comparator(d / "comparator.csv", d / "comparator.json")
        if len(oracle.per_task_best_losses) != stream.T:
            raise ConfigError("comparator and stream task counts differ", field="--comparator")
    started = time.perf_counter()
    trace, oracle = _run_one(cfg, stream, oracle)
    emit_trace(trace, out / "trace.csv")
    plotting.plot_traces([trace], out / "regret.svg")
    summary = {
        "config": cfg.as_dict(),
        "compound_regret": trace.compound_regret,
        "mean_learner_loss": float(np.mean(trace.learner_loss)),
        "mean_oracle_loss": float(np.mean(trace.oracle_loss)),
        "comparator_strategy": oracle.strategy,
        "comparator_is_upper_bound": oracle.upper_bound,
        "seconds": time.perf_counter() - started,
    }
    with open(out / "summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, default=str)
        fh.write("\n")
    logger.info("compound regret %.6g over %d tasks", trace.compound_regret, trace.T)


def cmd_plot(args, out):
    traces = [read_trace(p)[0] for p in args.traces]
    labels = [Path(p).stem for p in args.traces] if len(traces) > 1 else None
    target = out if out.suffix == ".svg" else out / "regret.svg"
    plotting.plot_traces(traces, target, labels=labels)
    logger.info("wrote %s", target)


SWEEP_KEYS = ("T", "n", "N", "N1", "eta", "zeta")


def _sweep_cells(cfg):
    base = {"T": cfg.stream.T, "n": cfg.stream.n, "N": cfg.learner.N,
            "N1": cfg.learner.N1, "eta": cfg.learner.eta, "zeta": cfg.learner.zeta}
    axes = [getattr(cfg.sweep, k) or (base[k],) for k in SWEEP_KEYS]
    for values in itertools.product(*axes):
        yield dict(zip(SWEEP_KEYS, values))


def cmd_sweep(args, out):
    cfg = _load(args)
    rows = []
    for c, cell in enumerate(_sweep_cells(cfg)):
        for rep in range(cfg.sweep.replicates):
            seed = derive_seed(cfg.seed, f"sweep/cell/{c}/rep/{rep}")
            cell_cfg = cfg.with_seed(seed).with_stream(T=cell["T"], n=cell["n"])
            cell_cfg = cell_cfg.with_learner(N=cell["N"], N1=cell["N1"],
                                             eta=cell["eta"], zeta=cell["zeta"])
            trace, _ = _run_one(cell_cfg, generate(cell_cfg.stream))
            emit_trace(trace, out / f"trace_cell{c}_rep{rep}.csv")
            rows.append({"cell": c, "rep": rep, **cell, "seed": seed,
                         "compound_regret": trace.compound_regret,
                         "mean_learner_loss": float(np.mean(trace.learner_loss)),
                         "mean_oracle_loss": float(np.mean(trace.oracle_loss))})
            logger.info("cell %d rep %d: regret %.5g", c, rep, trace.compound_regret)
    cols = ["cell", "rep", *SWEEP_KEYS, "seed", "compound_regret", "mean_learner_loss",
            "mean_oracle_loss"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([f"{r[k]:.17g}" if isinstance(r[k], float) else r[k] for k in cols])
    medians = []
    for c, cell in enumerate(_sweep_cells(cfg)):
        vals = [r["compound_regret"] for r in rows if r["cell"] == c]
        medians.append({**cell, "median_regret": float(np.median(vals))})
    plotting.plot_sweep(medians, "T", "median_regret", out / "sweep.svg",
                        group_key="n" if len(cfg.sweep.n) > 1 else None)


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "oracle": cmd_oracle, "plot": cmd_plot,
            "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        if out.suffix != ".svg":
            os.makedirs(out, exist_ok=True)
        COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"csil: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"csil: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
