"""Command-line interface.

Subcommands: ``simulate``, ``estimate``, ``params`` and ``tables``.
Exit codes: 0 success, 2 invalid flags or input, 3 runtime failure.
Options may also come from a JSON file given with ``--config``; flags on the
command line take precedence. ``SEQGINI_SEED`` sets the default base seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .engine import DEFAULT_CAP, StudyConfig, run_sequential
from .errors import InsufficientReplicationsError, SeqGiniRuntimeError, ValidationError
from .harness import run_study
from .io import read_income_file, record_to_text, rows_to_csv, write_text
from .population import FAMILIES, STUDY_MODELS, PopulationModel, population_params
from .risk import minimum_risk, optimal_n
from .tables import RAW_COLUMNS, TABLE1_COLUMNS, TABLE2_COLUMNS, batch_columns, reproduce_tables

log = logging.getLogger("seqgini")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3

STUDY_DEFAULTS = dict(A=50_000.0, c=0.1, m=10, rule="plain", gamma=0.25, cap=DEFAULT_CAP)
DEFAULTS = {
    "simulate": dict(STUDY_DEFAULTS, dist="exponential", param=[], reps=5000, workers=1, out=None,
                     format="json"),
    "estimate": dict(STUDY_DEFAULTS, input=None, out=None, format="json"),
    "params": dict(dist="exponential", param=[], A=None, c=None, out=None, format="json"),
    "tables": dict(STUDY_DEFAULTS, out_dir="tables", reps=5000, batches=10, batch_reps=500, workers=1,
                   emit_raw=False),
}
TYPES = dict(A=float, c=float, m=int, gamma=float, cap=int, reps=int, workers=int, seed=int, batches=int,
             batch_reps=int, emit_raw=bool)

# acceptance tolerances recorded in the tables manifest
TOLERANCES = {
    "table1_estimator_mean": "max(3 MC standard errors, 2% relative) of the population value",
    "table2_n_ratio": [0.98, 1.02],
    "table2_ratio_regret": [0.98, 1.02],
    "truth_xi2_relative": 0.005,
    "table3_abs_n_diff": 3.5,
    "table4_abs_regret_diff": 0.6,
}


def _study_flags(p, *, with_seed=True):
    p.add_argument("--A", type=float, help="cost per unit squared error (default 50000)")
    p.add_argument("--c", type=float, help="cost per observation (default 0.1)")
    p.add_argument("--m", type=int, help="pilot sample size, >= 4 (default 10)")
    p.add_argument("--rule", choices=["plain", "guarded"], help="stopping rule (default plain)")
    p.add_argument("--gamma", type=float, help="guarded-rule exponent in (0, 0.5) (default 0.25)")
    p.add_argument("--cap", type=int, help="safety bound on the sample size (default 1e6)")
    if with_seed:
        p.add_argument("--seed", type=int, help="base seed (default $SEQGINI_SEED or 1)")


def _dist_flags(p):
    p.add_argument("--dist", choices=sorted(FAMILIES), help="income distribution (default exponential)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="distribution parameter, repeatable; unset ones take the simulation-study values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqgini",
        description="Sequential minimum-risk point estimation of the Gini index.",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a replication study", argument_default=argparse.SUPPRESS)
    _dist_flags(p)
    _study_flags(p)
    p.add_argument("--reps", type=int, help="number of replications (default 5000)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--out", help="write the summary here")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default json)")
    p.add_argument("--config", help="JSON file with option values")

    p = sub.add_parser("estimate", help="apply the stopping rule to an income file",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--input", help="CSV file with header 'income'")
    _study_flags(p, with_seed=False)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default json)")
    p.add_argument("--config", help="JSON file with option values")

    p = sub.add_parser("params", help="print exact population parameters", argument_default=argparse.SUPPRESS)
    _dist_flags(p)
    p.add_argument("--A", type=float, help="also report n_c and the minimum risk")
    p.add_argument("--c", type=float, help="also report n_c and the minimum risk")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default json)")
    p.add_argument("--config", help="JSON file with option values")

    p = sub.add_parser("tables", help="reproduce the four simulation tables", argument_default=argparse.SUPPRESS)
    _study_flags(p)
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default ./tables)")
    p.add_argument("--reps", type=int, help="replications per distribution (default 5000)")
    p.add_argument("--batches", type=int, help="second-order batches (default 10)")
    p.add_argument("--batch-reps", dest="batch_reps", type=int, help="replications per batch (default 500)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--emit-raw", dest="emit_raw", action="store_true",
                   help="also write per-replication (N, G_N) pairs to raw.csv")
    p.add_argument("--config", help="JSON file with option values")
    return parser


def _load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as err:
        raise ValidationError(f"--config: cannot read {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise ValidationError(f"--config: {path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ValidationError("--config: top level must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_options(command: str, given: dict, env=os.environ) -> dict:
    """Merge defaults < config file < command-line flags."""
    opts = dict(DEFAULTS[command])
    if command in ("simulate", "tables"):
        seed = env.get("SEQGINI_SEED")
        try:
            opts["seed"] = int(seed) if seed is not None else 1
        except ValueError:
            raise ValidationError(f"SEQGINI_SEED must be an integer, got {seed!r}") from None
    if "config" in given:
        for k, v in _load_config(given["config"]).items():
            if k not in opts:
                raise ValidationError(f"--config: unknown option {k!r} for {command}")
            opts[k] = v
    opts.update({k: v for k, v in given.items() if k in opts})
    for k, typ in TYPES.items():
        if k in opts and opts[k] is not None:
            try:
                opts[k] = typ(opts[k])
            except (TypeError, ValueError):
                raise ValidationError(f"--{k.replace('_', '-')}: expected {typ.__name__}, got {opts[k]!r}") from None
    return opts


def model_from_options(dist: str, params) -> PopulationModel:
    if dist not in FAMILIES:
        raise ValidationError(f"--dist: unknown distribution {dist!r}; choose from {sorted(FAMILIES)}")
    values = dict(STUDY_MODELS[dist].params) if dist in STUDY_MODELS else {}
    if isinstance(params, dict):
        params = [f"{k}={v}" for k, v in params.items()]
    for item in params or []:
        key, sep, raw = str(item).partition("=")
        if not sep:
            raise ValidationError(f"--param: expected KEY=VALUE, got {item!r}")
        if key not in FAMILIES[dist].param_names:
            raise ValidationError(f"--param: {dist} has no parameter {key!r} "
                                  f"(expected {', '.join(FAMILIES[dist].param_names)})")
        try:
            values[key] = float(raw)
        except ValueError:
            raise ValidationError(f"--param: {key} must be a number, got {raw!r}") from None
    return PopulationModel.of(dist, **values)


def config_from_options(opts: dict, seed: int = 1) -> StudyConfig:
    return StudyConfig(A=opts["A"], c=opts["c"], m=opts["m"], rule=opts["rule"], gamma=opts["gamma"],
                       seed=opts.get("seed", seed), cap=opts["cap"])


def _emit(text: str, out) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_simulate(opts: dict) -> int:
    model = model_from_options(opts["dist"], opts["param"])
    config = config_from_options(opts)
    if opts["reps"] < 2:
        raise InsufficientReplicationsError(f"--reps: need at least 2 replications, got {opts['reps']}")
    summary = run_study(model, config, opts["reps"], workers=opts["workers"])
    r = summary.risk_report
    print(f"{model}: N_bar={summary.n_bar:.2f} (se {summary.se_n:.2f}), n_c={r.n_c:.2f}, "
          f"N_bar/n_c={r.n_ratio:.4f}, ratio regret={r.ratio_regret:.4f} (plug-in {r.plugin_ratio_regret:.4f})")
    if opts["out"]:
        write_text(opts["out"], record_to_text(summary.to_record(), opts["format"]))
    return EXIT_OK


def cmd_estimate(opts: dict) -> int:
    if not opts["input"]:
        raise ValidationError("--input is required")
    values = read_income_file(opts["input"])
    config = config_from_options(opts)
    res = run_sequential(values, config)
    record = dict(n=res.n_final, gini=res.gini_final, v2=res.v2_final, threshold=res.threshold_final,
                  history_length=res.history_length, sampling_cost=config.c * res.n_final,
                  stopped_by_cap=res.stopped_by_cap)
    _emit(record_to_text(record, opts["format"]), opts["out"])
    return EXIT_OK


def cmd_params(opts: dict) -> int:
    model = model_from_options(opts["dist"], opts["param"])
    params = population_params(model)
    record = dict(distribution=model.family, params=";".join(f"{k}={v!r}" for k, v in model.params),
                  **params.as_dict())
    if (opts["A"] is None) != (opts["c"] is None):
        raise ValidationError("--A and --c must be given together")
    if opts["A"] is not None:
        record.update(A=opts["A"], c=opts["c"], n_c=optimal_n(params.xi2, opts["A"], opts["c"]),
                      min_risk=minimum_risk(params.xi2, opts["A"], opts["c"]))
    _emit(record_to_text(record, opts["format"]), opts["out"])
    return EXIT_OK


def cmd_tables(opts: dict) -> int:
    config = config_from_options(opts)
    if opts["reps"] < 2:
        raise InsufficientReplicationsError(f"--reps: need at least 2 replications, got {opts['reps']}")
    if opts["batches"] < 0:
        raise ValidationError(f"--batches: must be >= 0, got {opts['batches']}")
    if opts["batches"] and opts["batch_reps"] < 2:
        raise InsufficientReplicationsError(f"--batch-reps: need at least 2, got {opts['batch_reps']}")
    started = time.perf_counter()
    ts = reproduce_tables(config, reps=opts["reps"], batches=opts["batches"], batch_reps=opts["batch_reps"],
                          workers=opts["workers"])
    out = Path(opts["out_dir"])
    cols = batch_columns(opts["batches"])
    files = {
        "table1.csv": rows_to_csv(ts.table1(), TABLE1_COLUMNS),
        "table2.csv": rows_to_csv(ts.table2(), TABLE2_COLUMNS),
        "table3.csv": rows_to_csv(ts.table3(), ["distribution", *cols]),
        "table4.csv": rows_to_csv(ts.table4(), ["distribution", "estimator", *cols]),
    }
    if opts["emit_raw"]:
        files["raw.csv"] = rows_to_csv(ts.raw_rows(), RAW_COLUMNS)
    manifest = dict(
        version=__version__,
        config=dict(A=config.A, c=config.c, m=config.m, rule=config.rule, gamma=config.gamma, cap=config.cap),
        seed=config.seed,
        reps=opts["reps"],
        batches=opts["batches"],
        batch_reps=opts["batch_reps"],
        models={name: dict(family=m.family, params=dict(m.params)) for name, m in STUDY_MODELS.items()},
        tolerances=TOLERANCES,
        files=sorted(files),
    )
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    for name, text in files.items():
        write_text(out / name, text)
    log.info("tables written to %s in %.1fs", out, time.perf_counter() - started)
    for row in ts.table2():
        print(f"{row['distribution']}: N_bar/n_c={row['n_ratio']:.4f}, ratio regret={row['ratio']:.4f} "
              f"(plug-in {row['ratio_plugin']:.4f})")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "params": cmd_params, "tables": cmd_tables}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    logging.basicConfig(level=logging.INFO if args.pop("verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    command = args.pop("command")
    try:
        opts = resolve_options(command, args)
        return COMMANDS[command](opts)
    except ValidationError as err:
        print(f"seqgini {command}: error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except SeqGiniRuntimeError as err:
        print(f"seqgini {command}: runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
