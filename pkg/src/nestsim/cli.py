"""Command-line front end.

Machine-readable output (JSONL traces, JSON reports, CSV) goes to stdout or
--out; human-readable summaries go to stderr.  Exit codes: 0 success,
1 check/convergence failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import harness, lemmas
from .config import ColonyConfig, ConfigError, load_config_file, make_qualities
from .engine import run, stream_from_key


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not a positive integer")
    return value


def _int_list(text: str):
    return tuple(int(x) for x in text.split(","))


def _out_path(arg, default_name):
    if arg:
        return Path(arg)
    outdir = os.environ.get("NESTSIM_OUT_DIR")
    if outdir:
        return Path(outdir) / default_name
    return None  # stdout


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nestsim",
        description="seeded ant nest-site selection simulator and lemma lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single seeded run, JSONL trace + report")
    p_run.add_argument("--config", help="key=value file providing flag defaults")
    p_run.add_argument("--algo", choices=("optimal", "simple"), default="simple")
    p_run.add_argument("--n", type=_positive_int, default=256)
    p_run.add_argument("--k", type=_positive_int, default=4)
    p_run.add_argument(
        "--qualities",
        default="one-good",
        help="one-good | all-good | random:p | explicit e.g. 1,0,1",
    )
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--max-rounds", type=int, default=0)
    p_run.add_argument("--out", help="trace file path (report goes next to it)")
    p_run.add_argument("--verbose-trace", action="store_true")

    p_sweep = sub.add_parser("sweep", help="trial sweep over (n, k) cells, CSV out")
    p_sweep.add_argument("--config", help="key=value file providing flag defaults")
    p_sweep.add_argument("--algo", choices=("optimal", "simple"), default="simple")
    p_sweep.add_argument("--n", type=_int_list, default=(64, 256), metavar="N1,N2,...")
    p_sweep.add_argument("--k", type=_int_list, default=(4,), metavar="K1,K2,...")
    p_sweep.add_argument("--qualities", default="all-good")
    p_sweep.add_argument("--trials", type=_positive_int, default=100)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--max-rounds", type=int, default=0)
    p_sweep.add_argument("--out", help="CSV output path")

    p_lemma = sub.add_parser("lemma", help="empirical lemma checks, JSON report")
    lsub = p_lemma.add_subparsers(dest="lemma", required=True)

    p = lsub.add_parser("recruit-success")
    p.add_argument("--active", type=_positive_int, default=2)
    p.add_argument("--passive", type=int, default=0)
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = lsub.add_parser("retention")
    p.add_argument("--n", type=_positive_int, default=256)
    p.add_argument("--trials", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = lsub.add_parser("nest-delta")
    p.add_argument("--sizes", type=_int_list, required=True, metavar="S1,S2,...")
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = lsub.add_parser("eps-init")
    p.add_argument("--n", type=_positive_int, default=8)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--mode", choices=("exact", "monte-carlo"), default="exact")
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = lsub.add_parser("ratio-growth")
    p.add_argument("--n", type=_positive_int, default=4096)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--sizes", type=_int_list, required=True, metavar="S1,S2")
    p.add_argument("--trials", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = lsub.add_parser("dropout")
    p.add_argument("--n", type=_positive_int, default=4096)
    p.add_argument("--k", type=_positive_int, default=4)
    p.add_argument("--small", type=int, default=16)
    p.add_argument("--trials", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p_fit = sub.add_parser("fit", help="scaling-law fit over a sweep CSV")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--model", choices=("logn", "klogn"), required=True)

    return parser


def _apply_config_file(parser, argv):
    """Use a --config file's key=value pairs as flag defaults."""
    if "--config" not in argv:
        return
    path = argv[argv.index("--config") + 1]
    raw = load_config_file(path)
    converters = {
        "n": _int_list,
        "k": _int_list,
        "trials": _positive_int,
        "seed": int,
        "max_rounds": int,
    }
    defaults = {}
    for key, value in raw.items():
        conv = converters.get(key)
        defaults[key] = conv(value) if conv else value
    # single run takes scalar n/k
    if "n" in defaults and len(defaults["n"]) == 1 and argv[0] == "run":
        defaults["n"] = defaults["n"][0]
    if "k" in defaults and len(defaults["k"]) == 1 and argv[0] == "run":
        defaults["k"] = defaults["k"][0]
    for action in parser._subparsers._group_actions[0].choices.values():
        action.set_defaults(**{k: v for k, v in defaults.items() if k != "config"})


def cmd_run(args) -> int:
    rng = stream_from_key(args.seed & (2**64 - 1))
    qualities = make_qualities(args.k, args.qualities, rng)
    config = ColonyConfig(
        n=args.n,
        k=args.k,
        qualities=qualities,
        seed=args.seed,
        algorithm=args.algo,
        max_rounds=args.max_rounds,
    )
    trace, report = run(config, rng=rng, verbose=args.verbose_trace)
    out = _out_path(args.out, "trace.jsonl")
    _emit(trace.to_jsonl(), out)
    report_path = None if out is None else out.with_suffix(".report.json")
    _emit(report.to_json() + "\n", report_path)
    print(
        f"{args.algo} n={args.n} k={args.k} seed={args.seed}: {report.reason}"
        + (f" at round {report.rounds_to_converge} -> nest {report.winning_nest}"
           if report.converged else ""),
        file=sys.stderr,
    )
    return 0 if report.converged else 1


def cmd_sweep(args) -> int:
    spec = harness.ExperimentSpec(
        algorithm=args.algo,
        n_values=args.n,
        k_values=args.k,
        pattern=args.qualities,
        trials=args.trials,
        seed=args.seed,
        max_rounds=args.max_rounds,
    )
    rows = harness.sweep(spec)
    _emit(harness.rows_to_csv(rows), _out_path(args.out, "sweep.csv"))
    bad = [r for r in rows if r.converged < r.trials]
    for r in bad:
        print(
            f"cell n={r.n} k={r.k}: only {r.converged}/{r.trials} trials converged",
            file=sys.stderr,
        )
    return 1 if bad else 0


def cmd_lemma(args) -> int:
    if args.lemma == "recruit-success":
        groups = [(1, args.active, 1)]
        if args.passive:
            groups.append((2, args.passive, 0))
        report = lemmas.recruit_success_rate(
            lemmas.ScenarioSpec(tuple(groups), args.trials, args.seed)
        )
    elif args.lemma == "retention":
        report = lemmas.ignorance_retention(args.n, args.trials, args.seed)
    elif args.lemma == "nest-delta":
        groups = tuple((i + 1, s, 1) for i, s in enumerate(args.sizes))
        report = lemmas.nest_delta_distribution(
            lemmas.ScenarioSpec(groups, args.trials, args.seed)
        )
    elif args.lemma == "eps-init":
        report = lemmas.initial_gap_expectation(
            args.n, args.k, args.mode, args.trials, args.seed
        )
    elif args.lemma == "ratio-growth":
        report = lemmas.ratio_growth(
            args.n, args.k, args.sizes, args.trials, args.seed
        )
    else:
        report = lemmas.dropout_time(
            args.n, args.k, args.small, args.trials, args.seed
        )
    _emit(report.to_json() + "\n", _out_path(args.out, f"{report.name}.json"))
    print(f"{report.name}: {'pass' if report.passed else 'FAIL'}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_fit(args) -> int:
    rows = harness.csv_to_rows(Path(args.csv).read_text(encoding="utf-8"))
    a, b, r2 = harness.fit_scaling(rows, args.model)
    print(
        f'{{"model":"{args.model}","a":{a:.6g},"b":{b:.6g},"r_squared":{r2:.6g}}}'
    )
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (ConfigError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "lemma":
            return cmd_lemma(args)
        return cmd_fit(args)
    except (ConfigError, harness.FitError, lemmas.ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
