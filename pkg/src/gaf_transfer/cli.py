"""Command line: ``gaf-tl {gaf-render,similarity,select,experiment,report}``.

Exit codes: 0 success, 2 usage/configuration error, 3 data error,
4 numerical failure. Payloads go to stdout, diagnostics to stderr.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import gaf as gaf_mod
from . import model as nn
from .data import load_manifest, split_train_test
from .errors import ConfigError, GafTLError, SelectionError
from .pipeline import (
    EXPERIMENTS,
    ExperimentConfig,
    ExperimentReport,
    Trainer,
    compare_gaf_vs_baseline,
    pools,
    render_comparison,
    render_report,
    run_experiment,
    select_for,
)
from .selection import select_multi, select_single
from .similarity import BASELINE_SPECS, GAF_SPECS, Function, SimilaritySpec, evaluate, score_record

EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GAF_TL_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"GAF_TL_SEED must be an integer, got {env!r}") from None


def _target(args, manifest):
    target = args.target or manifest.target
    if target is None:
        raise ConfigError("no --target given and no manifest entry is marked target")
    return manifest[target].ticker


def _spec(args):
    return SimilaritySpec.of(args.function, gaf=args.gaf)


def cmd_gaf_render(args):
    manifest = load_manifest(args.manifest)
    series = manifest[args.ticker]
    train = split_train_test(series).train.closes
    image = gaf_mod.gaf_to_image(gaf_mod.gasf_from_series(train))
    out = Path(args.out) if args.out else Path(args.output_dir) / f"{args.ticker}.pgm"
    out.parent.mkdir(parents=True, exist_ok=True)
    gaf_mod.export_image(image, out)
    print(str(out))


def cmd_similarity(args):
    manifest = load_manifest(args.manifest)
    spec = _spec(args)
    target = _target(args, manifest)
    sources = args.source or [t for t in manifest.tickers() if t != target]
    records = []
    for ticker in sources:
        try:
            score = evaluate(spec, manifest[ticker], manifest[target])
        except GafTLError as exc:
            raise SelectionError(ticker, exc) from exc
        records.append(score_record(spec, ticker, target, score))
    print(json.dumps(records, indent=2))


def cmd_select(args):
    manifest = load_manifest(args.manifest)
    spec = _spec(args)
    target = _target(args, manifest)
    if args.experiment:
        result = select_for(args.experiment, spec, manifest, target, args.jobs)
    else:
        pool = pools(manifest, target)[args.pool]
        select = select_multi if args.multi else select_single
        result = select(pool, manifest[target], spec, args.jobs)
    print(json.dumps(result.to_dict(), indent=2))


def _specs_for(args, gaf):
    specs = GAF_SPECS if gaf else BASELINE_SPECS
    if args.functions:
        wanted = {Function(f.lower()) for f in args.functions}
        specs = tuple(s for s in specs if s.function in wanted)
    return specs


def _config(args, eid, target, seed, gaf):
    return ExperimentConfig(
        experiment_id=eid,
        target=target,
        specs=_specs_for(args, gaf),
        kinds=tuple(args.models),
        seed=seed,
        pretrain=nn.TrainConfig(epochs=args.epochs, learning_rate=nn.PRETRAIN_LR),
        finetune=nn.TrainConfig(epochs=args.epochs, learning_rate=nn.FINETUNE_LR),
        hidden=args.hidden,
        dtype=args.dtype,
    )


def cmd_experiment(args):
    manifest = load_manifest(args.manifest)
    target = _target(args, manifest)
    seed = _seed(args)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = sorted(EXPERIMENTS) if args.all else [args.id]
    variants = {"baseline": [False], "gaf": [True], "both": [False, True]}[args.variant]
    if args.all:
        variants = [False, True]
    trainer = None
    written = []
    for eid in ids:
        reports = {}
        for gaf in variants:
            cfg = _config(args, eid, target, seed, gaf)
            if not cfg.specs:
                continue
            if trainer is None:
                trainer = Trainer(manifest, target, seed, cfg.pretrain, cfg.finetune, cfg.hidden, cfg.dtype)
            report = run_experiment(cfg, manifest, args.jobs, trainer)
            reports[gaf] = report
            stem = f"experiment{eid}_{'gaf' if gaf else 'baseline'}"
            (out_dir / f"{stem}.json").write_text(report.to_json(), encoding="utf-8")
            (out_dir / f"{stem}.md").write_text(render_report(report), encoding="utf-8")
            written += [out_dir / f"{stem}.json", out_dir / f"{stem}.md"]
        if len(reports) == 2:
            summary = compare_gaf_vs_baseline(reports[False], reports[True])
            (out_dir / f"experiment{eid}_comparison.json").write_text(
                json.dumps(summary, indent=2) + "\n", encoding="utf-8"
            )
            (out_dir / f"experiment{eid}_comparison.md").write_text(render_comparison(summary), encoding="utf-8")
            written += [out_dir / f"experiment{eid}_comparison.json", out_dir / f"experiment{eid}_comparison.md"]
    for path in written:
        print(str(path))


def cmd_report(args):
    report = ExperimentReport.from_json(Path(args.input).read_text(encoding="utf-8"))
    if args.compare:
        gaf = ExperimentReport.from_json(Path(args.compare).read_text(encoding="utf-8"))
        summary = compare_gaf_vs_baseline(report, gaf)
        if args.format == "json":
            sys.stdout.write(json.dumps(summary, indent=2) + "\n")
        else:
            sys.stdout.write(render_comparison(summary))
        return
    sys.stdout.write(render_report(report, args.format))


def build_parser():
    parser = _Parser(prog="gaf-tl", description="GAF-based source selection for time-series transfer learning")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, target=True):
        p.add_argument("--manifest", required=True, help="JSON manifest of price CSVs")
        if target:
            p.add_argument("--target", help="target ticker (default: manifest entry marked target)")

    p = sub.add_parser("gaf-render", help="write the GASF image of a series' training split as PGM")
    common(p, target=False)
    p.add_argument("--ticker", required=True)
    p.add_argument("--out", help="output .pgm path")
    p.add_argument("--output-dir", default=".", help="directory used when --out is not given")
    p.set_defaults(func=cmd_gaf_render)

    def spec_args(p):
        p.add_argument("--function", required=True, type=str.lower, choices=[f.value for f in Function])
        p.add_argument("--gaf", action="store_true", help="compare GAF matrices/images instead of raw series")

    p = sub.add_parser("similarity", help="score candidate sources against the target")
    common(p)
    spec_args(p)
    p.add_argument("--source", action="append", help="source ticker (repeatable; default: all others)")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("select", help="choose source domain(s) for the target")
    common(p)
    spec_args(p)
    how = p.add_mutually_exclusive_group()
    how.add_argument("--single", action="store_true", help="one source (default)")
    how.add_argument("--multi", action="store_true", help="two sources from one pool")
    how.add_argument("--experiment", type=int, choices=sorted(EXPERIMENTS),
                     help="use the selection rule of experiment 1-5 instead")
    p.add_argument("--pool", choices=["bank", "other"], default="bank")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("experiment", help="run experiments and write JSON + Markdown reports")
    common(p)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--id", type=int, choices=sorted(EXPERIMENTS))
    which.add_argument("--all", action="store_true", help="all five experiments, baseline and GAF")
    p.add_argument("--variant", choices=["baseline", "gaf", "both"], default="both")
    p.add_argument("--seed", type=int, help="default: $GAF_TL_SEED or 0")
    p.add_argument("--output-dir", default="reports")
    p.add_argument("--functions", nargs="+", type=str.lower, choices=[f.value for f in Function],
                   help="restrict to these similarity functions")
    p.add_argument("--models", nargs="+", type=nn.Kind, choices=list(nn.Kind), default=list(nn.Kind),
                   metavar="{dnn,lstm}")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--hidden", type=int, default=nn.HIDDEN)
    p.add_argument("--dtype", choices=["float32", "float64"], default="float32")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="render a saved report JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["markdown", "json"], default="markdown")
    p.add_argument("--compare", help="GAF report JSON to compare the input (baseline) against")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            parser.error("--jobs must be >= 1")
        if getattr(args, "epochs", 1) < 1:
            parser.error("--epochs must be >= 1")
        if getattr(args, "hidden", 1) < 1:
            parser.error("--hidden must be >= 1")
    except SystemExit as exc:
        return exc.code
    try:
        args.func(args)
    except GafTLError as exc:
        print(f"error: {type(getattr(exc, 'cause', exc)).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
