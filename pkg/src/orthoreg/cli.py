"""Command-line interface.

Subcommands: gradcheck (finite-difference validation of the analytic
gradients), analyze (orthogonality diagnostics for a matrix file), train
(deterministic experiment runner producing a record CSV, per-layer MATF
checkpoints, and a manifest), and schedule-dump (coefficient plan as CSV).

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 partial result
(subset budget exceeded).
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import report, report_csv, report_text
from .backend import BACKEND
from .config import (load_dataset, parse_run_config, parse_schedule_config)
from .data import PRNG_ALGORITHM
from .errors import (ConfigError, MatrixFileError, NonFiniteLoss,
                     OrthoregError)
from .gradcheck import run_checks
from .matio import load_matrix, save_matf
from .regularizers import RegKind
from .schedule import schedule_rows
from .trainer import train

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3


def _write_or_print(text, out_path):
    if out_path:
        Path(out_path).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)


def _parse_shape(raw):
    rows, sep, cols = raw.lower().partition("x")
    if not sep:
        raise ValueError(f"shape must be ROWSxCOLS, got {raw!r}")
    r, c = int(rows), int(cols)
    if r < 1 or c < 1:
        raise ValueError(f"shape dimensions must be positive, got {raw!r}")
    return r, c


def cmd_gradcheck(args):
    try:
        shape = _parse_shape(args.shape)
    except ValueError as exc:
        print(f"error: shape: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.seeds < 1:
        print("error: seeds: must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.tol <= 0:
        print("error: tol: must be > 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        kind = RegKind.from_string(args.reg)
    except ValueError as exc:
        print(f"error: reg: {exc}", file=sys.stderr)
        return EXIT_USAGE

    results = run_checks(kind, shape, args.seeds, lam=args.reg_lambda)
    lines = ["seed,kind,shape,max_rel_err,skipped\n"]
    ok = True
    for res in results:
        lines.append(f"{res.seed},{kind.value},{shape[0]}x{shape[1]},"
                     f"{res.rel_err!r},{int(res.skipped)}\n")
        if not res.skipped and res.rel_err > args.tol:
            ok = False
    _write_or_print("".join(lines), args.out)
    checked = sum(1 for r in results if not r.skipped)
    print(f"gradcheck {kind.value}: {checked} checked, "
          f"{len(results) - checked} skipped, tol {args.tol!r}: "
          f"{'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_analyze(args):
    try:
        ks = [int(k) for k in args.ks.split(",")] if args.ks else []
    except ValueError:
        print(f"error: ks: not an integer list: {args.ks!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        w = load_matrix(args.matrix)
    except MatrixFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    n = w.shape[1]
    for k in ks:
        if not 1 <= k <= n:
            print(f"error: ks: k={k} outside [1, {n}]", file=sys.stderr)
            return EXIT_USAGE
    try:
        rep = report(w, ks)
    except OrthoregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    text = report_text(rep) if args.format == "text" else report_csv(rep)
    _write_or_print(text, args.out)
    if rep.partial:
        print("warning: subset budget exceeded; isometry constants are "
              "partial lower bounds", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _write_manifest(outdir, spec, record, model, final_stats):
    lines = [
        f"orthoreg_version: {__version__}\n",
        f"backend: {BACKEND}\n",
        f"prng: {PRNG_ALGORITHM}\n",
        f"config_sha256: {spec.config_sha256}\n",
        f"reg_kind: {spec.train.reg_kind.value}\n",
        f"seed: {spec.train.seed}\n",
        f"epochs_completed: {len(record.epochs)}\n",
    ]
    if final_stats is not None:
        lines.append(f"final_train_loss: {final_stats.train_loss!r}\n")
        lines.append(f"final_val_acc: {final_stats.val_acc!r}\n")
    for i, layer in enumerate(model.weight_layers() if model else []):
        w = layer.weight_matrix()
        lines.append(f"checkpoint_w{i}: layer_{i:02d}.matf "
                     f"({w.shape[0]}x{w.shape[1]})\n")
    lines.append("schedule:\n")
    for epoch, lam, wd in schedule_rows(spec.train.schedule,
                                        spec.train.reg_kind,
                                        spec.train.epochs):
        lines.append(f"  {epoch},{lam!r},{wd!r}\n")
    (outdir / "manifest.txt").write_text("".join(lines), encoding="ascii")


def cmd_train(args):
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config {path}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        spec = parse_run_config(text)
        if args.threads is not None:
            if args.threads < 1:
                print("error: threads: must be >= 1", file=sys.stderr)
                return EXIT_USAGE
            spec = replace(spec, train=replace(spec.train,
                                               threads=args.threads))
        train_ds, val_ds = load_dataset(spec.data)
    except (ConfigError, OrthoregError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ConfigError) else EXIT_RUNTIME

    outdir = Path(args.outdir) if args.outdir else Path(f"{path.stem}_run")
    outdir.mkdir(parents=True, exist_ok=True)

    status = EXIT_OK
    model = None
    try:
        record, model = train(spec.train, train_ds, val_ds)
    except NonFiniteLoss as exc:
        print(f"error: {exc} (partial record preserved)", file=sys.stderr)
        record = exc.record
        status = EXIT_RUNTIME
    except (OrthoregError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    (outdir / "record.csv").write_text("".join(record.csv_lines()),
                                       encoding="ascii")
    (outdir / "timings.csv").write_text("".join(record.timing_lines()),
                                        encoding="ascii")
    if model is not None:
        for i, layer in enumerate(model.weight_layers()):
            save_matf(outdir / f"layer_{i:02d}.matf", layer.weight_matrix())
    final = record.epochs[-1] if record.epochs else None
    _write_manifest(outdir, spec, record, model, final)
    print(f"run written to {outdir}", file=sys.stderr)
    return status


def cmd_schedule_dump(args):
    if args.epochs < 1:
        print("error: epochs: must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc}",
                  file=sys.stderr)
            return EXIT_RUNTIME
        try:
            sched, kind = parse_schedule_config(text)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        from .schedule import ScheduleConfig
        sched, kind = ScheduleConfig(), RegKind.NONE
    if args.reg:
        try:
            kind = RegKind.from_string(args.reg)
        except ValueError as exc:
            print(f"error: reg: {exc}", file=sys.stderr)
            return EXIT_USAGE
    lines = ["epoch,lambda,weight_decay\n"]
    lines.extend(f"{e},{lam!r},{wd!r}\n"
                 for e, lam, wd in schedule_rows(sched, kind, args.epochs))
    _write_or_print("".join(lines), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orthoreg",
        description="Orthogonality regularizers: gradient checks, matrix "
                    "diagnostics, coefficient schedules, and deterministic "
                    "training experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    g.add_argument("--reg", required=True,
                   help="regularizer kind (so, dso, selective_so, mc, srip, "
                        "sr, none)")
    g.add_argument("--shape", required=True, help="matrix shape, e.g. 6x4")
    g.add_argument("--seeds", type=int, default=100,
                   help="number of seeded trials (default 100)")
    g.add_argument("--tol", type=float, default=1e-4,
                   help="relative-error tolerance (default 1e-4)")
    g.add_argument("--reg-lambda", type=float, default=1.0,
                   help="coefficient used in the checks (default 1.0)")
    g.add_argument("--out", help="write the CSV report here instead of stdout")
    g.set_defaults(func=cmd_gradcheck)

    a = sub.add_parser("analyze", help="orthogonality report for a matrix file")
    a.add_argument("matrix", help="MATF v1 or CSV matrix file")
    a.add_argument("--ks", default="",
                   help="comma-separated isometry orders, e.g. 2,4")
    a.add_argument("--format", choices=("csv", "text"), default="csv")
    a.add_argument("--out", help="write the report here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("train", help="run a training experiment from a config")
    t.add_argument("config", help="run configuration file")
    t.add_argument("--outdir", help="output directory "
                                    "(default: <config stem>_run)")
    t.add_argument("--threads", type=int, default=None,
                   help="per-layer regularizer fan-out (default 1, "
                        "deterministic either way)")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("schedule-dump",
                       help="emit the coefficient plan as CSV")
    s.add_argument("config", nargs="?", help="optional config file")
    s.add_argument("--epochs", type=int, required=True)
    s.add_argument("--reg", help="regularizer kind override for the "
                                 "weight-decay plan")
    s.add_argument("--out", help="write the CSV here instead of stdout")
    s.set_defaults(func=cmd_schedule_dump)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
