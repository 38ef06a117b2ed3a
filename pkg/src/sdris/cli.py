"""Command-line front end for the experiment runners.

Subcommands: ``sweep`` (Monte-Carlo power sweep), ``converge``
(per-iteration traces), ``nmse`` (block-solver accuracy table) and
``example1`` (golden sphere-decoder check).  Output CSVs are byte-stable
for a fixed configuration and seed; wall-clock timings only enter the CSV
with --with-timings (they are always logged to stderr).
"""

import argparse
import sys
from dataclasses import replace

from . import experiments as exp


def _log(msg):
    print(msg, file=sys.stderr)


def _load_config(args, required=False):
    if args.config:
        cfg = exp.config_from_yaml(args.config)
    elif required:
        raise SystemExit("this subcommand requires --config")
    else:
        cfg = exp.config_from_dict({})
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if getattr(args, "trials_override", None):
        cfg = replace(cfg, trials=args.trials_override)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    return cfg


def cmd_sweep(args):
    cfg = _load_config(args, required=True)
    rows = exp.run_power_sweep(cfg, with_timings=args.with_timings, log=_log)
    header = exp.sweep_header(cfg.scene.users)
    exp.emit_csv([exp._row_values(r) for r in rows], cfg.out, header)
    _log(f"wrote {cfg.out}")
    return 0


def cmd_converge(args):
    cfg = _load_config(args, required=True)
    rows = exp.run_convergence_trace(cfg, log=_log)
    exp.emit_csv(rows, cfg.out, exp.CONVERGE_HEADER)
    _log(f"wrote {cfg.out}")
    return 0


def cmd_nmse(args):
    cfg = _load_config(args)
    rows, table = exp.run_nmse_table(cfg, log=_log)
    exp.emit_csv(rows, cfg.out, exp.NMSE_HEADER)
    _log(f"wrote {cfg.out}")
    return 0


def cmd_example1(args):
    rep = exp.run_example1()
    status = "PASS" if rep.passed else "FAIL"
    print(f"{status}: solution {rep.x.tolist()} residual {rep.residual_sq:g} "
          f"({rep.nodes_visited} nodes, {rep.runtime_ms:.3f} ms)")
    if not rep.passed:
        print(f"  {rep.details}")
    return 0 if rep.passed else 1


def build_parser():
    p = argparse.ArgumentParser(prog="sdris", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment configuration")
    common.add_argument("--seed", type=int, help="override the base seed")
    common.add_argument("--out", help="override the output CSV path ('-' for stdout)")

    ps = sub.add_parser("sweep", parents=[common], help="sum-rate power sweep")
    ps.add_argument("--trials-override", type=int, help="override sweep.trials")
    ps.add_argument("--with-timings", action="store_true",
                    help="record wall-clock times in the CSV (breaks byte determinism)")
    ps.set_defaults(func=cmd_sweep)

    pc = sub.add_parser("converge", parents=[common], help="per-iteration traces")
    pc.set_defaults(func=cmd_converge)

    pn = sub.add_parser("nmse", parents=[common], help="block-solver NMSE table")
    pn.set_defaults(func=cmd_nmse)

    pe = sub.add_parser("example1", help="golden sphere-decoder check")
    pe.set_defaults(func=cmd_example1)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
