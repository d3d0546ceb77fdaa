"""Command-line front end: ``rmtshop {gen,solve,bench,check,export-lp,gantt}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from .bench import bench
from .engine import schedule_from_csv, schedule_to_csv
from .evolve import RunConfig, run
from .instance_io import PRESET_SIZES, GenParams, generate_instance, parse_instance, preset, serialize_instance
from .lp_export import check_lp_solution, export_lp
from .model import InstanceError
from .plotting import boxplot_svg, gantt_svg
from .validator import format_violations, validate


def _load(args):
    """(name, instance) from a positional path or ``--preset``."""
    if getattr(args, "instance", None):
        path = Path(args.instance)
        return path.stem, parse_instance(path.read_text())
    if getattr(args, "preset", None):
        name = args.preset if isinstance(args.preset, str) else args.preset[0]
        return name.upper(), generate_instance(preset(name, seed=args.seed))
    raise SystemExit("error: give an instance file or --preset")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_config(args, algorithm: str) -> RunConfig:
    return RunConfig(
        pop_size=args.pop_size,
        cx_rate=args.cx_rate,
        mut_rate=args.mut_rate,
        ns_rate=args.ns_rate,
        max_generations=args.generations,
        time_limit=args.time_limit,
        seed=args.seed,
        algorithm=algorithm,
        rest_plus_move=args.rest_plus_move,
    )


def cmd_gen(args) -> int:
    out = _out_dir(args)
    if args.preset:
        for name in args.preset:
            inst = generate_instance(preset(name, seed=args.seed))
            path = out / f"{name.upper()}.instance"
            path.write_text(serialize_instance(inst))
            print(f"{path}\t{inst.size_string()}\t{inst.num_operations} operations")
        return 0
    if not (args.jobs and args.machines and args.workers):
        raise SystemExit("error: give --preset or all of --jobs/--machines/--workers")
    params = GenParams(num_jobs=args.jobs, num_machines=args.machines, num_workers=args.workers,
                       num_configs=args.configs, seed=args.seed)
    inst = generate_instance(params)
    path = out / (args.name or f"custom_{args.jobs}x{args.machines}x{args.workers}")
    path = path.with_suffix(".instance")
    path.write_text(serialize_instance(inst))
    print(f"{path}\t{inst.size_string()}\t{inst.num_operations} operations")
    return 0


def cmd_solve(args) -> int:
    name, inst = _load(args)
    out = _out_dir(args)
    res = run(inst, _run_config(args, args.algorithm))
    (out / "schedule.csv").write_text(schedule_to_csv(res.schedule))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("generation", "best_te"))
    w.writerows(enumerate(res.history))
    (out / "history.csv").write_text(buf.getvalue())
    (out / "gantt.svg").write_text(gantt_svg(res.schedule, inst, title=f"{name} ({args.algorithm.upper()})"))
    print(f"{name}\t{args.algorithm}\tTE={res.best_te}\tmakespan={res.schedule.makespan}"
          f"\tgenerations={res.generations}\ttime={res.wall_time:.2f}s")
    return 0


def cmd_bench(args) -> int:
    out = _out_dir(args)
    sources: dict[str, object] = {}
    for name in args.preset or []:
        sources[name.upper()] = generate_instance(preset(name, seed=args.seed))
    for path in args.instances:
        sources[Path(path).stem] = Path(path).read_text()
    if not sources:
        raise SystemExit("error: give instance files and/or --preset")
    lp = {}
    for spec in args.lp_solution or []:
        key, _, path = spec.partition("=")
        lp[key] = Path(path).read_text()
    configs = {alg: _run_config(args, alg) for alg in args.algorithm}
    report = bench(sources, configs, args.replications, master_seed=args.seed, lp_solutions=lp)
    (out / "report.csv").write_text(report.report_csv())
    (out / "rpd_reps.csv").write_text(report.reps_csv())
    lists = report.rpd_lists()
    if lists:
        (out / "boxplot.svg").write_text(boxplot_svg(lists))
    sys.stdout.write(report.report_csv())
    return 0


def cmd_check(args) -> int:
    _, inst = _load(args)
    if args.lp_solution:
        violations = check_lp_solution(inst, Path(args.lp_solution).read_text(), rest_plus_move=args.rest_plus_move)
    elif args.schedule:
        sched = schedule_from_csv(Path(args.schedule).read_text(), inst)
        violations = validate(inst, sched, rest_plus_move=args.rest_plus_move)
    else:
        raise SystemExit("error: give --schedule or --lp-solution")
    sys.stdout.write(format_violations(violations))
    return 1 if violations else 0


def cmd_export_lp(args) -> int:
    _, inst = _load(args)
    text = export_lp(inst, rest_plus_move=args.rest_plus_move)
    path = Path(args.output) if args.output else _out_dir(args) / "model.lp"
    path.write_text(text)
    print(path)
    return 0


def cmd_gantt(args) -> int:
    name, inst = _load(args)
    sched = schedule_from_csv(Path(args.schedule).read_text(), inst)
    path = Path(args.output) if args.output else _out_dir(args) / "gantt.svg"
    path.write_text(gantt_svg(sched, inst, title=name))
    print(path)
    return 0


def _add_instance_args(p, positional=True):
    if positional:
        p.add_argument("instance", nargs="?", help=".instance file")
    p.add_argument("--preset", choices=sorted(PRESET_SIZES), type=str.upper, help="generate a preset instance")


def _add_run_args(p):
    p.add_argument("--pop-size", type=int, default=100)
    p.add_argument("--cx-rate", type=float, default=0.8)
    p.add_argument("--mut-rate", type=float, default=0.3)
    p.add_argument("--ns-rate", type=float, default=0.1)
    p.add_argument("--generations", type=int, default=300)
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock cap per run, seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmtshop", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--rest-plus-move", action="store_true",
                        help="workers changing machines also rest (default: move xor rest)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write generated instances")
    p.add_argument("--preset", nargs="+", type=str.upper, choices=sorted(PRESET_SIZES))
    p.add_argument("--jobs", type=int)
    p.add_argument("--machines", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--configs", type=int, default=None, help="pin configurations per machine")
    p.add_argument("--name")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="run the MA or GA on one instance")
    _add_instance_args(p)
    p.add_argument("--algorithm", choices=("ma", "ga"), default="ma")
    _add_run_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", parents=[common], help="replicated comparison with RPD report")
    p.add_argument("instances", nargs="*", help=".instance files")
    p.add_argument("--preset", nargs="+", type=str.upper, choices=sorted(PRESET_SIZES))
    p.add_argument("--algorithm", nargs="+", choices=("ma", "ga"), default=["ma", "ga"])
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--lp-solution", action="append", metavar="NAME=PATH",
                   help="solver solution used as an extra reference for instance NAME")
    _add_run_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", parents=[common], help="validate a schedule CSV or an LP solution")
    _add_instance_args(p)
    p.add_argument("--schedule")
    p.add_argument("--lp-solution")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export-lp", parents=[common], help="write the MIP in LP format")
    _add_instance_args(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("gantt", parents=[common], help="draw a schedule CSV as SVG")
    _add_instance_args(p)
    p.add_argument("--schedule", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gantt)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InstanceError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
