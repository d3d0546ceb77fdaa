"""Replicated MA/GA comparison and RPD reporting."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace

from .evolve import RunConfig, run
from .instance_io import parse_instance
from .lp_export import check_lp_solution, parse_solution
from .model import Instance, InstanceError

log = logging.getLogger(__name__)

REPORT_FIELDS = ("instance", "size", "algorithm", "best_te", "rpd", "is_reference", "mean_te", "worst_te",
                 "replications", "status")
TIME_FIELDS = ("mean_time_s", "max_time_s")
REPS_FIELDS = ("instance", "algorithm", "replication", "seed", "best_te", "rpd")


def rpd(f_ref: float, f_alg: float) -> float:
    """Relative percentage deviation of ``f_alg`` from the reference ``f_ref``."""
    if f_ref <= 0:
        raise ValueError(f"RPD reference must be positive, got {f_ref}")
    return (f_alg - f_ref) / f_ref * 100.0


@dataclass
class AlgorithmStats:
    best_te: float
    rpd: float = 0.0
    replication_te: list[float] = field(default_factory=list)
    replication_seeds: list[int] = field(default_factory=list)
    wall_times: list[float] = field(default_factory=list)

    @property
    def is_solver(self) -> bool:
        return not self.replication_te


@dataclass
class InstanceReport:
    name: str
    size: str = ""
    status: str = "ok"
    algorithms: dict[str, AlgorithmStats] = field(default_factory=dict)
    reference: float | None = None


@dataclass
class BenchReport:
    instances: list[InstanceReport] = field(default_factory=list)

    def rpd_lists(self) -> dict[str, list[float]]:
        """Per-replication RPDs pooled over instances, keyed by algorithm."""
        out: dict[str, list[float]] = {}
        for inst in self.instances:
            for alg, st in inst.algorithms.items():
                for te in st.replication_te:
                    out.setdefault(alg, []).append(rpd(inst.reference, te))
        return out

    def report_csv(self, include_times: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_FIELDS + (TIME_FIELDS if include_times else ()))
        for inst in self.instances:
            if inst.status != "ok":
                w.writerow([inst.name, inst.size, "", "", "", "", "", "", "", inst.status]
                           + (["", ""] if include_times else []))
                continue
            for alg, st in inst.algorithms.items():
                reps = st.replication_te
                row = [
                    inst.name, inst.size, alg, _num(st.best_te), f"{st.rpd:.2f}",
                    int(st.best_te == inst.reference),
                    f"{sum(reps) / len(reps):.2f}" if reps else "",
                    _num(max(reps)) if reps else "",
                    len(reps), inst.status,
                ]
                if include_times:
                    times = st.wall_times
                    row += [f"{sum(times) / len(times):.2f}", f"{max(times):.2f}"] if times else ["", ""]
                w.writerow(row)
        return buf.getvalue()

    def reps_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPS_FIELDS)
        for inst in self.instances:
            for alg, st in inst.algorithms.items():
                for r, (seed, te) in enumerate(zip(st.replication_seeds, st.replication_te)):
                    w.writerow([inst.name, alg, r, seed, _num(te), f"{rpd(inst.reference, te):.4f}"])
        return buf.getvalue()


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.6f}"


def bench(
    instances: dict[str, Instance | str],
    configs: dict[str, RunConfig],
    replications: int,
    master_seed: int = 0,
    lp_solutions: dict[str, str] | None = None,
) -> BenchReport:
    """Run every config ``replications`` times per instance.

    Replication ``r`` uses seed ``master_seed + r`` for every algorithm. The
    reference objective per instance is the best value found by any algorithm
    or by a supplied, violation-free LP solution.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    lp_solutions = lp_solutions or {}
    report = BenchReport()
    for name, source in instances.items():
        entry = InstanceReport(name)
        report.instances.append(entry)
        try:
            inst = parse_instance(source) if isinstance(source, str) else source
        except InstanceError as exc:
            entry.status = f"error: {exc}"
            log.warning("skipping %s: %s", name, exc)
            continue
        entry.size = inst.size_string()
        for alg, cfg in configs.items():
            stats = None
            for r in range(replications):
                seed = master_seed + r
                res = run(inst, replace(cfg, seed=seed))
                log.info("%s %s rep %d: TE=%d (%.2fs)", name, alg, r, res.best_te, res.wall_time)
                if stats is None:
                    stats = AlgorithmStats(res.best_te)
                stats.best_te = min(stats.best_te, res.best_te)
                stats.replication_te.append(res.best_te)
                stats.replication_seeds.append(seed)
                stats.wall_times.append(res.wall_time)
            entry.algorithms[alg] = stats
        if name in lp_solutions:
            violations = check_lp_solution(inst, lp_solutions[name])
            values = parse_solution(lp_solutions[name])
            obj = values.get("objective", values.get("obj", values.get("TE")))
            if violations or obj is None:
                log.warning("LP solution for %s rejected (%d violations)", name, len(violations))
            else:
                entry.algorithms["lp"] = AlgorithmStats(obj)
        if not entry.algorithms:
            entry.status = "error: no algorithm results"
            continue
        entry.reference = min(st.best_te for st in entry.algorithms.values())
        for st in entry.algorithms.values():
            st.rpd = rpd(entry.reference, st.best_te)
    return report
