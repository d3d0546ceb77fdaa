"""Independent feasibility checker for schedules.

The checker recomputes everything from the raw assignment rows; it never
reuses decoder state, so it can judge schedules coming from the decoder and
from external MIP solvers alike.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .engine import Assignment, Schedule
from .model import Instance, OpId, rest_time_for

KINDS = (
    "completion-arithmetic",
    "job-precedence",
    "eligibility",
    "machine-overlap",
    "setup-gap",
    "worker-overlap",
    "worker-gap",
    "assignment-cardinality",
    "negative-start",
    "makespan-mismatch",
    "objective-mismatch",
)


@dataclass(frozen=True)
class Violation:
    kind: str
    subjects: tuple[OpId, ...]
    detail: str
    amount: float = 0

    def __str__(self):
        ops = " ".join(f"O{s.job},{s.op}" for s in self.subjects)
        return f"{self.kind}\t{ops}\t{self.detail}"


def format_violations(violations: list[Violation]) -> str:
    if not violations:
        return "OK: no violations\n"
    return "".join(f"{v}\n" for v in violations)


def _proc_time(instance: Instance, a: Assignment) -> int | None:
    op = instance.operation(a.oid)
    for m in op.modes:
        if m.machine == a.machine and m.config == a.config:
            return m.proc_time
    return None


def validate(instance: Instance, sched: Schedule, *, rest_plus_move: bool = False,
             tol: float = 1e-6) -> list[Violation]:
    out: list[Violation] = []
    rows: dict[OpId, list[Assignment]] = defaultdict(list)
    for a in sched.assign:
        rows[a.oid].append(a)

    known = set(instance.op_ids())
    for oid in instance.op_ids():
        if len(rows.get(oid, ())) != 1:
            n = len(rows.get(oid, ()))
            out.append(Violation("assignment-cardinality", (oid,), f"operation assigned {n} times, expected 1", n))
    for oid in rows:
        if oid not in known:
            out.append(Violation("assignment-cardinality", (oid,), "assignment for an unknown operation", len(rows[oid])))

    proc: dict[Assignment, int | None] = {}
    energy_ok = True
    for a in sched.assign:
        if a.oid not in known:
            proc[a] = None
            continue
        pt = proc[a] = _proc_time(instance, a)
        if pt is None:
            energy_ok = False
            out.append(Violation("eligibility", (a.oid,),
                                 f"(machine {a.machine}, config {a.config}) is not a mode of the operation"))
        elif a.worker not in instance.machine_workers[a.machine]:
            energy_ok = False
            out.append(Violation("eligibility", (a.oid,),
                                 f"worker {a.worker} is not qualified for machine {a.machine}"))
        if pt is not None and abs(a.completion - (a.start + pt)) > tol:
            out.append(Violation("completion-arithmetic", (a.oid,),
                                 f"completion {a.completion} != start {a.start} + {pt}",
                                 a.completion - a.start - pt))
        if a.start < -tol:
            out.append(Violation("negative-start", (a.oid,), f"start {a.start} < 0", -a.start))

    for i, job in enumerate(instance.jobs):
        for j in range(1, len(job.ops)):
            prev, cur = rows.get(OpId(i, j - 1), ()), rows.get(OpId(i, j), ())
            if len(prev) != 1 or len(cur) != 1:
                continue
            p, c = prev[0], cur[0]
            if c.start < p.completion - tol:
                out.append(Violation("job-precedence", (p.oid, c.oid),
                                     f"starts at {c.start} before predecessor completes at {p.completion}",
                                     p.completion - c.start))

    by_machine: dict[int, list[Assignment]] = defaultdict(list)
    by_worker: dict[int, list[Assignment]] = defaultdict(list)
    for a in sched.assign:
        by_machine[a.machine].append(a)
        by_worker[a.worker].append(a)
    order = lambda a: (a.start, a.completion, a.job, a.op)  # noqa: E731

    for k in sorted(by_machine):
        seq = sorted(by_machine[k], key=order)
        for prev, nxt in zip(seq, seq[1:]):
            gap = 0
            nc = instance.machine_configs[k] if 0 <= k < instance.num_machines else 0
            if 0 <= prev.config < nc and 0 <= nxt.config < nc:
                gap = instance.setup[k][prev.config][nxt.config]
            if nxt.start < prev.completion - tol:
                out.append(Violation("machine-overlap", (prev.oid, nxt.oid),
                                     f"machine {k}: overlap of {prev.completion - nxt.start}",
                                     prev.completion - nxt.start))
            elif nxt.start < prev.completion + gap - tol:
                short = prev.completion + gap - nxt.start
                out.append(Violation("setup-gap", (prev.oid, nxt.oid),
                                     f"machine {k}: setup {gap} needs {short} more time units", short))

    for w in sorted(by_worker):
        seq = sorted(by_worker[w], key=order)
        for prev, nxt in zip(seq, seq[1:]):
            pt = proc.get(prev)
            rest = rest_time_for(instance.rest_factor, pt) if pt is not None else 0
            if prev.machine != nxt.machine:
                try:
                    gap = instance.moving[prev.machine][nxt.machine]
                except IndexError:
                    gap = 0
                if rest_plus_move:
                    gap += rest
                why = "moving"
            else:
                gap, why = rest, "rest"
            if nxt.start < prev.completion - tol:
                out.append(Violation("worker-overlap", (prev.oid, nxt.oid),
                                     f"worker {w}: overlap of {prev.completion - nxt.start}",
                                     prev.completion - nxt.start))
            elif nxt.start < prev.completion + gap - tol:
                short = prev.completion + gap - nxt.start
                out.append(Violation("worker-gap", (prev.oid, nxt.oid),
                                     f"worker {w}: {why} time {gap} needs {short} more time units", short))

    if sched.assign:
        last: dict[int, Assignment] = {}
        for a in sched.assign:
            if a.job not in last or a.op > last[a.job].op:
                last[a.job] = a
        cmax = max(a.completion for a in last.values())
        critical = tuple(sorted(a.oid for a in last.values() if a.completion == cmax))
        if abs(cmax - sched.makespan) > tol:
            out.append(Violation("makespan-mismatch", critical,
                                 f"stored makespan {sched.makespan} != recomputed {cmax}",
                                 sched.makespan - cmax))
        cardinality_ok = not any(v.kind == "assignment-cardinality" for v in out)
        if energy_ok and cardinality_ok:
            te = instance.aux_energy * cmax + sum(
                instance.operation(a.oid).energy[a.machine, a.worker] * proc[a] for a in sched.assign
            )
            if abs(te - sched.total_energy) > tol:
                out.append(Violation("objective-mismatch", critical,
                                     f"stored total energy {sched.total_energy} != recomputed {te}",
                                     sched.total_energy - te))
    return out
