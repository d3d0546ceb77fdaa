"""Three-layer chromosome decoding and total-energy evaluation."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

from .model import Instance, OpId, rest_time_for


class EncodingError(ValueError):
    """A chromosome breaks the OS multiset or the CS/WS eligibility invariant."""


class EnergyDataError(ValueError):
    pass


@dataclass(frozen=True)
class Chromosome:
    os: tuple[int, ...]
    cs: tuple[tuple[int, int], ...]
    ws: tuple[int, ...]

    def key(self):
        return (self.os, self.cs, self.ws)


class Assignment(NamedTuple):
    job: int
    op: int
    machine: int
    config: int
    worker: int
    start: int
    completion: int

    @property
    def oid(self) -> OpId:
        return OpId(self.job, self.op)


@dataclass
class Schedule:
    assign: list[Assignment]
    makespan: int
    total_energy: int

    @property
    def machine_timeline(self) -> dict[int, list[Assignment]]:
        return _timeline(self.assign, 2)

    @property
    def worker_timeline(self) -> dict[int, list[Assignment]]:
        return _timeline(self.assign, 4)

    def by_op(self) -> dict[OpId, Assignment]:
        return {a.oid: a for a in self.assign}


def _timeline(assign, field_index):
    out: dict[int, list[Assignment]] = {}
    for a in assign:
        out.setdefault(a[field_index], []).append(a)
    for entries in out.values():
        entries.sort(key=lambda a: (a.start, a.completion, a.job, a.op))
    return dict(sorted(out.items()))


class Tables:
    """Flat lookup tables for the decoder hot loop, built once per instance."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.num_jobs = instance.num_jobs
        self.num_machines = instance.num_machines
        self.num_workers = instance.num_workers
        self.ops_per_job = instance.ops_per_job
        self.offsets = []
        total = 0
        for n in self.ops_per_job:
            self.offsets.append(total)
            total += n
        self.num_ops = total
        self.op_ids = instance.op_ids()
        self.job_of = [oid.job for oid in self.op_ids]
        self.proc = []
        self.energy = []
        self.modes = []
        self.triples = []
        for oid in self.op_ids:
            op = instance.operation(oid)
            self.proc.append({(m.machine, m.config): m.proc_time for m in op.modes})
            self.energy.append(dict(op.energy))
            self.modes.append(sorted((m.machine, m.config) for m in op.modes))
            self.triples.append(sorted(
                (m.machine, m.config, w) for m in op.modes for w in instance.machine_workers[m.machine]
            ))
        self.workers = [tuple(ws) for ws in instance.machine_workers]
        self.worker_sets = [frozenset(ws) for ws in instance.machine_workers]
        self.setup = [[list(row) for row in mat] for mat in instance.setup]
        self.moving = [list(row) for row in instance.moving]
        self.rest_factor = instance.rest_factor
        self.aux_energy = instance.aux_energy
        self.job_multiset = Counter({i: n for i, n in enumerate(self.ops_per_job)})
        self._rest_cache: dict[int, int] = {}

    def rest(self, proc_time: int) -> int:
        r = self._rest_cache.get(proc_time)
        if r is None:
            r = self._rest_cache[proc_time] = rest_time_for(self.rest_factor, proc_time)
        return r


def tables(instance: Instance) -> Tables:
    t = instance.__dict__.get("_tables")
    if t is None:
        t = Tables(instance)
        object.__setattr__(instance, "_tables", t)
    return t


def check_chromosome(instance: Instance, chrom: Chromosome) -> None:
    t = tables(instance)
    if len(chrom.os) != t.num_ops or len(chrom.cs) != t.num_ops or len(chrom.ws) != t.num_ops:
        raise EncodingError(f"every layer must have length {t.num_ops}")
    counts = Counter(chrom.os)
    if counts != t.job_multiset:
        for pos, i in enumerate(chrom.os):
            if not 0 <= i < t.num_jobs or counts[i] != t.ops_per_job[i]:
                raise EncodingError(f"os position {pos}: job {i} occurs {counts[i]} times")
        raise EncodingError("os does not hold every job's operation count")
    for p in range(t.num_ops):
        mode = tuple(chrom.cs[p])
        if mode not in t.proc[p]:
            raise EncodingError(f"cs position {p}: {mode} is not a mode of operation {tuple(t.op_ids[p])}")
        if chrom.ws[p] not in t.worker_sets[mode[0]]:
            raise EncodingError(f"ws position {p}: worker {chrom.ws[p]} cannot run machine {mode[0]}")


def _simulate(t: Tables, chrom: Chromosome, rest_plus_move: bool, record: list | None) -> tuple[int, int]:
    os, cs, ws = chrom.os, chrom.cs, chrom.ws
    offsets, proc, energy = t.offsets, t.proc, t.energy
    setup, moving = t.setup, t.moving
    job_next = [0] * t.num_jobs
    job_ready = [0] * t.num_jobs
    mach_end = [0] * t.num_machines
    mach_cfg = [-1] * t.num_machines
    work_end = [0] * t.num_workers
    work_mach = [-1] * t.num_workers
    work_rest = [0] * t.num_workers
    op_energy = 0
    cmax = 0
    for i in os:
        j = job_next[i]
        job_next[i] = j + 1
        p = offsets[i] + j
        k, c = cs[p]
        w = ws[p]
        pt = proc[p][k, c]
        start = job_ready[i]
        prev_cfg = mach_cfg[k]
        if prev_cfg >= 0:
            ready = mach_end[k] + setup[k][prev_cfg][c]
            if ready > start:
                start = ready
        prev_mach = work_mach[w]
        if prev_mach >= 0:
            if prev_mach != k:
                ready = work_end[w] + moving[prev_mach][k]
                if rest_plus_move:
                    ready += work_rest[w]
            else:
                ready = work_end[w] + work_rest[w]
            if ready > start:
                start = ready
        end = start + pt
        job_ready[i] = end
        mach_end[k] = end
        mach_cfg[k] = c
        work_end[w] = end
        work_mach[w] = k
        work_rest[w] = t.rest(pt)
        op_energy += energy[p][k, w] * pt
        if end > cmax:
            cmax = end
        if record is not None:
            record.append(Assignment(i, j, k, c, w, start, end))
    return cmax, op_energy


def decode(instance: Instance, chrom: Chromosome, *, rest_plus_move: bool = False) -> Schedule:
    """Greedy semi-active decoding of ``chrom`` in OS order.

    Each operation starts at the latest of its job predecessor's completion,
    its machine's completion plus setup, and its worker's completion plus
    either moving time (machine change) or rest time (same machine).
    """
    check_chromosome(instance, chrom)
    t = tables(instance)
    record: list[Assignment] = []
    cmax, op_energy = _simulate(t, chrom, rest_plus_move, record)
    record.sort(key=lambda a: (a.job, a.op))
    return Schedule(record, cmax, t.aux_energy * cmax + op_energy)


def evaluate(instance: Instance, chrom: Chromosome, *, rest_plus_move: bool = False) -> int:
    """Total energy of the decoded schedule, skipping validation and bookkeeping."""
    t = tables(instance)
    cmax, op_energy = _simulate(t, chrom, rest_plus_move, None)
    return t.aux_energy * cmax + op_energy


def makespan(sched: Schedule) -> int:
    if not sched.assign:
        raise ValueError("makespan of an empty schedule")
    last: dict[int, Assignment] = {}
    for a in sched.assign:
        if a.job not in last or a.op > last[a.job].op:
            last[a.job] = a
    return max(a.completion for a in last.values())


def total_energy(instance: Instance, sched: Schedule) -> int:
    """AE * makespan + sum of energy rate * processing time over operations."""
    total = instance.aux_energy * makespan(sched)
    for a in sched.assign:
        op = instance.operation(a.oid)
        try:
            rate = op.energy[a.machine, a.worker]
        except KeyError:
            raise EnergyDataError(
                f"operation {(a.job, a.op)} has no energy rate for machine {a.machine}, worker {a.worker}"
            ) from None
        total += rate * op.proc_time(a.machine, a.config)
    return total


# ------------------------------------------------------------------ CSV I/O

SCHEDULE_FIELDS = ("job", "op", "machine", "config", "worker", "start", "completion")


def schedule_to_csv(sched: Schedule) -> str:
    buf = io.StringIO()
    buf.write(f"# makespan={sched.makespan}\n# total_energy={sched.total_energy}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCHEDULE_FIELDS)
    for a in sorted(sched.assign, key=lambda a: (a.job, a.op)):
        writer.writerow(a)
    return buf.getvalue()


def schedule_from_csv(text: str, instance: Instance | None = None) -> Schedule:
    """Parse :func:`schedule_to_csv` output.

    Missing ``makespan``/``total_energy`` comments are recomputed, the latter
    only when ``instance`` is given.
    """
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = int(val)
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    if tuple(reader.fieldnames or ()) != SCHEDULE_FIELDS:
        raise ValueError(f"schedule CSV header must be {','.join(SCHEDULE_FIELDS)}")
    assign = [Assignment(*(int(row[f]) for f in SCHEDULE_FIELDS)) for row in reader]
    sched = Schedule(assign, 0, 0)
    sched.makespan = meta.get("makespan", makespan(sched) if assign else 0)
    if "total_energy" in meta:
        sched.total_energy = meta["total_energy"]
    elif instance is not None:
        sched.total_energy = total_energy(instance, sched)
    return sched
