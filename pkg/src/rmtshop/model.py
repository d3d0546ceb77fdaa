"""Domain types for the reconfigurable-machine flexible job shop.

All identifiers (jobs, operations, machines, configurations, workers) are
0-based integers. Times and energies are integers; ``rest_factor`` is a
:class:`fractions.Fraction` so rest durations are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple


class InstanceError(ValueError):
    """An instance violates one of its structural invariants."""


class OpId(NamedTuple):
    job: int
    op: int


class Mode(NamedTuple):
    machine: int
    config: int
    proc_time: int


@dataclass(frozen=True)
class Operation:
    modes: tuple[Mode, ...]
    # (machine, worker) -> energy rate per time unit
    energy: dict[tuple[int, int], int] = field(hash=False)

    @property
    def machines(self) -> tuple[int, ...]:
        return tuple(sorted({m.machine for m in self.modes}))

    def proc_time(self, machine: int, config: int) -> int:
        for m in self.modes:
            if m.machine == machine and m.config == config:
                return m.proc_time
        raise KeyError((machine, config))


@dataclass(frozen=True)
class Job:
    ops: tuple[Operation, ...]


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    machine_configs: tuple[int, ...]
    machine_workers: tuple[tuple[int, ...], ...]
    setup: tuple[tuple[tuple[int, ...], ...], ...]
    moving: tuple[tuple[int, ...], ...]
    num_workers: int
    aux_energy: int = 0
    rest_factor: Fraction = Fraction(1, 10)

    def __post_init__(self):
        object.__setattr__(self, "rest_factor", Fraction(self.rest_factor))
        self.validate()

    @property
    def num_jobs(self) -> int:
        return len(self.jobs)

    @property
    def num_machines(self) -> int:
        return len(self.machine_configs)

    @property
    def num_operations(self) -> int:
        return sum(len(j.ops) for j in self.jobs)

    @property
    def ops_per_job(self) -> tuple[int, ...]:
        return tuple(len(j.ops) for j in self.jobs)

    def operation(self, oid: OpId) -> Operation:
        return self.jobs[oid.job].ops[oid.op]

    def op_ids(self) -> list[OpId]:
        """All operations in canonical (job-major) order."""
        return [OpId(i, j) for i, job in enumerate(self.jobs) for j in range(len(job.ops))]

    def size_string(self) -> str:
        return "{}x{}x{}x{}".format(
            self.num_jobs, self.num_machines, self.num_workers, max(self.machine_configs)
        )

    def validate(self) -> None:
        M, L = self.num_machines, self.num_workers
        if not self.jobs:
            raise InstanceError("instance has no jobs")
        if M < 1 or L < 1:
            raise InstanceError("need at least one machine and one worker")
        if len(self.machine_workers) != M:
            raise InstanceError("machine_workers must list one worker set per machine")
        if len(self.setup) != M:
            raise InstanceError("setup must hold one matrix per machine")
        if len(self.moving) != M or any(len(row) != M for row in self.moving):
            raise InstanceError("moving matrix must be M x M")
        if self.aux_energy < 0:
            raise InstanceError("aux_energy must be nonnegative")
        if not 0 <= self.rest_factor <= 1:
            raise InstanceError("rest_factor must lie in [0, 1]")
        for k in range(M):
            nc = self.machine_configs[k]
            if nc < 1:
                raise InstanceError(f"machine {k} has no configurations")
            ws = self.machine_workers[k]
            if not ws:
                raise InstanceError(f"empty worker set W_{k}")
            if any(not 0 <= w < L for w in ws):
                raise InstanceError(f"worker id out of range in W_{k}")
            mat = self.setup[k]
            if len(mat) != nc or any(len(row) != nc for row in mat):
                raise InstanceError(f"setup matrix of machine {k} must be {nc} x {nc}")
            for c1 in range(nc):
                if mat[c1][c1] != 0:
                    raise InstanceError(f"setup diagonal nonzero on machine {k}, config {c1}")
                if any(v < 0 for v in mat[c1]):
                    raise InstanceError(f"negative setup time on machine {k}")
            for k2 in range(M):
                if self.moving[k][k2] < 0:
                    raise InstanceError("negative moving time")
                if self.moving[k][k2] != self.moving[k2][k]:
                    raise InstanceError(f"moving matrix not symmetric at ({k}, {k2})")
            if self.moving[k][k] != 0:
                raise InstanceError(f"moving diagonal nonzero at machine {k}")
        for i, job in enumerate(self.jobs):
            if not job.ops:
                raise InstanceError(f"job {i} has no operations")
            for j, op in enumerate(job.ops):
                if not op.modes:
                    raise InstanceError(f"operation ({i}, {j}) has no eligible mode")
                seen = set()
                for m in op.modes:
                    if not 0 <= m.machine < M:
                        raise InstanceError(f"operation ({i}, {j}) references unknown machine {m.machine}")
                    if not 0 <= m.config < self.machine_configs[m.machine]:
                        raise InstanceError(f"operation ({i}, {j}) references unknown config {m.config}")
                    if m.proc_time < 1:
                        raise InstanceError(f"operation ({i}, {j}) has nonpositive processing time")
                    if (m.machine, m.config) in seen:
                        raise InstanceError(f"operation ({i}, {j}) lists mode {m.machine}:{m.config} twice")
                    seen.add((m.machine, m.config))
                expected = {(k, w) for k in op.machines for w in self.machine_workers[k]}
                if set(op.energy) != expected:
                    raise InstanceError(f"energy table of operation ({i}, {j}) must cover exactly M_ij x W_k")
                if any(e < 0 for e in op.energy.values()):
                    raise InstanceError(f"negative energy rate in operation ({i}, {j})")


def canonical_index(instance: Instance, oid: OpId) -> int:
    """Position of an operation in the CS/WS layers (job-major order)."""
    i, j = oid
    if not 0 <= i < instance.num_jobs or not 0 <= j < len(instance.jobs[i].ops):
        raise IndexError(f"operation {tuple(oid)} out of range")
    return sum(len(job.ops) for job in instance.jobs[:i]) + j


def op_at_index(instance: Instance, position: int) -> OpId:
    if position < 0:
        raise IndexError(position)
    for i, job in enumerate(instance.jobs):
        if position < len(job.ops):
            return OpId(i, position)
        position -= len(job.ops)
    raise IndexError("position out of range")


def is_eligible(instance: Instance, oid: OpId, machine: int, config: int, worker: int) -> bool:
    op = instance.jobs[oid.job].ops[oid.op]
    if not any(m.machine == machine and m.config == config for m in op.modes):
        return False
    return worker in instance.machine_workers[machine]


def eligible_triples(instance: Instance, oid: OpId) -> list[tuple[int, int, int]]:
    """Sorted (machine, config, worker) triples for which ``is_eligible`` holds."""
    op = instance.operation(oid)
    return sorted(
        (m.machine, m.config, w) for m in op.modes for w in instance.machine_workers[m.machine]
    )


def rest_time_for(rest_factor: Fraction, proc_time: int) -> int:
    return math.ceil(rest_factor * proc_time)


def rest_time(instance: Instance, oid: OpId, mode: Mode) -> int:
    """Worker rest after finishing ``oid`` in ``mode``: ceil(rest_factor * proc_time)."""
    if mode not in instance.operation(oid).modes:
        raise ValueError(f"{mode} is not a mode of operation {tuple(oid)}")
    return rest_time_for(instance.rest_factor, mode.proc_time)
