"""Reading, writing and generating ``.instance`` files.

Grammar of the ``rmtshop-instance v1`` text format (one statement per line,
``#`` starts a comment, blank lines ignored)::

    rmtshop-instance v1
    jobs <N>
    machines <M>
    workers <L>
    aux_energy <int>
    rest_factor <p>/<q>
    configs <|C_0|> ... <|C_M-1|>
    workers_of <k> : <w> ...          # exactly one line per machine
    setup <k>                         # followed by |C_k| rows of |C_k| ints
    moving                            # followed by M rows of M ints
    job <i> <n_i>                     # followed by n_i op lines
    op <j> modes <k>:<c>:<pt> ... energy <k>:<l>=<e> ...

Statements appear in the order above; jobs and their ops are listed in index
order.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .model import Instance, InstanceError, Job, Mode, Operation

HEADER = "rmtshop-instance v1"


class InstanceSyntaxError(InstanceError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class GenParamsError(ValueError):
    pass


# ---------------------------------------------------------------- serialize


def _ints(values) -> str:
    return " ".join(str(v) for v in values)


def serialize_instance(instance: Instance) -> str:
    M = instance.num_machines
    rf = instance.rest_factor
    lines = [
        HEADER,
        f"jobs {instance.num_jobs}",
        f"machines {M}",
        f"workers {instance.num_workers}",
        f"aux_energy {instance.aux_energy}",
        f"rest_factor {rf.numerator}/{rf.denominator}",
        f"configs {_ints(instance.machine_configs)}",
    ]
    for k, ws in enumerate(instance.machine_workers):
        lines.append(f"workers_of {k} : {_ints(sorted(ws))}")
    for k, mat in enumerate(instance.setup):
        lines.append(f"setup {k}")
        lines.extend("  " + _ints(row) for row in mat)
    lines.append("moving")
    lines.extend("  " + _ints(row) for row in instance.moving)
    for i, job in enumerate(instance.jobs):
        lines.append(f"job {i} {len(job.ops)}")
        for j, op in enumerate(job.ops):
            modes = " ".join(f"{m.machine}:{m.config}:{m.proc_time}" for m in op.modes)
            energy = " ".join(f"{k}:{l}={e}" for (k, l), e in sorted(op.energy.items()))
            lines.append(f"  op {j} modes {modes} energy {energy}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- parse


class _Lines:
    def __init__(self, text: str):
        self.items = []
        for n, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0].strip()
            if body:
                self.items.append((n, body.split()))
        self.pos = 0

    def next(self, what: str):
        if self.pos >= len(self.items):
            last = self.items[-1][0] if self.items else 0
            raise InstanceSyntaxError(last + 1, f"unexpected end of file, expected {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item

    def keyword(self, kw: str, nargs: int | None = None):
        n, toks = self.next(f"'{kw}'")
        if toks[0] != kw:
            raise InstanceSyntaxError(n, f"expected '{kw}', found '{toks[0]}'")
        if nargs is not None and len(toks) - 1 != nargs:
            raise InstanceSyntaxError(n, f"'{kw}' takes {nargs} value(s), got {len(toks) - 1}")
        return n, toks[1:]


def _int(n: int, tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InstanceSyntaxError(n, f"expected an integer, found '{tok}'") from None


def _int_row(lines: _Lines, width: int, what: str) -> tuple[int, ...]:
    n, toks = lines.next(what)
    if len(toks) != width:
        raise InstanceSyntaxError(n, f"{what}: expected {width} values, got {len(toks)}")
    return tuple(_int(n, t) for t in toks)


def parse_instance(text: str) -> Instance:
    lines = _Lines(text)
    n, toks = lines.next("header")
    if " ".join(toks) != HEADER:
        raise InstanceSyntaxError(n, f"missing header '{HEADER}'")

    n, (v,) = lines.keyword("jobs", 1)
    num_jobs = _int(n, v)
    n, (v,) = lines.keyword("machines", 1)
    M = _int(n, v)
    n, (v,) = lines.keyword("workers", 1)
    L = _int(n, v)
    n, (v,) = lines.keyword("aux_energy", 1)
    aux = _int(n, v)
    n, (v,) = lines.keyword("rest_factor", 1)
    try:
        rest_factor = Fraction(v)
    except (ValueError, ZeroDivisionError):
        raise InstanceSyntaxError(n, f"bad rest_factor '{v}'") from None
    n, vals = lines.keyword("configs", M)
    configs = tuple(_int(n, t) for t in vals)

    workers = []
    for k in range(M):
        n, vals = lines.keyword("workers_of")
        if len(vals) < 2 or vals[1] != ":" or _int(n, vals[0]) != k:
            raise InstanceSyntaxError(n, f"expected 'workers_of {k} : <workers>'")
        workers.append(tuple(sorted(_int(n, t) for t in vals[2:])))

    setup = []
    for k in range(M):
        n, vals = lines.keyword("setup", 1)
        if _int(n, vals[0]) != k:
            raise InstanceSyntaxError(n, f"expected 'setup {k}'")
        if configs[k] < 1:
            raise InstanceSyntaxError(n, f"machine {k} needs at least one configuration")
        setup.append(tuple(_int_row(lines, configs[k], f"setup row of machine {k}") for _ in range(configs[k])))

    lines.keyword("moving", 0)
    moving = tuple(_int_row(lines, M, "moving row") for _ in range(M))

    jobs = []
    for i in range(num_jobs):
        n, vals = lines.keyword("job", 2)
        if _int(n, vals[0]) != i:
            raise InstanceSyntaxError(n, f"expected 'job {i}'")
        ops = []
        for j in range(_int(n, vals[1])):
            ops.append(_parse_op(lines, j))
        jobs.append(Job(tuple(ops)))

    if lines.pos != len(lines.items):
        n, toks = lines.items[lines.pos]
        raise InstanceSyntaxError(n, f"trailing content '{toks[0]}'")

    return Instance(
        jobs=tuple(jobs),
        machine_configs=configs,
        machine_workers=tuple(workers),
        setup=tuple(setup),
        moving=moving,
        num_workers=L,
        aux_energy=aux,
        rest_factor=rest_factor,
    )


def _parse_op(lines: _Lines, j: int) -> Operation:
    n, toks = lines.next(f"op {j}")
    if toks[:3] != ["op", str(j), "modes"] or "energy" not in toks:
        raise InstanceSyntaxError(n, f"expected 'op {j} modes ... energy ...'")
    split = toks.index("energy")
    modes = []
    for tok in toks[3:split]:
        parts = tok.split(":")
        if len(parts) != 3:
            raise InstanceSyntaxError(n, f"bad mode '{tok}', expected machine:config:time")
        modes.append(Mode(*(_int(n, p) for p in parts)))
    energy = {}
    for tok in toks[split + 1:]:
        key, sep, val = tok.partition("=")
        parts = key.split(":")
        if not sep or len(parts) != 2:
            raise InstanceSyntaxError(n, f"bad energy entry '{tok}', expected machine:worker=rate")
        energy[(_int(n, parts[0]), _int(n, parts[1]))] = _int(n, val)
    return Operation(tuple(modes), energy)


# ---------------------------------------------------------------- generator


@dataclass(frozen=True)
class GenParams:
    num_jobs: int
    num_machines: int
    num_workers: int
    ops_per_job: tuple[int, int] = (2, 4)
    modes_per_op: tuple[int, int] | None = None  # None -> (1, min(3, M))
    proc_time: tuple[int, int] = (1, 20)
    setup_time: tuple[int, int] = (1, 5)
    moving_time: tuple[int, int] = (1, 5)
    energy: tuple[int, int] = (3, 30)
    workers_per_machine: tuple[int, int] = (1, 2)
    aux_energy: int = 5
    rest_factor: Fraction = Fraction(1, 10)
    num_configs: int | None = None  # pins |C_k| for every machine
    seed: int = 0
    name: str = field(default="", compare=False)

    def resolved_modes_per_op(self) -> tuple[int, int]:
        if self.modes_per_op is None:
            return (1, min(3, self.num_machines))
        return self.modes_per_op

    def check(self) -> None:
        for label, count in (("num_jobs", self.num_jobs), ("num_machines", self.num_machines),
                             ("num_workers", self.num_workers)):
            if count < 1:
                raise GenParamsError(f"{label} must be >= 1")
        ranges = {
            "ops_per_job": self.ops_per_job,
            "modes_per_op": self.resolved_modes_per_op(),
            "proc_time": self.proc_time,
            "setup_time": self.setup_time,
            "moving_time": self.moving_time,
            "energy": self.energy,
            "workers_per_machine": self.workers_per_machine,
        }
        for label, (lo, hi) in ranges.items():
            if hi < 1 or lo > hi or lo < 0:
                raise GenParamsError(f"{label} range [{lo}, {hi}] is empty or has no positive upper bound")
        for label in ("ops_per_job", "modes_per_op", "proc_time", "workers_per_machine"):
            if ranges[label][0] < 1:
                raise GenParamsError(f"{label} lower bound must be >= 1")
        if self.num_configs is not None and self.num_configs < 1:
            raise GenParamsError("num_configs must be >= 1")
        if self.aux_energy < 0 or not 0 <= self.rest_factor <= 1:
            raise GenParamsError("aux_energy must be >= 0 and rest_factor in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise GenParamsError("seed must be a 64-bit unsigned integer")


def config_count_range(num_machines: int) -> tuple[int, int]:
    """Bounds for the per-machine configuration count, [m/4, m/2] rounded inward."""
    lo = max(1, math.ceil(num_machines / 4))
    hi = max(1, num_machines // 2)
    return lo, max(lo, hi)


def generate_instance(params: GenParams) -> Instance:
    params.check()
    rng = random.Random(params.seed)
    N, M, L = params.num_jobs, params.num_machines, params.num_workers

    if params.num_configs is not None:
        configs = (params.num_configs,) * M
    else:
        lo, hi = config_count_range(M)
        configs = tuple(rng.randint(lo, hi) for _ in range(M))

    # every worker is qualified for at least one machine when L <= M
    wsets = [set() for _ in range(M)]
    for w in range(L):
        if w < M:
            wsets[w].add(w)
    for k in range(M):
        target = rng.randint(*params.workers_per_machine)
        pool = [w for w in range(L) if w not in wsets[k]]
        rng.shuffle(pool)
        while len(wsets[k]) < min(target, L) and pool:
            wsets[k].add(pool.pop())
        if not wsets[k]:
            wsets[k].add(rng.randrange(L))
    machine_workers = tuple(tuple(sorted(s)) for s in wsets)

    setup = tuple(
        tuple(
            tuple(0 if c1 == c2 else rng.randint(*params.setup_time) for c2 in range(nc))
            for c1 in range(nc)
        )
        for nc in configs
    )
    moving = [[0] * M for _ in range(M)]
    for a in range(M):
        for b in range(a + 1, M):
            moving[a][b] = moving[b][a] = rng.randint(*params.moving_time)

    all_modes = [(k, c) for k in range(M) for c in range(configs[k])]
    mlo, mhi = params.resolved_modes_per_op()
    jobs = []
    for _ in range(N):
        ops = []
        for _ in range(rng.randint(*params.ops_per_job)):
            count = min(rng.randint(mlo, mhi), len(all_modes))
            chosen = sorted(rng.sample(all_modes, count))
            modes = tuple(Mode(k, c, rng.randint(*params.proc_time)) for k, c in chosen)
            machines = sorted({k for k, _ in chosen})
            energy = {(k, w): rng.randint(*params.energy) for k in machines for w in machine_workers[k]}
            ops.append(Operation(modes, energy))
        jobs.append(Job(tuple(ops)))

    return Instance(
        jobs=tuple(jobs),
        machine_configs=configs,
        machine_workers=machine_workers,
        setup=setup,
        moving=tuple(tuple(r) for r in moving),
        num_workers=L,
        aux_energy=params.aux_energy,
        rest_factor=params.rest_factor,
    )


# n x m x l x c from the published benchmark table
PRESET_SIZES = {
    "E01": (5, 6, 3, 2), "E02": (5, 7, 3, 2), "E03": (6, 7, 3, 2), "E04": (7, 7, 3, 2),
    "E05": (7, 7, 3, 3), "E06": (8, 7, 3, 2), "E07": (8, 7, 3, 3), "E08": (9, 8, 4, 3),
    "E09": (10, 6, 4, 2), "E10": (10, 6, 4, 3), "E11": (11, 8, 4, 4), "E12": (12, 8, 4, 4),
    "E13": (15, 4, 5, 2), "E14": (15, 8, 6, 2), "E15": (15, 8, 6, 3), "E16": (10, 15, 8, 4),
    "E17": (20, 5, 4, 2), "E18": (20, 10, 6, 3), "E19": (20, 10, 6, 4), "E20": (20, 15, 8, 5),
}


def preset(name: str, seed: int = 0) -> GenParams:
    try:
        n, m, l, c = PRESET_SIZES[name.upper()]
    except KeyError:
        raise KeyError(f"unknown preset '{name}' (expected E01..E20)") from None
    return GenParams(num_jobs=n, num_machines=m, num_workers=l, num_configs=c, seed=seed, name=name.upper())


def with_seed(params: GenParams, seed: int) -> GenParams:
    return replace(params, seed=seed)
