"""LP-format export of the exact model and re-import of solver solutions.

Variable naming (all indices 0-based)::

    X_i_j_k_c_l   binary, operation (i, j) on machine k, config c, worker l
    St_i_j, C_i_j start / completion of operation (i, j)
    Y_a_b         binary, a before b on a shared machine   (a, b = "i_j")
    V_a_b         binary, a before b on a shared worker
    Cmax, TE      makespan and total energy

X is declared for every machine of the operation, every configuration of
that machine and every worker qualified for it; (machine, config) pairs that
are not modes of the operation are fixed to 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .engine import Assignment, Schedule
from .model import Instance, OpId, rest_time_for
from .validator import Violation, validate


class LpFormatError(ValueError):
    pass


def _op(o: OpId) -> str:
    return f"{o.job}_{o.op}"


def x_name(o: OpId, k: int, c: int, w: int) -> str:
    return f"X_{o.job}_{o.op}_{k}_{c}_{w}"


@dataclass
class Row:
    name: str
    terms: list[tuple[int, str]]
    sense: str  # "=", ">=", "<="
    rhs: int


@dataclass
class LpModel:
    objective: list[tuple[int, str]]
    rows: list[Row]
    continuous: list[str]
    binaries: list[str]
    big_u: int
    comments: list[str] = field(default_factory=list)
    x_index: dict[str, tuple[OpId, int, int, int]] = field(default_factory=dict)
    machine_pairs: list[tuple[OpId, OpId]] = field(default_factory=list)
    worker_pairs: list[tuple[OpId, OpId]] = field(default_factory=list)

    def to_text(self) -> str:
        out = [f"\\ {c}" if c else "\\" for c in self.comments]
        out.append("Minimize")
        out.extend(_expr_lines(" obj:", self.objective))
        out.append("Subject To")
        for r in self.rows:
            lines = _expr_lines(f" {r.name}:", r.terms)
            lines[-1] += f" {r.sense} {r.rhs}"
            out.extend(lines)
        out.append("Bounds")
        out.extend(f" {v} >= 0" for v in self.continuous)
        out.append("Binaries")
        for chunk in range(0, len(self.binaries), 8):
            out.append(" " + " ".join(self.binaries[chunk:chunk + 8]))
        out.append("End")
        return "\n".join(out) + "\n"


def _expr_lines(head: str, terms, per_line: int = 8) -> list[str]:
    parts = []
    for coef, var in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        parts.append(f"{sign} {var}" if mag == 1 else f"{sign} {mag} {var}")
    if not parts:
        parts = ["+ 0 Cmax"]
    lines = []
    for n in range(0, len(parts), per_line):
        chunk = " ".join(parts[n:n + per_line])
        lines.append(f"{head} {chunk}" if n == 0 else f"   {chunk}")
    return lines


def horizon_bound(instance: Instance, *, rest_plus_move: bool = False) -> int:
    """Sum over operations of longest processing, setup and worker-gap times."""
    max_setup = max(v for mat in instance.setup for row in mat for v in row)
    max_move = max(v for row in instance.moving for v in row)
    total = 0
    for oid in instance.op_ids():
        op = instance.operation(oid)
        pt = max(m.proc_time for m in op.modes)
        rest = rest_time_for(instance.rest_factor, pt)
        gap = max_move + rest if rest_plus_move else max(max_move, rest)
        total += pt + max_setup + gap
    return total


def _worker_gap(instance, k_from, k_to, pt_from, rest_plus_move):
    rest = rest_time_for(instance.rest_factor, pt_from)
    if k_from == k_to:
        return rest
    return instance.moving[k_from][k_to] + (rest if rest_plus_move else 0)


def build_lp_model(instance: Instance, *, rest_plus_move: bool = False) -> LpModel:
    ops = instance.op_ids()
    H = horizon_bound(instance, rest_plus_move=rest_plus_move)
    max_setup = max(v for mat in instance.setup for row in mat for v in row)
    max_move = max(v for row in instance.moving for v in row)
    max_rest = max(rest_time_for(instance.rest_factor, m.proc_time)
                   for o in ops for m in instance.operation(o).modes)
    max_worker_gap = max_move + max_rest if rest_plus_move else max(max_move, max_rest)
    # deactivated rows need U >= C_a + gap - St_b for any schedule within the horizon
    U = H + max(max_setup, max_worker_gap) + 1

    xvars: dict[OpId, list[tuple[str, int, int, int, int | None]]] = {}
    x_index = {}
    rows: list[Row] = []
    for o in ops:
        op = instance.operation(o)
        pts = {(m.machine, m.config): m.proc_time for m in op.modes}
        entries = []
        for k in op.machines:
            for c in range(instance.machine_configs[k]):
                for w in instance.machine_workers[k]:
                    name = x_name(o, k, c, w)
                    entries.append((name, k, c, w, pts.get((k, c))))
                    x_index[name] = (o, k, c, w)
        xvars[o] = entries

    objective = [(instance.aux_energy, "Cmax")]
    for o in ops:
        op = instance.operation(o)
        for name, k, c, w, pt in xvars[o]:
            if pt is not None:
                objective.append((op.energy[k, w] * pt, name))

    # total energy as an equality row
    rows.append(Row("te_def", [(1, "TE")] + [(-coef, v) for coef, v in objective], "=", 0))
    for o in ops:
        terms = [(1, f"C_{_op(o)}"), (-1, f"St_{_op(o)}")]
        terms += [(-pt, name) for name, _, _, _, pt in xvars[o] if pt is not None]
        rows.append(Row(f"c2_{_op(o)}", terms, "=", 0))
    for i, job in enumerate(instance.jobs):
        rows.append(Row(f"c3_{i}", [(1, "Cmax"), (-1, f"C_{i}_{len(job.ops) - 1}")], ">=", 0))
    for o in ops:
        rows.append(Row(f"c4_{_op(o)}", [(1, name) for name, *_ in xvars[o]], "=", 1))
    for o in ops:
        for name, _, _, _, pt in xvars[o]:
            if pt is None:
                rows.append(Row(f"c5_{name[2:]}", [(1, name)], "<=", 0))
    for i, job in enumerate(instance.jobs):
        for j in range(1, len(job.ops)):
            rows.append(Row(f"c6_{i}_{j}", [(1, f"St_{i}_{j}"), (-1, f"C_{i}_{j - 1}")], ">=", 0))

    machine_pairs, worker_pairs = [], []
    for a, b in itertools.combinations(ops, 2):
        oa, ob = instance.operation(a), instance.operation(b)
        ya, va = f"Y_{_op(a)}_{_op(b)}", f"V_{_op(a)}_{_op(b)}"
        sta, stb, ca, cb = f"St_{_op(a)}", f"St_{_op(b)}", f"C_{_op(a)}", f"C_{_op(b)}"
        # machine disjunction per shared machine and mode pair
        mach_rows = []
        for ma in oa.modes:
            for mb in ob.modes:
                if ma.machine != mb.machine:
                    continue
                k = ma.machine
                xa = [(-U, x_name(a, k, ma.config, w)) for w in instance.machine_workers[k]]
                xb = [(-U, x_name(b, k, mb.config, w)) for w in instance.machine_workers[k]]
                tag = f"{_op(a)}_{_op(b)}_{k}_{ma.config}_{mb.config}"
                mach_rows.append(Row(f"c8_{tag}", [(1, stb), (-1, ca)] + xa + xb + [(-U, ya)], ">=",
                                     instance.setup[k][ma.config][mb.config] - 3 * U))
                mach_rows.append(Row(f"c9_{tag}", [(1, sta), (-1, cb)] + xa + xb + [(U, ya)], ">=",
                                     instance.setup[k][mb.config][ma.config] - 2 * U))
        if mach_rows:
            machine_pairs.append((a, b))
            rows.extend(mach_rows)
        # worker disjunction per shared worker and mode pair
        work_rows = []
        for ma in oa.modes:
            for mb in ob.modes:
                shared = set(instance.machine_workers[ma.machine]) & set(instance.machine_workers[mb.machine])
                for w in sorted(shared):
                    xa = (-U, x_name(a, ma.machine, ma.config, w))
                    xb = (-U, x_name(b, mb.machine, mb.config, w))
                    g_ab = _worker_gap(instance, ma.machine, mb.machine, ma.proc_time, rest_plus_move)
                    g_ba = _worker_gap(instance, mb.machine, ma.machine, mb.proc_time, rest_plus_move)
                    tag = f"{_op(a)}_{_op(b)}_{ma.machine}_{ma.config}_{mb.machine}_{mb.config}_{w}"
                    work_rows.append(Row(f"c7f_{tag}", [(1, stb), (-1, ca), xa, xb, (-U, va)], ">=", g_ab - 3 * U))
                    work_rows.append(Row(f"c7r_{tag}", [(1, sta), (-1, cb), xa, xb, (U, va)], ">=", g_ba - 2 * U))
        if work_rows:
            worker_pairs.append((a, b))
            rows.extend(work_rows)

    continuous = ["TE", "Cmax"] + [f"{p}_{_op(o)}" for o in ops for p in ("St", "C")]
    binaries = [name for o in ops for name, *_ in xvars[o]]
    binaries += [f"Y_{_op(a)}_{_op(b)}" for a, b in machine_pairs]
    binaries += [f"V_{_op(a)}_{_op(b)}" for a, b in worker_pairs]
    comments = [
        "rmtshop MIP: minimise total energy (aux energy * makespan + operation energy)",
        f"jobs {instance.num_jobs}, machines {instance.num_machines}, workers {instance.num_workers}, U = {U}",
        "precedence rows c6 require the previous operation of the job to be complete",
        "worker rows c7f/c7r use an explicit worker-order binary V: a worker changing machines",
        "needs the moving time" + (" plus rest" if rest_plus_move else "") +
        ", a worker staying on its machine needs the rest time of the finished operation",
        "machine rows c8/c9 order operations sharing a machine with a setup between configurations",
    ]
    return LpModel(objective, rows, continuous, binaries, U, comments, x_index, machine_pairs, worker_pairs)


def export_lp(instance: Instance, *, rest_plus_move: bool = False) -> str:
    return build_lp_model(instance, rest_plus_move=rest_plus_move).to_text()


# --------------------------------------------------------------- solutions


def schedule_to_solution(instance: Instance, sched: Schedule, *, rest_plus_move: bool = False) -> str:
    """Express a schedule as ``name value`` lines over the exported variables."""
    model = build_lp_model(instance, rest_plus_move=rest_plus_move)
    chosen = {a.oid: a for a in sched.assign}
    values: dict[str, int] = {"objective": sched.total_energy, "TE": sched.total_energy, "Cmax": sched.makespan}
    for name, (o, k, c, w) in model.x_index.items():
        a = chosen[o]
        values[name] = int((a.machine, a.config, a.worker) == (k, c, w))
    for o, a in chosen.items():
        values[f"St_{_op(o)}"] = a.start
        values[f"C_{_op(o)}"] = a.completion
    order = lambda o: (chosen[o].start, chosen[o].completion, o)  # noqa: E731
    for a, b in model.machine_pairs:
        values[f"Y_{_op(a)}_{_op(b)}"] = int(order(a) < order(b))
    for a, b in model.worker_pairs:
        values[f"V_{_op(a)}_{_op(b)}"] = int(order(a) < order(b))
    return "".join(f"{k} {v}\n" for k, v in values.items())


def parse_solution(text: str) -> dict[str, float]:
    values = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "\\")):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LpFormatError(f"line {n}: expected 'name value'")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise LpFormatError(f"line {n}: bad value '{parts[1]}'") from None
    return values


def _snap(v: float, tol: float = 1e-6):
    r = round(v)
    return int(r) if abs(v - r) <= tol else v


def check_lp_solution(instance: Instance, text: str, *, rest_plus_move: bool = False,
                      tol: float = 1e-6) -> list[Violation]:
    """Rebuild a schedule from solver output and validate it."""
    values = parse_solution(text)
    model = build_lp_model(instance, rest_plus_move=rest_plus_move)
    required = list(model.x_index) + [f"St_{_op(o)}" for o in instance.op_ids()]
    missing = [name for name in required if name not in values]
    if missing:
        more = f" (+{len(missing) - 5} more)" if len(missing) > 5 else ""
        raise LpFormatError("missing variables: " + ", ".join(missing[:5]) + more)

    assign = []
    for name, (o, k, c, w) in model.x_index.items():
        if values[name] > 0.5:
            start = _snap(values[f"St_{_op(o)}"], tol)
            comp = values.get(f"C_{_op(o)}")
            if comp is None:
                try:
                    comp = start + instance.operation(o).proc_time(k, c)
                except KeyError:
                    comp = start
            assign.append(Assignment(o.job, o.op, k, c, w, start, _snap(comp, tol)))
    assign.sort(key=lambda a: (a.job, a.op, a.machine, a.config, a.worker))
    sched = Schedule(assign, 0, 0)
    if assign:
        last: dict[int, Assignment] = {}
        for a in assign:
            if a.job not in last or a.op > last[a.job].op:
                last[a.job] = a
        recomputed = max(a.completion for a in last.values())
    else:
        recomputed = 0
    sched.makespan = _snap(values["Cmax"], tol) if "Cmax" in values else recomputed
    objective = values.get("objective", values.get("obj", values.get("TE")))
    if objective is not None:
        sched.total_energy = objective
    else:
        sched.total_energy = _recompute_te(instance, assign, recomputed)
    return validate(instance, sched, rest_plus_move=rest_plus_move, tol=tol)


def _recompute_te(instance, assign, cmax):
    te = instance.aux_energy * cmax
    for a in assign:
        op = instance.operation(a.oid)
        try:
            te += op.energy[a.machine, a.worker] * op.proc_time(a.machine, a.config)
        except KeyError:
            return math.nan
    return te
