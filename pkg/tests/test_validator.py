import math
import random

import pytest

from rmtshop.engine import Assignment, Chromosome, Schedule, decode
from rmtshop.evolve import random_chromosome
from rmtshop.instance_io import generate_instance
from rmtshop.validator import format_violations, validate

from conftest import single_machine_instance, small_params


def brute_force_feasible(inst, sched):
    """Pairwise constraint check written without timelines or sorting."""
    rows = sched.assign
    ids = [(a.job, a.op) for a in rows]
    if sorted(ids) != sorted((o.job, o.op) for o in inst.op_ids()):
        return False
    pt = {}
    for a in rows:
        modes = {(m.machine, m.config): m.proc_time for m in inst.jobs[a.job].ops[a.op].modes}
        if (a.machine, a.config) not in modes or a.worker not in inst.machine_workers[a.machine]:
            return False
        pt[a] = modes[a.machine, a.config]
        if a.completion != a.start + pt[a] or a.start < 0:
            return False
    at = {(a.job, a.op): a for a in rows}
    for a in rows:
        if a.op > 0 and a.start < at[a.job, a.op - 1].completion:
            return False

    def between(a, b, same):
        return any(same(x) and a.start < x.start < b.start for x in rows if x is not a and x is not b)

    for a in rows:
        for b in rows:
            if a is b or a.start > b.start or (a.start == b.start and (a.job, a.op) > (b.job, b.op)):
                continue
            # a runs no later than b
            if a.machine == b.machine:
                gap = 0
                if not between(a, b, lambda x: x.machine == a.machine):
                    gap = inst.setup[a.machine][a.config][b.config]
                if b.start < a.completion + gap:
                    return False
            if a.worker == b.worker:
                gap = 0
                if not between(a, b, lambda x: x.worker == a.worker):
                    if a.machine != b.machine:
                        gap = inst.moving[a.machine][b.machine]
                    else:
                        gap = math.ceil(inst.rest_factor * pt[a])
                if b.start < a.completion + gap:
                    return False
    last = {}
    for a in rows:
        last[a.job] = max(last.get(a.job, a), a, key=lambda r: r.op)
    cmax = max(r.completion for r in last.values())
    te = inst.aux_energy * cmax + sum(inst.jobs[a.job].ops[a.op].energy[a.machine, a.worker] * pt[a] for a in rows)
    return cmax == sched.makespan and te == sched.total_energy


def recompute_objective(inst, rows):
    from rmtshop.engine import makespan, total_energy

    s = Schedule(rows, 0, 0)
    s.makespan = makespan(s)
    try:
        s.total_energy = total_energy(inst, s)
    except (ValueError, KeyError):
        pass
    return s


def test_decoded_fixture_is_clean(sample, sample_chromosome):
    assert validate(sample, decode(sample, sample_chromosome)) == []
    assert format_violations([]) == "OK: no violations\n"


def test_ineligible_worker_gives_one_violation():
    inst = single_machine_instance([[[(0, 4)]]], workers=(0,), num_workers=2)
    sched = Schedule([Assignment(0, 0, 0, 0, 1, 0, 4)], 4, 0)
    out = validate(inst, sched)
    assert [v.kind for v in out] == ["eligibility"]
    assert out[0].subjects == ((0, 0),)


def test_violations_carry_magnitudes():
    inst = single_machine_instance([[[(0, 10)]], [[(1, 4)]]], configs=2, setup=((0, 3), (3, 0)),
                                   workers=(0, 1), num_workers=2)
    overlap = Schedule([Assignment(0, 0, 0, 0, 0, 0, 10), Assignment(1, 0, 0, 1, 1, 8, 12)], 12, 0)
    kinds = {v.kind: v for v in validate(inst, overlap)}
    assert kinds["machine-overlap"].amount == 2
    short = Schedule([Assignment(0, 0, 0, 0, 0, 0, 10), Assignment(1, 0, 0, 1, 1, 11, 15)], 15, 0)
    kinds = {v.kind: v for v in validate(inst, short)}
    assert kinds["setup-gap"].amount == 2
    assert "objective-mismatch" in kinds


def test_worker_gap_and_cardinality():
    inst = single_machine_instance([[[(0, 10)], [(0, 10)]]])
    tight = Schedule([Assignment(0, 0, 0, 0, 0, 0, 10), Assignment(0, 1, 0, 0, 0, 10, 20)], 20, 20)
    assert [v.kind for v in validate(inst, tight)] == ["worker-gap"]
    dup = Schedule([Assignment(0, 0, 0, 0, 0, 0, 10)] * 2 + [Assignment(0, 1, 0, 0, 0, 11, 21)], 21, 0)
    kinds = [v.kind for v in validate(inst, dup)]
    assert "assignment-cardinality" in kinds
    missing = Schedule([Assignment(0, 0, 0, 0, 0, 0, 10)], 10, 10)
    assert [v.kind for v in validate(inst, missing)] == ["assignment-cardinality"]


def test_every_violation_names_an_operation(sample, sample_chromosome):
    s = decode(sample, sample_chromosome)
    broken = Schedule([a._replace(start=a.start - 3) for a in s.assign], s.makespan + 1, s.total_energy + 5)
    out = validate(sample, broken)
    assert out
    assert all(v.subjects for v in out)
    assert len(format_violations(out).splitlines()) == len(out)


def test_validate_does_not_mutate(sample, sample_chromosome):
    s = decode(sample, sample_chromosome)
    before = (list(s.assign), s.makespan, s.total_energy)
    validate(sample, s)
    validate(sample, s)
    assert (list(s.assign), s.makespan, s.total_energy) == before


def perturb(inst, sched, rng):
    rows = list(sched.assign)
    i = rng.randrange(len(rows))
    a = rows[i]
    kind = rng.randrange(4)
    if kind == 0:
        d = rng.choice([-3, -2, -1, 1, 2])
        rows[i] = a._replace(start=a.start + d, completion=a.completion + d)
    elif kind == 1:
        rows[i] = a._replace(worker=rng.randrange(inst.num_workers))
    elif kind == 2:
        m = rng.choice(inst.operation(a.oid).modes)
        rows[i] = a._replace(machine=m.machine, config=m.config, completion=a.start + m.proc_time)
    else:
        j = rng.randrange(len(rows))
        b = rows[j]
        rows[i], rows[j] = a._replace(start=b.start, completion=b.start + a.completion - a.start), \
            b._replace(start=a.start, completion=a.start + b.completion - b.start)
    return recompute_objective(inst, rows)


@pytest.mark.parametrize("seed", range(40))
def test_agrees_with_brute_force_on_perturbations(seed):
    rng = random.Random(seed)
    inst = generate_instance(small_params(seed))
    flagged = clean = 0
    for _ in range(25):
        sched = decode(inst, random_chromosome(inst, rng))
        assert brute_force_feasible(inst, sched)
        bad = perturb(inst, sched, rng)
        expected = brute_force_feasible(inst, bad)
        assert (validate(inst, bad) == []) == expected
        flagged += not expected
        clean += expected
    assert flagged > 0
