"""Memetic algorithm and GA baseline over the three-layer chromosome.

Operators take the instance and a :class:`random.Random`; they never mutate
their inputs and always return chromosomes satisfying both layer invariants.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

from .engine import Chromosome, Schedule, decode, evaluate, tables
from .model import Instance

# ------------------------------------------------------------------ helpers


def _positions_to_ops(t, os, positions) -> list[int]:
    """Canonical indices of the operations sitting at ``positions`` of ``os``."""
    wanted = set(positions)
    seen = [0] * t.num_jobs
    out = []
    for pos, i in enumerate(os):
        if pos in wanted:
            out.append(t.offsets[i] + seen[i])
        seen[i] += 1
    return out


def random_chromosome(instance: Instance, rng: random.Random) -> Chromosome:
    t = tables(instance)
    os = [i for i, n in enumerate(t.ops_per_job) for _ in range(n)]
    rng.shuffle(os)
    cs, ws = [], []
    for p in range(t.num_ops):
        k, c, w = rng.choice(t.triples[p])
        cs.append((k, c))
        ws.append(w)
    return Chromosome(tuple(os), tuple(cs), tuple(ws))


def sec_triple(instance: Instance, p: int) -> tuple[int, int, int]:
    """Smallest energy * time triple for canonical operation ``p``; ties go to the lowest triple."""
    t = tables(instance)
    return min(t.triples[p], key=lambda kcw: (t.energy[p][kcw[0], kcw[2]] * t.proc[p][kcw[0], kcw[1]], kcw))


def sec_init(instance: Instance, pop_size: int, rng: random.Random,
             random_fraction: float = 0.5) -> list[Chromosome]:
    t = tables(instance)
    sec = [sec_triple(instance, p) for p in range(t.num_ops)]
    sec_cs = tuple((k, c) for k, c, _ in sec)
    sec_ws = tuple(w for _, _, w in sec)
    n_random = int(round(pop_size * random_fraction))
    pop = []
    for idx in range(pop_size):
        if idx < pop_size - n_random:
            os = [i for i, n in enumerate(t.ops_per_job) for _ in range(n)]
            rng.shuffle(os)
            pop.append(Chromosome(tuple(os), sec_cs, sec_ws))
        else:
            pop.append(random_chromosome(instance, rng))
    return pop


# -------------------------------------------------------------- crossovers


def jbx(instance: Instance, p1: Chromosome, p2: Chromosome, rng: random.Random,
        subset=None) -> tuple[Chromosome, Chromosome]:
    """Job-based crossover; ``subset`` fixes the kept job set (drawn when None)."""
    t = tables(instance)
    if subset is None:
        if t.num_jobs < 2:
            return p1, p2
        size = rng.randint(1, t.num_jobs - 1)
        subset = rng.sample(range(t.num_jobs), size)
    keep = frozenset(subset)

    def child(a: Chromosome, b: Chromosome) -> Chromosome:
        fill = iter([g for g in b.os if g not in keep])
        os = tuple(g if g in keep else next(fill) for g in a.os)
        cs = tuple(a.cs[p] if t.job_of[p] in keep else b.cs[p] for p in range(t.num_ops))
        ws = tuple(a.ws[p] if t.job_of[p] in keep else b.ws[p] for p in range(t.num_ops))
        return Chromosome(os, cs, ws)

    return child(p1, p2), child(p2, p1)


def random_mask(length: int, rng: random.Random) -> list[int]:
    return [rng.getrandbits(1) for _ in range(length)]


def mcx(instance: Instance, p1: Chromosome, p2: Chromosome, mask, rng: random.Random):
    """Mask crossover on the CS layer; orphaned workers are repaired."""
    cs1 = tuple(b if m else a for a, b, m in zip(p1.cs, p2.cs, mask))
    cs2 = tuple(a if m else b for a, b, m in zip(p1.cs, p2.cs, mask))
    c1 = repair(instance, Chromosome(p1.os, cs1, p1.ws), rng)
    c2 = repair(instance, Chromosome(p2.os, cs2, p2.ws), rng)
    return c1, c2


def mwx(instance: Instance, p1: Chromosome, p2: Chromosome, mask, rng: random.Random):
    """Mask crossover on the WS layer."""
    ws1 = tuple(b if m else a for a, b, m in zip(p1.ws, p2.ws, mask))
    ws2 = tuple(a if m else b for a, b, m in zip(p1.ws, p2.ws, mask))
    c1 = repair(instance, Chromosome(p1.os, p1.cs, ws1), rng)
    c2 = repair(instance, Chromosome(p2.os, p2.cs, ws2), rng)
    return c1, c2


def crossover(instance: Instance, p1: Chromosome, p2: Chromosome, rng: random.Random):
    c1, c2 = jbx(instance, p1, p2, rng)
    n = len(p1.os)
    c1, c2 = mcx(instance, c1, c2, random_mask(n, rng), rng)
    return mwx(instance, c1, c2, random_mask(n, rng), rng)


def repair(instance: Instance, chrom: Chromosome, rng: random.Random) -> Chromosome:
    t = tables(instance)
    ws = None
    for p, (k, _) in enumerate(chrom.cs):
        if chrom.ws[p] not in t.worker_sets[k]:
            if ws is None:
                ws = list(chrom.ws)
            ws[p] = rng.choice(t.workers[k])
    if ws is None:
        return chrom
    return Chromosome(chrom.os, chrom.cs, tuple(ws))


# ---------------------------------------------------------------- mutations


def mutate_os(instance: Instance, chrom: Chromosome, rng: random.Random, positions=None) -> Chromosome:
    n = len(chrom.os)
    if n < 2:
        return chrom
    a, b = positions if positions is not None else rng.sample(range(n), 2)
    os = list(chrom.os)
    os[a], os[b] = os[b], os[a]
    return Chromosome(tuple(os), chrom.cs, chrom.ws)


def _subset_size(n: int, rng: random.Random) -> int:
    return rng.randint(1, max(1, math.ceil(n / 4)))


def mutate_cs(instance: Instance, chrom: Chromosome, rng: random.Random, positions=None) -> Chromosome:
    t = tables(instance)
    if positions is None:
        positions = rng.sample(range(t.num_ops), _subset_size(t.num_ops, rng))
    cs = list(chrom.cs)
    for p in positions:
        cs[p] = rng.choice(t.modes[p])
    return repair(instance, Chromosome(chrom.os, tuple(cs), chrom.ws), rng)


def mutate_ws(instance: Instance, chrom: Chromosome, rng: random.Random, positions=None) -> Chromosome:
    t = tables(instance)
    if positions is None:
        positions = rng.sample(range(t.num_ops), _subset_size(t.num_ops, rng))
    ws = list(chrom.ws)
    for p in positions:
        ws[p] = rng.choice(t.workers[chrom.cs[p][0]])
    return Chromosome(chrom.os, chrom.cs, tuple(ws))


# ------------------------------------------------------------ neighborhoods


def _redraw_changed(instance, chrom: Chromosome, new_os: list[int], rng) -> Chromosome:
    t = tables(instance)
    changed = [pos for pos, (a, b) in enumerate(zip(chrom.os, new_os)) if a != b]
    if not changed:
        return chrom
    cs, ws = list(chrom.cs), list(chrom.ws)
    for p in _positions_to_ops(t, new_os, changed):
        k, c = cs[p] = rng.choice(t.modes[p])
        ws[p] = rng.choice(t.workers[k])
    return Chromosome(tuple(new_os), tuple(cs), tuple(ws))


def n1(instance: Instance, chrom: Chromosome, rng: random.Random, positions=None) -> Chromosome:
    """Swap two OS genes of different jobs."""
    os = list(chrom.os)
    if positions is None:
        if len(set(os)) < 2:
            return chrom
        a = rng.randrange(len(os))
        b = rng.choice([q for q, g in enumerate(os) if g != os[a]])
    else:
        a, b = positions
    os[a], os[b] = os[b], os[a]
    return _redraw_changed(instance, chrom, os, rng)


def n2(instance: Instance, chrom: Chromosome, rng: random.Random, positions=None) -> Chromosome:
    """Reverse the OS segment between two positions (inclusive)."""
    os = list(chrom.os)
    if len(os) < 2:
        return chrom
    a, b = sorted(positions if positions is not None else rng.sample(range(len(os)), 2))
    os[a:b + 1] = os[a:b + 1][::-1]
    return _redraw_changed(instance, chrom, os, rng)


def n3(instance: Instance, chrom: Chromosome, rng: random.Random, positions=None) -> Chromosome:
    """Move the later of two OS genes to directly after the earlier one."""
    os = list(chrom.os)
    if len(os) < 2:
        return chrom
    a, b = sorted(positions if positions is not None else rng.sample(range(len(os)), 2))
    gene = os.pop(b)
    os.insert(a + 1, gene)
    return _redraw_changed(instance, chrom, os, rng)


NEIGHBORHOODS = (n1, n2, n3)


# ---------------------------------------------------------------------- run


@dataclass
class RunConfig:
    pop_size: int = 100
    cx_rate: float = 0.8
    mut_rate: float = 0.3
    ns_rate: float = 0.1
    max_generations: int | None = 300
    time_limit: float | None = None
    seed: int = 0
    algorithm: str = "ma"
    sec_random_fraction: float = 0.5
    parent_selection: str = "uniform"
    rest_plus_move: bool = False

    def check(self) -> None:
        for name in ("cx_rate", "mut_rate", "ns_rate", "sec_random_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.max_generations is None and self.time_limit is None:
            raise ValueError("set max_generations and/or time_limit")
        if self.algorithm not in ("ma", "ga"):
            raise ValueError("algorithm must be 'ma' or 'ga'")
        if self.parent_selection not in ("uniform", "tournament"):
            raise ValueError("parent_selection must be 'uniform' or 'tournament'")


@dataclass
class RunResult:
    best: Chromosome
    schedule: Schedule
    best_te: int
    history: list[int] = field(default_factory=list)
    wall_time: float = 0.0
    generations: int = 0
    evaluations: int = 0


class _Fitness:
    # decode is pure, so memoising on the genotype is safe
    def __init__(self, instance: Instance, rest_plus_move: bool, max_size: int = 50_000):
        self.instance = instance
        self.rest_plus_move = rest_plus_move
        self.cache: dict = {}
        self.max_size = max_size
        self.evaluations = 0

    def __call__(self, chrom: Chromosome) -> int:
        key = chrom.key()
        te = self.cache.get(key)
        if te is None:
            if len(self.cache) >= self.max_size:
                self.cache.clear()
            te = self.cache[key] = evaluate(self.instance, chrom, rest_plus_move=self.rest_plus_move)
            self.evaluations += 1
        return te


def local_search(instance: Instance, chrom: Chromosome, te: int, fitness, rng: random.Random):
    """One first-improvement pass over N1, N2, N3."""
    for move in NEIGHBORHOODS:
        cand = move(instance, chrom, rng)
        cte = fitness(cand)
        if cte < te:
            chrom, te = cand, cte
    return chrom, te


def select_survivors(pop: list[Chromosome], fit: list[int], size: int):
    """Elitist truncation; exact genotype duplicates rank behind all unique individuals."""
    order = sorted(range(len(pop)), key=lambda i: (fit[i], i))
    seen, unique, dups = set(), [], []
    for i in order:
        key = pop[i].key()
        (dups if key in seen else unique).append(i)
        seen.add(key)
    chosen = (unique + dups)[:size]
    return [pop[i] for i in chosen], [fit[i] for i in chosen]


def _pick_parent(rng: random.Random, fit: list[int], mode: str) -> int:
    if mode == "tournament":
        a, b = rng.randrange(len(fit)), rng.randrange(len(fit))
        return a if fit[a] <= fit[b] else b
    return rng.randrange(len(fit))


def run(instance: Instance, config: RunConfig) -> RunResult:
    config.check()
    t0 = time.monotonic()
    rng = random.Random(config.seed)
    # separate stream so the neighborhood step never shifts the main one
    ls_rng = random.Random(config.seed ^ 0x5DEECE66D)
    fitness = _Fitness(instance, config.rest_plus_move)

    pop = sec_init(instance, config.pop_size, rng, config.sec_random_fraction)
    fit = [fitness(c) for c in pop]
    pop, fit = select_survivors(pop, fit, config.pop_size)
    history = [fit[0]]

    def out_of_budget(gen: int) -> bool:
        if config.max_generations is not None and gen >= config.max_generations:
            return True
        return config.time_limit is not None and time.monotonic() - t0 >= config.time_limit

    gen = 0
    while not out_of_budget(gen):
        offspring = []
        for _ in range(config.pop_size // 2):
            a = _pick_parent(rng, fit, config.parent_selection)
            b = _pick_parent(rng, fit, config.parent_selection)
            if rng.random() < config.cx_rate:
                offspring.extend(crossover(instance, pop[a], pop[b], rng))

        mutants = []
        for chrom in pop:
            m = chrom
            if rng.random() < config.mut_rate:
                m = mutate_os(instance, m, rng)
            if rng.random() < config.mut_rate:
                m = mutate_cs(instance, m, rng)
            if rng.random() < config.mut_rate:
                m = mutate_ws(instance, m, rng)
            if m is not chrom:
                mutants.append(m)

        merged = pop + offspring + mutants
        merged_fit = fit + [fitness(c) for c in offspring + mutants]
        if config.algorithm == "ma":
            for idx in range(len(merged)):
                if ls_rng.random() < config.ns_rate:
                    merged[idx], merged_fit[idx] = local_search(
                        instance, merged[idx], merged_fit[idx], fitness, ls_rng
                    )
        pop, fit = select_survivors(merged, merged_fit, config.pop_size)
        history.append(fit[0])
        gen += 1

    best = pop[0]
    sched = decode(instance, best, rest_plus_move=config.rest_plus_move)
    return RunResult(
        best=best,
        schedule=sched,
        best_te=fit[0],
        history=history,
        wall_time=time.monotonic() - t0,
        generations=gen,
        evaluations=fitness.evaluations,
    )
