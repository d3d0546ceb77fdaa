"""Brute-force optimum over the decoder's chromosome space (tiny instances only)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .engine import Chromosome, Schedule, decode, evaluate, tables
from .model import Instance


class OracleSizeError(ValueError):
    pass


@dataclass
class OracleResult:
    optimal_te: int
    schedule: Schedule
    chromosome: Chromosome
    enumerated: int


def multiset_permutations(counts: list[int]):
    """Distinct sequences over ``range(len(counts))`` with the given multiplicities, in lexicographic order."""
    total = sum(counts)
    seq = [0] * total
    left = list(counts)

    def rec(pos):
        if pos == total:
            yield tuple(seq)
            return
        for v in range(len(left)):
            if left[v]:
                left[v] -= 1
                seq[pos] = v
                yield from rec(pos + 1)
                left[v] += 1

    yield from rec(0)


def search_space_size(instance: Instance) -> int:
    t = tables(instance)
    perms = math.factorial(t.num_ops)
    for n in t.ops_per_job:
        perms //= math.factorial(n)
    return perms * math.prod(len(tr) for tr in t.triples)


def enumerate_optimal(instance: Instance, limit: int = 10**7, *, rest_plus_move: bool = False) -> OracleResult:
    size = search_space_size(instance)
    if size > limit:
        raise OracleSizeError(f"search space has {size} chromosomes, limit is {limit}")
    t = tables(instance)
    best_te = None
    best = None
    count = 0
    resources = list(itertools.product(*t.triples))
    for os in multiset_permutations(list(t.ops_per_job)):
        for choice in resources:
            chrom = Chromosome(os, tuple((k, c) for k, c, _ in choice), tuple(w for _, _, w in choice))
            te = evaluate(instance, chrom, rest_plus_move=rest_plus_move)
            count += 1
            if best_te is None or te < best_te:
                best_te, best = te, chrom
    return OracleResult(best_te, decode(instance, best, rest_plus_move=rest_plus_move), best, count)
