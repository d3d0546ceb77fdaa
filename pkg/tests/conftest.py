import random
from fractions import Fraction
from pathlib import Path

import pytest

from rmtshop.engine import Chromosome
from rmtshop.instance_io import GenParams, generate_instance, parse_instance
from rmtshop.model import Instance, Job, Mode, Operation

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def sample():
    return parse_instance((FIXTURES / "sample.instance").read_text())


@pytest.fixture
def sample_chromosome():
    # the encoding example with 1-based labels shifted to 0-based
    return Chromosome(
        os=(0, 2, 2, 0, 2, 1, 1),
        cs=((0, 0), (1, 1), (1, 1), (0, 0), (1, 0), (0, 0), (0, 0)),
        ws=(1, 1, 1, 0, 0, 0, 0),
    )


def single_machine_instance(job_modes, *, configs=1, workers=(0,), num_workers=1, setup=None,
                            aux_energy=0, rest_factor=Fraction(1, 10), energy=1):
    """Instance on machine 0; ``job_modes[i][j]`` is a list of (config, proc_time)."""
    jobs = []
    for ops in job_modes:
        jobs.append(Job(tuple(
            Operation(tuple(Mode(0, c, pt) for c, pt in modes), {(0, w): energy for w in workers})
            for modes in ops
        )))
    if setup is None:
        setup = tuple(tuple(0 for _ in range(configs)) for _ in range(configs))
    return Instance(
        jobs=tuple(jobs), machine_configs=(configs,), machine_workers=(tuple(workers),),
        setup=(setup,), moving=((0,),), num_workers=num_workers,
        aux_energy=aux_energy, rest_factor=rest_factor,
    )


def tiny_params(seed: int) -> GenParams:
    """2 jobs x 2 ops on 2 machines with 2 configs and 2 workers."""
    return GenParams(num_jobs=2, num_machines=2, num_workers=2, ops_per_job=(2, 2), modes_per_op=(1, 2),
                     num_configs=2, workers_per_machine=(1, 2), seed=seed)


def tiny_instance(seed: int) -> Instance:
    return generate_instance(tiny_params(seed))


def small_params(seed: int) -> GenParams:
    rng = random.Random(seed)
    return GenParams(
        num_jobs=rng.randint(1, 5), num_machines=rng.randint(1, 5), num_workers=rng.randint(1, 4),
        ops_per_job=(1, rng.randint(1, 4)), proc_time=(1, rng.randint(1, 20)),
        setup_time=(0, rng.randint(1, 6)), moving_time=(0, rng.randint(1, 6)),
        aux_energy=rng.randint(0, 6), rest_factor=Fraction(rng.randint(0, 5), 10), seed=seed,
    )
