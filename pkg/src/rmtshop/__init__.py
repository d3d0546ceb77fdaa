"""Energy-aware flexible job shop scheduling with reconfigurable machines and workers."""

from .engine import Assignment, Chromosome, Schedule, decode, evaluate, makespan, total_energy
from .evolve import RunConfig, RunResult, run
from .instance_io import GenParams, generate_instance, parse_instance, preset, serialize_instance
from .model import Instance, Job, Mode, OpId, Operation, canonical_index, is_eligible, rest_time
from .oracle import enumerate_optimal
from .validator import Violation, validate

__version__ = "0.1.0"

__all__ = [
    "Assignment", "Chromosome", "GenParams", "Instance", "Job", "Mode", "OpId", "Operation",
    "RunConfig", "RunResult", "Schedule", "Violation", "canonical_index", "decode",
    "enumerate_optimal", "evaluate", "generate_instance", "is_eligible", "makespan",
    "parse_instance", "preset", "rest_time", "run", "serialize_instance", "total_energy", "validate",
]
