from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rmtshop.instance_io import generate_instance
from rmtshop.model import (
    InstanceError, Mode, OpId, canonical_index, eligible_triples, is_eligible, op_at_index, rest_time,
    rest_time_for,
)

from conftest import single_machine_instance, small_params


def test_canonical_index_examples(sample):
    assert sample.ops_per_job == (2, 2, 3)
    assert canonical_index(sample, OpId(0, 0)) == 0
    assert canonical_index(sample, OpId(2, 2)) == 6
    assert canonical_index(sample, OpId(1, 0)) == 2


@pytest.mark.parametrize("oid", [OpId(3, 0), OpId(0, 2), OpId(-1, 0), OpId(2, 3)])
def test_canonical_index_out_of_range(sample, oid):
    with pytest.raises(IndexError):
        canonical_index(sample, oid)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_canonical_index_is_bijection(seed):
    inst = generate_instance(small_params(seed))
    positions = [canonical_index(inst, oid) for oid in inst.op_ids()]
    assert positions == list(range(inst.num_operations))
    assert [op_at_index(inst, p) for p in positions] == inst.op_ids()


def test_is_eligible_examples():
    # one op on machine 0 (config 0); machine 0 staffed only by worker 1
    inst = single_machine_instance([[[(0, 3)]]], workers=(1,), num_workers=2)
    oid = OpId(0, 0)
    assert is_eligible(inst, oid, 0, 0, 1)
    assert not is_eligible(inst, oid, 0, 0, 0)
    assert not is_eligible(inst, oid, 1, 0, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_every_operation_has_an_eligible_triple(seed):
    inst = generate_instance(small_params(seed))
    for oid in inst.op_ids():
        triples = eligible_triples(inst, oid)
        assert triples
        assert all(is_eligible(inst, oid, *t) for t in triples)


def test_rest_time_examples():
    inst = single_machine_instance([[[(0, 10)], [(0, 7)]]])
    assert rest_time(inst, OpId(0, 0), Mode(0, 0, 10)) == 1
    assert rest_time(inst, OpId(0, 1), Mode(0, 0, 7)) == 1
    lazy = single_machine_instance([[[(0, 10)]]], rest_factor=Fraction(0))
    assert rest_time(lazy, OpId(0, 0), Mode(0, 0, 10)) == 0


def test_rest_time_rejects_foreign_mode():
    inst = single_machine_instance([[[(0, 10)]]])
    with pytest.raises(ValueError):
        rest_time(inst, OpId(0, 0), Mode(0, 0, 11))


@given(st.fractions(0, 1), st.integers(1, 500), st.integers(1, 500))
def test_rest_time_monotone(factor, a, b):
    lo, hi = sorted((a, b))
    assert rest_time_for(factor, lo) <= rest_time_for(factor, hi)
    assert rest_time_for(Fraction(0), hi) == 0


def test_instance_rejects_broken_invariants(sample):
    from dataclasses import replace

    with pytest.raises(InstanceError, match="setup diagonal"):
        replace(sample, setup=(((1, 2), (3, 0)), sample.setup[1]))
    with pytest.raises(InstanceError, match="symmetric"):
        replace(sample, moving=((0, 2), (3, 0)))
    with pytest.raises(InstanceError, match="empty worker set"):
        replace(sample, machine_workers=((0, 1), ()))
    with pytest.raises(InstanceError, match="rest_factor"):
        replace(sample, rest_factor=Fraction(3, 2))
