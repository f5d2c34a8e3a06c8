import random

import numpy as np
import pytest

from src.core import ideals as ideal_ops
from src.core import nest
from src.core.oracle import to_table, wedge_ideal
from src.errors import DepthError, PreconditionError, ValidationError
from src.fixtures import constant_tn
from src.models.diagram import MatrixUnit
from src.models.envelope import IntervalProjection
from src.models.verdict import YES


def U(level, row, col):
    return MatrixUnit(level, 0, row, col)


def test_leftmost_chain_stays_at_first_position(ref2_rep):
    chain = ref2_rep.chain
    assert chain.rule == nest.RULE_LEFTMOST
    assert chain.positions == (1,) * 6
    assert [p.b for p in chain.path] == [2 ** i for i in range(1, 7)]


def test_rightmost_chain_follows_last_arm(ref2_rep):
    chain = nest.build_state_chain(ref2_rep.diagram, ref2_rep.chain.path, nest.RULE_RIGHTMOST)
    assert chain.positions == tuple(2 ** i for i in range(1, 7))
    with pytest.raises(ValidationError):
        nest.build_state_chain(ref2_rep.diagram, ref2_rep.chain.path, "middle")


def test_stage_matrices(ref2_rep):
    stage = nest.finite_gns_stage(ref2_rep, 2, [U(1, 1, 2), U(1, 1, 1), U(1, 2, 2)])
    assert stage.dimension == 4
    entries = {tuple(e) for e in stage.to_dict()["units"][1]["entries"]}
    assert entries == {(1, 3), (2, 4)}
    assert stage.omega(U(1, 1, 1)) == 1
    assert stage.omega(U(1, 2, 2)) == 0


def test_stage_arguments(ref2_rep):
    with pytest.raises(DepthError):
        nest.finite_gns_stage(ref2_rep, 7, [])
    with pytest.raises(DepthError):
        nest.finite_gns_stage(ref2_rep, 2, [U(3, 1, 1)])


def test_tau_and_omega_are_multiplicative(ref2_rep):
    rng = random.Random(99)
    d = 4
    pairs = []
    while len(pairs) < 100:
        level = rng.randint(1, d)
        n = 2 ** level
        k, l, m = sorted(rng.randint(1, n) for _ in range(3))
        pairs.append((U(level, k, l), U(level, l, m), U(level, k, m)))
    units = {u for triple in pairs for u in triple}
    stage = nest.finite_gns_stage(ref2_rep, d, units)
    for u, v, uv in pairs:
        np.testing.assert_array_equal(stage.tau(u) @ stage.tau(v), stage.tau(uv))
        assert stage.omega(u) * stage.omega(v) == stage.omega(uv)
    for u in units:
        assert stage.tau(u).sum(axis=0).max() <= 1
        assert stage.tau(u).sum(axis=1).max() <= 1


def test_omega_vanishes_on_orthogonal_units(ref2_rep):
    stage = nest.finite_gns_stage(ref2_rep, 3, list(ref2_rep.presentation.units(2)))
    for u in stage.matrices:
        for v in stage.matrices:
            if u.col != v.row:
                assert stage.omega(u) * stage.omega(v) == 0
                assert not (stage.tau(u) @ stage.tau(v)).any()


def test_kernel_separates_units_outside_zero_ideal(ref2_rep):
    units = [u for level in range(1, 4) for u in ref2_rep.presentation.units(level)]
    report = nest.kernel_check(ref2_rep, units, 4)
    assert all(e.status == nest.KERNEL_SEPARATED for e in report)
    assert all(e.first_nonzero == e.unit.level for e in report)


def test_kernel_on_wedge_ideal():
    P = constant_tn(3, 9)
    J = to_table(P, wedge_ideal(3, 1, 2))
    rep = nest.build_nest_representation(P, J, 6, 3)
    assert rep.chain.path[0] == IntervalProjection(1, 0, 1, 2)
    report = {e.unit: e for e in nest.kernel_check(rep, list(P.units(1)), 6)}
    for u, entry in report.items():
        if J.contains_unit(u):
            assert entry.status == nest.KERNEL_ZERO
        else:
            assert entry.status == nest.KERNEL_SEPARATED and entry.first_nonzero == 1


def test_nest_checks(ref2_rep):
    stage = nest.finite_gns_stage(ref2_rep, 1, [U(1, 1, 2)])
    report = nest.check_nest(stage)
    assert report.full_stage_nest
    assert report.image_invariant_subspace_chain and report.classes == 2
    diagonal = nest.finite_gns_stage(ref2_rep, 1, [U(1, 1, 1), U(1, 2, 2)])
    assert not nest.check_nest(diagonal).image_invariant_subspace_chain
    assert nest.check_nest(nest.finite_gns_stage(ref2_rep, 5, [])).full_stage_nest


def test_density_witness_found_at_node_level(ref2_rep):
    node = IntervalProjection(2, 0, 1, 4)
    a = nest.EnvelopeUnit(node, 1, 4)
    constraints = nest.constraints_for(
        a, [(nest.EnvelopeUnit(node, 4, 4), nest.EnvelopeUnit(node, 1, 1))]
    )
    assert constraints[0].value == 1
    found = nest.density_witness(ref2_rep, a, constraints, 2)
    assert found.found and found.unit == U(2, 1, 4) and found.searched_level == 2
    shallow = nest.density_witness(ref2_rep, a, constraints, 1)
    assert not shallow.found and shallow.searched_level == 1


def test_density_witness_rejects_contradictions(ref2_rep):
    node = IntervalProjection(1, 0, 1, 2)
    e = nest.EnvelopeUnit(node, 2, 2)
    f = nest.EnvelopeUnit(node, 1, 1)
    a = nest.EnvelopeUnit(node, 1, 2)
    constraints = [nest.DensityConstraint(e, f, 1), nest.DensityConstraint(e, f, 0)]
    witness = nest.density_witness(ref2_rep, a, constraints, 1)
    assert not witness.found and witness.searched_level == 0
    with pytest.raises(ValidationError):
        nest.density_witness(ref2_rep, nest.EnvelopeUnit(node, 2, 3), [], 1)


def test_kernel_table_matches_zero_ideal(ref2_rep):
    assert nest.kernel_table(ref2_rep, 3).same_sets(ideal_ops.zero_ideal(ref2_rep.presentation, 3))
    report = nest.verify_kernel_meet_irreducible(ref2_rep, 6, 3)
    assert report.agrees_with_ideal
    assert report.verdict.status == YES
    with pytest.raises(DepthError):
        nest.kernel_table(ref2_rep, 7)


def test_not_primitive_has_no_representation():
    P = constant_tn(2, 9)
    J = ideal_ops.generate_ideal(P, [U(1, 1, 2)], 9)
    with pytest.raises(PreconditionError):
        nest.build_nest_representation(P, J, 6, 3)
