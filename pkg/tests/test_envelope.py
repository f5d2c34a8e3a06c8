import random
from fractions import Fraction

import numpy as np
import pytest

from src.core import ideals as ideal_ops
from src.core import oracle
from src.core.envelope import (
    _horizon_kept,
    _reach_maximal,
    build_envelope,
    detect_period,
    envelope_arms,
    envelope_compression,
    j_free_intervals,
    maximal_intervals,
)
from src.errors import DepthError, ValidationError
from src.fixtures import constant_tn, ref2, tn
from src.models.diagram import MatrixUnit
from src.models.envelope import KEPT_FINITE, KEPT_HORIZON, KEPT_STATIONARY, IntervalProjection


def I(level, a, b, summand=0):
    return IntervalProjection(level, summand, a, b)


def spans(nodes):
    return {(p.a, p.b) for p in nodes}


def test_j_free_intervals_single_level():
    P = tn(3)
    J = ideal_ops.generate_ideal(P, [MatrixUnit(1, 0, 2, 3)], 1)
    S = j_free_intervals(P, J, 1)
    assert spans(S) == {(1, 1), (1, 2), (2, 2), (3, 3)}
    assert spans(maximal_intervals(S)) == {(1, 2), (3, 3)}


def test_j_free_intervals_ref2_second_level():
    P = ref2(3)
    J = ideal_ops.generate_ideal(P, [MatrixUnit(2, 0, 1, 3)], 3)
    S = j_free_intervals(P, J, 2)
    expected = {(a, b) for a in range(1, 5) for b in range(a, 5) if b <= 2 or a >= 2}
    assert spans(S) == expected
    assert spans(maximal_intervals(S)) == {(1, 2), (2, 4)}


def test_zero_ideal_gives_all_intervals():
    P = ref2(3)
    J = ideal_ops.zero_ideal(P, 3)
    assert len(j_free_intervals(P, J, 2)) == 10
    assert spans(maximal_intervals(j_free_intervals(P, J, 3))) == {(1, 8)}


def test_envelope_arms_ref2_full_node():
    P = ref2(3)
    J = ideal_ops.zero_ideal(P, 3)
    arms = envelope_arms(P, J, 1)
    full = [e for e in arms if e.source == I(1, 1, 2) and e.target == I(2, 1, 4)]
    assert sorted((e.origin, e.injection) for e in full) == [(0, (1, 3)), (1, (2, 4))]
    to_second = [e for e in arms if e.target == I(2, 2, 2)]
    assert [(e.source, e.origin) for e in to_second] == [(I(1, 1, 1), 1)]


def test_envelope_arms_split_at_ideal():
    P = ref2(2)
    J = ideal_ops.generate_ideal(P, [MatrixUnit(1, 0, 1, 2)], 2)
    # J 在第 2 层包含 (1,3)、(2,4)，于是 [1,4] 不再是 J-自由的
    targets = spans(j_free_intervals(P, J, 2))
    assert (1, 4) not in targets and (1, 2) in targets and (2, 3) in targets
    arms = envelope_arms(P, J, 1)
    assert all(e.source.size == 1 for e in arms)
    assert all(1 <= e(1) <= e.target.size for e in arms)


def test_envelope_arms_depth_error():
    P = ref2(2)
    with pytest.raises(DepthError):
        envelope_arms(P, ideal_ops.zero_ideal(P, 2), 2)


@pytest.mark.parametrize(
    "signatures, expected",
    [
        ([1, 2, 1, 2, 1, 2], (0, 2)),
        ([0, 1, 1, 1, 1], (1, 1)),
        ([1, 2, 3], None),
        (["x", "x"], None),
        (["x", "x", "x"], (0, 1)),
        ([1, 1, 1, 1, 2], None),
        ([3, 1, 2, 1, 2], None),
    ],
)
def test_detect_period(signatures, expected):
    assert detect_period(signatures) == expected


def test_ref2_zero_keeps_full_nodes(ref2_envelope):
    assert ref2_envelope.kept_method == KEPT_HORIZON
    assert ref2_envelope.decided_depth == 6
    for i in range(1, 7):
        assert ref2_envelope.kept(i) == [I(i, 1, 2 ** i)]
        assert len(ref2_envelope.nodes(i)) == 2 ** i * (2 ** i + 1) // 2


def test_swap_zero_keeps_one_node_per_summand(swap_envelope):
    for i in range(1, 5):
        kept = swap_envelope.kept(i)
        assert [p.summand for p in kept] == [0, 1, 2]
        assert all(p.a == 1 and p.b == swap_envelope.presentation.size(i, p.summand) for p in kept)


def test_horizon_leaves_top_levels_undecided():
    P = ref2(4)
    E = build_envelope(P, ideal_ops.zero_ideal(P, 4), 4, 2)
    assert E.decided_depth == 2
    assert E.undecided(3) and not E.undecided(2)
    assert E.kept(4) == [I(4, 1, 16)]


def test_horizon_keeps_node_with_distant_maximal_descendant():
    levels = [[I(1, 1, 1), I(1, 2, 2)], [I(2, 1, 1)], [I(3, 1, 2)]]
    succ = {I(1, 1, 1): [I(2, 1, 1)], I(2, 1, 1): [I(3, 1, 2)]}
    dist = _reach_maximal(levels, {I(3, 1, 2)}, succ)
    assert dist[I(1, 1, 1)] == 2 and dist[I(1, 2, 2)] is None
    kept = _horizon_kept(levels, dist, horizon=1, lookahead=3)
    assert kept[I(1, 1, 1)] is True
    assert kept[I(1, 2, 2)] is False
    assert kept[I(3, 1, 2)] is True


def test_finite_single_level():
    P = tn(3)
    J = ideal_ops.generate_ideal(P, [MatrixUnit(1, 0, 2, 3)], 1)
    E = build_envelope(P, J, 1, 3)
    assert E.final and E.kept_method == KEPT_FINITE
    assert spans(E.kept(1)) == {(1, 2), (3, 3)}


def test_constant_tower_is_stationary():
    P = constant_tn(3, 6)
    E = build_envelope(P, ideal_ops.zero_ideal(P, 6), 4, 2)
    assert E.kept_method == KEPT_STATIONARY
    assert E.decided_depth == 4
    assert spans(E.kept(4)) == {(1, 3)}
    assert not E.final


def test_build_envelope_arguments():
    P = ref2(3)
    J = ideal_ops.zero_ideal(P, 3)
    with pytest.raises(ValidationError):
        build_envelope(P, J, 2, 0)
    with pytest.raises(DepthError):
        build_envelope(P, J, 4, 1)


def test_envelope_to_dict():
    P = tn(2)
    E = build_envelope(P, ideal_ops.zero_ideal(P, 1), 1, 1)
    d = E.to_dict()
    assert d["kept_method"] == KEPT_FINITE
    assert {(n["a"], n["b"], n["kept"]) for n in d["levels"][0]} == {
        (1, 1, False),
        (1, 2, True),
        (2, 2, False),
    }


def test_envelope_compression_blocks():
    P = tn(3)
    J = ideal_ops.zero_ideal(P, 1)
    combination = {MatrixUnit(1, 0, 1, 2): 1, MatrixUnit(1, 0, 2, 3): 2}
    blocks = dict(envelope_compression(P, J, combination))
    np.testing.assert_array_equal(blocks[I(1, 1, 3)], [[0, 1, 0], [0, 0, 2], [0, 0, 0]])
    np.testing.assert_array_equal(blocks[I(1, 2, 3)], [[0, 2], [0, 0]])
    assert not blocks[I(1, 1, 1)].any()


def test_envelope_compression_rational():
    P = tn(2)
    J = ideal_ops.zero_ideal(P, 1)
    blocks = dict(envelope_compression(P, J, {MatrixUnit(1, 0, 1, 2): Fraction(1, 3)}))
    assert blocks[I(1, 1, 2)][0, 1] == Fraction(1, 3)
    with pytest.raises(ValidationError):
        envelope_compression(P, J, {})


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_single_level_keeps_exactly_the_maximal_intervals(n):
    P = tn(n)
    for ideal in oracle.enumerate_ideals_Tn(n).ideals:
        J = oracle.to_table(P, ideal)
        E = build_envelope(P, J, 1, 1)
        S = j_free_intervals(P, J, 1)
        assert set(E.kept(1)) == maximal_intervals(S)
        assert len(E.kept(1)) == len(maximal_intervals(S))


def _product(x, y):
    out = {}
    for u, a in x.items():
        for v, b in y.items():
            if u.col == v.row:
                w = MatrixUnit(u.level, u.summand, u.row, v.col)
                out[w] = out.get(w, 0) + a * b
    return out


def test_compression_is_multiplicative():
    rng = random.Random(13)
    P = tn(4)
    ideals = oracle.enumerate_ideals_Tn(4).ideals
    units = oracle.tn_units(4)
    for _ in range(40):
        J = oracle.to_table(P, rng.choice(ideals))
        x = {u: rng.randint(1, 3) for u in rng.sample(units, 4)}
        y = {u: rng.randint(1, 3) for u in rng.sample(units, 4)}
        x[MatrixUnit(1, 0, 1, 1)] = y[MatrixUnit(1, 0, 1, 1)] = 1
        xs = dict(envelope_compression(P, J, x))
        ys = dict(envelope_compression(P, J, y))
        for p, block in envelope_compression(P, J, _product(x, y)):
            np.testing.assert_array_equal(block, xs[p] @ ys[p])
