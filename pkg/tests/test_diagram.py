import random

import pytest

from src.core.diagram import (
    at_depth,
    extend_stationary,
    push_matrix_unit,
    push_to_depth,
    summand_graph,
    truncate,
    validate_presentation,
)
from src.errors import DataParseError, DepthError, PreconditionError, PresentationError
from src.fixtures import by_name, constant_tn, ref2, std2, swap, tn
from src.models.diagram import EmbeddingArm, MatrixUnit, StationaryTemplate, TafPresentation
from tests.conftest import random_presentation


def kinds(P):
    return {v.kind for v in validate_presentation(P)}


@pytest.mark.parametrize("factory", [ref2, std2, swap])
def test_fixtures_are_valid(factory):
    assert validate_presentation(factory(5)) == []


def test_ref2_sizes_double():
    assert ref2(5).levels == ((2,), (4,), (8,), (16,), (32,))


def test_swap_sizes_follow_covering_equation():
    P = swap(6)
    for i in range(1, P.depth):
        a, b, t = P.levels[i - 1]
        assert P.levels[i] == (b + 1, a, t)


def test_push_ref2_interleaves():
    P = ref2(3)
    images = push_matrix_unit(P, MatrixUnit(1, 0, 1, 2))
    assert images == {MatrixUnit(2, 0, 1, 3), MatrixUnit(2, 0, 2, 4)}


def test_push_std2_blocks():
    P = std2(3)
    images = push_matrix_unit(P, MatrixUnit(1, 0, 1, 2))
    assert images == {MatrixUnit(2, 0, 1, 2), MatrixUnit(2, 0, 3, 4)}


def test_push_to_depth_multiplies():
    P = ref2(4)
    assert len(push_to_depth(P, MatrixUnit(1, 0, 1, 2), 3)) == 4
    assert push_to_depth(P, MatrixUnit(2, 0, 1, 1), 2) == {MatrixUnit(2, 0, 1, 1)}


def test_push_from_top_level_raises():
    P = ref2(2)
    with pytest.raises(DepthError):
        push_matrix_unit(P, MatrixUnit(2, 0, 1, 1))
    with pytest.raises(DepthError):
        push_to_depth(P, MatrixUnit(1, 0, 1, 1), 3)


def test_overlap_and_gap_detected():
    P = TafPresentation(
        levels=((1, 1), (2,)),
        arms=(EmbeddingArm(1, 0, 0, (1,)), EmbeddingArm(1, 1, 0, (1,))),
    )
    violations = validate_presentation(P)
    by_kind = {v.kind: v for v in violations}
    assert by_kind["overlap"].positions == (1,)
    assert by_kind["gap"].positions == (2,)


def test_not_increasing_detected():
    P = TafPresentation(levels=((2,), (2,)), arms=(EmbeddingArm(1, 0, 0, (2, 1)),))
    assert kinds(P) == {"not-increasing"}


def test_missing_outgoing_arm_detected():
    P = TafPresentation(levels=((1,), (1,)), arms=())
    assert kinds(P) == {"no-outgoing-arm", "gap"}


def test_zero_size_reported():
    P = TafPresentation(levels=((0,),), arms=())
    assert kinds(P) == {"size"}


def test_out_of_range_target_raises():
    P = TafPresentation(levels=((1,), (1,)), arms=(EmbeddingArm(1, 0, 3, (1,)),))
    with pytest.raises(PresentationError):
        validate_presentation(P)


def test_template_mismatch_reported():
    template = StationaryTemplate(from_level=1, types=("r",), arms=(("r", "r"), ("r", "r")))
    P = TafPresentation(levels=((1,), (1,)), arms=(EmbeddingArm(1, 0, 0, (1,)),), stationary=template)
    assert "template" in kinds(P)


def test_random_partitions_are_valid():
    rng = random.Random(20240601)
    for _ in range(200):
        P = random_presentation(rng)
        assert validate_presentation(P) == [], P


def test_random_collisions_are_caught():
    rng = random.Random(7)
    checked = 0
    while checked < 200:
        P = random_presentation(rng)
        candidates = [i for i, arm in enumerate(P.arms) if P.size(arm.level + 1, arm.target) > 1]
        if not candidates:
            continue
        i = rng.choice(candidates)
        arm = P.arms[i]
        size = P.size(arm.level + 1, arm.target)
        # 把一个像改成同一目标里另一个被占用的位置
        k = rng.randrange(len(arm.injection))
        choices = [x for x in range(1, size + 1) if x != arm.injection[k]]
        broken = list(arm.injection)
        broken[k] = rng.choice(choices)
        arms = list(P.arms)
        arms[i] = EmbeddingArm(arm.level, arm.source, arm.target, tuple(broken))
        assert kinds(TafPresentation(P.levels, tuple(arms))) & {"overlap", "gap", "not-increasing"}
        checked += 1


def test_load_round_trip():
    P = swap(4)
    assert TafPresentation.load(P.to_dict()) == P


@pytest.mark.parametrize(
    "document",
    [
        {},
        {"levels": []},
        {"levels": [[2]], "arms": {}},
        {"levels": [[2], [4]], "arms": [{"level": 1, "source": 0, "target": 0, "injection": "12"}]},
        {"levels": [["a"]]},
    ],
)
def test_malformed_documents(document):
    with pytest.raises(DataParseError):
        TafPresentation.load(document)


def test_unit_below_diagonal_rejected():
    with pytest.raises(DataParseError):
        MatrixUnit.load({"level": 1, "summand": 0, "row": 2, "col": 1})


def test_summand_graph_stationary():
    graph = summand_graph(swap(3))
    assert graph.nodes == ("a", "b", "t")
    assert graph.multiplicity("t", "a") == 1
    assert graph.multiplicity("a", "a") == 0
    assert graph.edge_count == 4
    assert len(graph.components()) == 1


def test_summand_graph_multiplicity_and_components():
    assert summand_graph(ref2(2)).multiplicity("r", "r") == 2
    template = StationaryTemplate(
        from_level=1, types=("r", "s"), arms=(("r", "r"), ("r", "r"), ("s", "s"), ("s", "s"))
    )
    P = extend_stationary(TafPresentation(((1, 1),), (), template), 2)
    assert len(summand_graph(P).components()) == 2


def test_summand_graph_finite_uses_levels():
    graph = summand_graph(tn(3))
    assert graph.nodes == ("L1S0",)
    assert graph.edges == {}


def test_extend_requires_template():
    with pytest.raises(PreconditionError):
        extend_stationary(tn(2), 1)


def test_truncate_and_at_depth():
    P = ref2(5)
    assert truncate(P, 2).stationary is None
    assert truncate(P, 2).levels == ((2,), (4,))
    assert at_depth(P, 3).is_stationary
    assert at_depth(at_depth(P, 3), 5) == P
    with pytest.raises(DepthError):
        at_depth(tn(2), 2)
    with pytest.raises(DepthError):
        truncate(P, 6)


def test_by_name():
    assert by_name("const-t3", 4) == constant_tn(3, 4)
    assert by_name("T4").levels == ((4,),)
    assert by_name("REF2", 2) == ref2(2)


def test_push_is_triangular_and_partitions_diagonals():
    rng = random.Random(41)
    for _ in range(100):
        P = random_presentation(rng)
        for level in range(1, P.depth):
            diagonal_images = []
            for u in P.units(level):
                pushed = push_matrix_unit(P, u)
                assert len(pushed) == len(P.arms_from(level, u.summand))
                assert all(v.level == level + 1 and v.row <= v.col for v in pushed)
                if u.is_diagonal:
                    assert all(v.is_diagonal for v in pushed)
                    diagonal_images.extend(pushed)
            assert len(diagonal_images) == len(set(diagonal_images))
            assert set(diagonal_images) == {v for v in P.units(level + 1) if v.is_diagonal}


def test_push_to_depth_composes():
    rng = random.Random(42)
    checked = 0
    while checked < 100:
        P = random_presentation(rng, max_levels=5)
        if P.depth < 3:
            continue
        u = rng.choice(list(P.units(1)))
        d = rng.randint(2, P.depth)
        m = rng.randint(1, d)
        staged = frozenset(v for w in push_to_depth(P, u, m) for v in push_to_depth(P, w, d))
        assert staged == push_to_depth(P, u, d)
        checked += 1
