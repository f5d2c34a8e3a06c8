"""
理想演算模块
生成深度有界的理想表，提供成员判定与格运算
"""

import logging
import typing as tp

from src.core.diagram import check_unit
from src.errors import ConstructionError, DepthError, ValidationError
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.ideal import MEMBER_IN, MEMBER_OUT, ClosedSet, IdealTable

logger = logging.getLogger(__name__)

TSets = tp.List[tp.List[ClosedSet]]


def levelwise_closure(P: TafPresentation, units: tp.Iterable[MatrixUnit]) -> tp.FrozenSet[MatrixUnit]:
    """
    单层闭包：包含输入的最小闭集

    Args:
        P: 表示（提供分量尺寸）
        units: 同一层的矩阵单位

    Returns:
        tp.FrozenSet[MatrixUnit]: 闭包中的全部矩阵单位

    Raises:
        ValidationError: 输入混有不同层
    """
    units = list(units)
    if not units:
        return frozenset()
    levels = {u.level for u in units}
    if len(levels) > 1:
        raise ValidationError(
            message="levelwise_closure 的输入必须在同一层", details={"levels": sorted(levels)}
        )
    level = levels.pop()
    for u in units:
        check_unit(P, u)
    out = set()
    for j, n in enumerate(P.levels[level - 1]):
        pairs = [(u.row, u.col) for u in units if u.summand == j]
        if pairs:
            out.update(MatrixUnit(level, j, k, l) for k, l in ClosedSet.from_pairs(n, pairs).pairs())
    return frozenset(out)


def _empty_sets(P: TafPresentation, depth: int) -> TSets:
    return [[ClosedSet.empty(n) for n in P.levels[i]] for i in range(depth)]


def _push_forward(P: TafPresentation, sets: TSets, level: int) -> tp.List[ClosedSet]:
    """第 level 层闭集沿全部臂推进后在下一层的闭包（推进角点即可）"""
    pairs: tp.Dict[int, tp.List[tp.Tuple[int, int]]] = {}
    for j, cs in enumerate(sets[level - 1]):
        corners = cs.corners()
        if not corners:
            continue
        for arm in P.arms_from(level, j):
            pairs.setdefault(arm.target, []).extend((arm(k), arm(l)) for k, l in corners)
    return [
        ClosedSet.from_pairs(n, pairs.get(q, ()))
        for q, n in enumerate(P.levels[level])
    ]


def _pull_back(P: TafPresentation, sets: TSets, level: int) -> tp.List[ClosedSet]:
    """
    第 level 层中所有像全部落在下一层闭集中的单位

    对第 k 行，所需最小列为各臂上满足 ι(l) ≥ t_q(ι(k)) 的最小 l 的最大值。
    """
    out = []
    for j, n in enumerate(P.levels[level - 1]):
        arms = P.arms_from(level, j)
        if not arms:
            out.append(ClosedSet.empty(n))
            continue
        threshold = []
        for k in range(1, n + 1):
            need = k
            for arm in arms:
                t_q = sets[level][arm.target].threshold[arm(k) - 1]
                l = need
                while l <= n and arm(l) < t_q:
                    l += 1
                need = l
                if need > n:
                    break
            threshold.append(min(need, n + 1))
        # 逐行取最小值保证单调
        for k in range(n - 2, -1, -1):
            threshold[k] = min(threshold[k], threshold[k + 1])
        out.append(ClosedSet(n, tuple(threshold)))
    return out


def saturate(P: TafPresentation, sets: TSets) -> TSets:
    """
    反向饱和：自上而下把像全部在理想中的单位加入，迭代到不动点
    """
    depth = len(sets)
    sets = [list(level_sets) for level_sets in sets]
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        for level in range(depth - 1, 0, -1):
            pulled = _pull_back(P, sets, level)
            merged = [cs.union(pb) for cs, pb in zip(sets[level - 1], pulled)]
            if merged != sets[level - 1]:
                sets[level - 1] = merged
                changed = True
    logger.debug(f"反向饱和在 {rounds} 轮后稳定")
    return sets


def forward_close(P: TafPresentation, sets: TSets) -> TSets:
    """逐层把上一层的推进并入下一层"""
    sets = [list(level_sets) for level_sets in sets]
    for level in range(1, len(sets)):
        pushed = _push_forward(P, sets, level)
        sets[level] = [cs.union(p) for cs, p in zip(sets[level], pushed)]
    return sets


def _check_depth(P: TafPresentation, D: int):
    if not 1 <= D <= P.depth:
        raise DepthError(
            message=f"理想深度 {D} 必须在 [1, {P.depth}] 内", details={"depth": D}
        )


def table_problems(T: IdealTable) -> tp.List[str]:
    """检查理想表的前向相容性（闭包由表示方式保证），返回问题描述"""
    problems = []
    P = T.presentation
    for level in range(1, T.depth):
        pushed = _push_forward(P, [list(s) for s in T.sets], level)
        for q, (p, cs) in enumerate(zip(pushed, T.sets[level])):
            if not p.issubset(cs):
                problems.append(f"第{level}层的推进不在第{level + 1}层分量{q}中")
    return problems


def make_table(
    P: TafPresentation, sets: TSets, exact: bool = False, qualifier: str = "depth-qualified"
) -> IdealTable:
    """
    由逐层闭集构造理想表并断言前向相容

    Raises:
        ConstructionError: 前向相容性被破坏
    """
    table = IdealTable(
        presentation=P,
        sets=tuple(tuple(s) for s in sets),
        saturated=tuple(True for _ in sets),
        exact=exact,
        qualifier=qualifier,
    )
    problems = table_problems(table)
    if problems:
        raise ConstructionError(message="理想表违反前向相容性", details={"problems": problems})
    return table


def generate_ideal(P: TafPresentation, generators: tp.Iterable[MatrixUnit], D: int) -> IdealTable:
    """
    生成矩阵单位生成的理想在前 D 层的表

    先逐层前向推进并取闭包，再自上而下反向饱和到不动点。结果是包含生成元、
    满足闭包与前向相容的最小表；它是真实理想的下近似。

    Args:
        P: 表示
        generators: 生成元矩阵单位
        D: 深度

    Returns:
        IdealTable: 饱和后的理想表

    Raises:
        DepthError: D 越界或生成元层超过 D
        ValidationError: 生成元不是表示中的矩阵单位
    """
    _check_depth(P, D)
    generators = list(generators)
    by_position: tp.Dict[tp.Tuple[int, int], tp.List[tp.Tuple[int, int]]] = {}
    for u in generators:
        if u.level > D:
            raise DepthError(
                message=f"生成元 {u} 的层超过深度 {D}", details={"unit": str(u), "depth": D}
            )
        check_unit(P, u)
        by_position.setdefault((u.level, u.summand), []).append((u.row, u.col))
    sets = [
        [ClosedSet.from_pairs(n, by_position.get((i, j), ())) for j, n in enumerate(P.levels[i - 1])]
        for i in range(1, D + 1)
    ]
    sets = saturate(P, forward_close(P, sets))
    table = make_table(P, sets, exact=False)
    logger.info(f"由 {len(generators)} 个生成元构造了深度 {D} 的理想表")
    return table


def zero_ideal(P: TafPresentation, D: int) -> IdealTable:
    """零理想"""
    _check_depth(P, D)
    return make_table(P, _empty_sets(P, D), exact=True, qualifier="exact")


def whole_ideal(P: TafPresentation, D: int) -> IdealTable:
    """整个代数（非真理想）"""
    _check_depth(P, D)
    sets = [[ClosedSet.full(n) for n in P.levels[i]] for i in range(D)]
    return make_table(P, sets, exact=True, qualifier="exact")


def membership(T: IdealTable, u: MatrixUnit) -> str:
    """
    成员判定

    Returns:
        str: "in"（确定）或 "out-at-depth"（在更大深度上可能变为 in）

    Raises:
        DepthError: u 的层超过表深度
    """
    if u.level > T.depth:
        raise DepthError(
            message=f"单位 {u} 的层超过理想表深度 {T.depth}", details={"unit": str(u)}
        )
    check_unit(T.presentation, u)
    return MEMBER_IN if T.contains_unit(u) else MEMBER_OUT


def _same_presentation(T1: IdealTable, T2: IdealTable):
    if T1.presentation.levels[: min(T1.depth, T2.depth)] != T2.presentation.levels[
        : min(T1.depth, T2.depth)
    ] or not _arms_agree(T1, T2):
        raise ValidationError(message="两个理想表属于不同的表示")


def _arms_agree(T1: IdealTable, T2: IdealTable) -> bool:
    depth = min(T1.depth, T2.depth)
    a1 = {a for a in T1.presentation.arms if a.level < depth}
    a2 = {a for a in T2.presentation.arms if a.level < depth}
    return a1 == a2


def intersect(T1: IdealTable, T2: IdealTable) -> IdealTable:
    """逐层交（闭集的交仍是闭集，饱和性也保持）"""
    _same_presentation(T1, T2)
    depth = min(T1.depth, T2.depth)
    sets = [
        [a.intersection(b) for a, b in zip(T1.sets[i], T2.sets[i])] for i in range(depth)
    ]
    P = T1.presentation if T1.depth >= T2.depth else T2.presentation
    exact = T1.exact and T2.exact
    return make_table(P, sets, exact=exact, qualifier="exact" if exact else "depth-qualified")


def join(P: TafPresentation, T1: IdealTable, T2: IdealTable, D: tp.Optional[int] = None) -> IdealTable:
    """
    逐层并，再反向饱和

    Raises:
        ValidationError: 表示不一致
        DepthError: D 超过两表的公共深度
    """
    _same_presentation(T1, T2)
    common = min(T1.depth, T2.depth)
    D = common if D is None else D
    if not 1 <= D <= common:
        raise DepthError(message=f"join 深度 {D} 必须在 [1, {common}] 内", details={"depth": D})
    sets = [[a.union(b) for a, b in zip(T1.sets[i], T2.sets[i])] for i in range(D)]
    sets = saturate(P, sets)
    return make_table(P, sets, exact=False)


def contains(T1: IdealTable, T2: IdealTable) -> bool:
    """在公共深度上 T1 是否包含 T2"""
    _same_presentation(T1, T2)
    depth = min(T1.depth, T2.depth)
    return all(
        b.issubset(a)
        for i in range(depth)
        for a, b in zip(T1.sets[i], T2.sets[i])
    )


def equal_at_depth(T1: IdealTable, T2: IdealTable, depth: tp.Optional[int] = None) -> bool:
    """在前 depth 层上两表是否相同"""
    return T1.same_sets(T2, depth)


def restrict(T: IdealTable, depth: int) -> IdealTable:
    """取前 depth 层"""
    if not 1 <= depth <= T.depth:
        raise DepthError(message=f"深度 {depth} 超出理想表深度 {T.depth}")
    return IdealTable(
        presentation=T.presentation,
        sets=T.sets[:depth],
        saturated=T.saturated[:depth],
        exact=T.exact,
        qualifier=T.qualifier,
    )


def common_range_witness(
    P: TafPresentation,
    I1: IdealTable,
    I2: IdealTable,
    J: IdealTable,
    u: MatrixUnit,
    v: MatrixUnit,
) -> MatrixUnit:
    """
    由同一行（同一终投影）上的 u ∈ I1\\J、v ∈ I2\\J 构造 I1 ∩ I2 \\ J 中的单位

    列相同时返回 u；col(u) < col(v) 时 u·e_{col(u),col(v)} = v 属于 I1，返回 v；
    否则 v·e_{col(v),col(u)} = u 属于 I2，返回 u。

    Raises:
        ValidationError: 不在同一层、分量或行，或不满足 u ∈ I1\\J、v ∈ I2\\J
    """
    check_unit(P, u)
    check_unit(P, v)
    if (u.level, u.summand, u.row) != (v.level, v.summand, v.row):
        raise ValidationError(
            message="u 与 v 必须位于同一层、同一分量、同一行",
            details={"u": str(u), "v": str(v)},
        )
    for unit, ideal, name in ((u, I1, "I1"), (v, I2, "I2")):
        if unit.level > min(ideal.depth, J.depth):
            raise DepthError(message=f"单位 {unit} 超出理想表深度")
        if not ideal.contains_unit(unit):
            raise ValidationError(message=f"{unit} 不属于 {name}")
        if J.contains_unit(unit):
            raise ValidationError(message=f"{unit} 属于 J")
    if u.col <= v.col:
        return v
    return u
