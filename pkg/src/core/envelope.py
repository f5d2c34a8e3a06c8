"""
包络构造模块
由理想 J 构造 J-自由区间节点 S_i、包络臂 π_i 与剪枝后的 B' = C*env(A/J)
"""

import bisect
import logging
import typing as tp
from fractions import Fraction

import numpy as np

from src.core.diagram import check_unit
from src.errors import DepthError, ValidationError
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.envelope import (
    KEPT_FINITE,
    KEPT_HORIZON,
    KEPT_STATIONARY,
    EnvelopeArm,
    EnvelopeDiagram,
    EnvelopeNode,
    IntervalProjection,
)
from src.models.ideal import IdealTable

logger = logging.getLogger(__name__)

TNodeSig = tp.Tuple[tp.Optional[str], int, bool]


def j_free_intervals(P: TafPresentation, J: IdealTable, i: int) -> tp.List[IntervalProjection]:
    """
    第 i 层的 J-自由区间 S_i

    J 在层内闭，区间 [a,b] J-自由当且仅当角点 (a,b) 不在 J 中。

    Raises:
        DepthError: i 超出 J 或 P 的深度
    """
    if not 1 <= i <= min(J.depth, P.depth):
        raise DepthError(message=f"层 {i} 超出可用深度", details={"level": i})
    out = []
    for j, n in enumerate(P.levels[i - 1]):
        threshold = J.closed_set(i, j).threshold
        for a in range(1, n + 1):
            for b in range(a, threshold[a - 1]):
                out.append(IntervalProjection(i, j, a, b))
    return out


def maximal_intervals(S: tp.Iterable[IntervalProjection]) -> tp.Set[IntervalProjection]:
    """
    S 中在同一分量内不被其他成员真包含的区间

    S 对子区间封闭（J-自由区间族如此），只需检查向左、向右各扩一格。
    """
    members = set(S)
    out = set()
    for p in members:
        left = IntervalProjection(p.level, p.summand, p.a - 1, p.b)
        right = IntervalProjection(p.level, p.summand, p.a, p.b + 1)
        if left not in members and right not in members:
            out.add(p)
    return out


def envelope_arms(P: TafPresentation, J: IdealTable, i: int) -> tp.List[EnvelopeArm]:
    """
    π_i 的包络臂

    对每条原臂 ι 与每个目标节点 [c,d]，在 ι⁻¹([c,d]) 的范围 [a*,b*] 内取所有极大
    J-自由子区间 [a,b]，各给出一条注入 m ↦ ι(a+m-1) - c + 1 的臂。

    Raises:
        DepthError: i+1 超出可用深度
    """
    if not 1 <= i < min(J.depth, P.depth):
        raise DepthError(message=f"第 {i} 层没有可用的后继层", details={"level": i})
    targets: tp.Dict[int, tp.List[IntervalProjection]] = {}
    for node in j_free_intervals(P, J, i + 1):
        targets.setdefault(node.summand, []).append(node)

    out = []
    for arm in P.arms:
        if arm.level != i:
            continue
        origin = P.arm_index(arm)
        n = P.size(i, arm.source)
        threshold = J.closed_set(i, arm.source).threshold
        for target in targets.get(arm.target, ()):
            # 注入严格递增，原像范围用二分查找
            a_lo = bisect.bisect_left(arm.injection, target.a) + 1
            b_hi = bisect.bisect_right(arm.injection, target.b)
            if a_lo > min(b_hi, n):
                continue
            prev_end = None
            for a in range(a_lo, b_hi + 1):
                end = min(threshold[a - 1] - 1, b_hi)
                if end < a:
                    continue
                if prev_end is None or end > prev_end:
                    source = IntervalProjection(i, arm.source, a, end)
                    out.append(EnvelopeArm(source, target, origin, arm.injection))
                    prev_end = end
                if end == b_hi:
                    break
    out.sort(key=lambda e: (e.source, e.target, e.origin))
    return out


def _level_signature(
    P: TafPresentation,
    nodes: tp.List[IntervalProjection],
    maximal: tp.Set[IntervalProjection],
    next_nodes: tp.List[IntervalProjection],
    arms: tp.List[EnvelopeArm],
) -> tp.Tuple:
    """一层节点的签名（类型、极大性）与到下一层的按秩转移"""
    rank = {p: r for r, p in enumerate(nodes)}
    next_rank = {p: r for r, p in enumerate(next_nodes)}
    node_sig = tuple((P.type_of(p.level, p.summand), p.summand, p in maximal) for p in nodes)
    transitions = tuple(sorted((rank[e.source], next_rank[e.target]) for e in arms))
    return node_sig, transitions


def detect_period(signatures: tp.Sequence[tp.Hashable], min_repeats: int = 3) -> tp.Optional[tp.Tuple[int, int]]:
    """
    在签名序列中寻找最早开始、周期最小的周期段

    要求从 start 起到序列末尾满足 sig[j] == sig[j+p]，且至少观察到 min_repeats 个完整周期；
    只重复两次的段可能是后面才变化的过渡段，不算周期。

    Returns:
        tp.Optional[tp.Tuple[int, int]]: (start, period)，start 为序列下标；找不到时返回 None
    """
    count = len(signatures)
    for start in range(count):
        for period in range(1, (count - start) // min_repeats + 1):
            if all(
                signatures[j] == signatures[j + period] for j in range(start, count - period)
            ):
                return start, period
    return None


def _reach_maximal(
    levels: tp.List[tp.List[IntervalProjection]],
    maximal: tp.Set[IntervalProjection],
    succ: tp.Dict[IntervalProjection, tp.List[IntervalProjection]],
) -> tp.Dict[IntervalProjection, tp.Optional[int]]:
    """每个节点到达某个极大节点所需的最少层数（无法在计算范围内到达时为 None）"""
    dist: tp.Dict[IntervalProjection, tp.Optional[int]] = {}
    for level_nodes in reversed(levels):
        for p in level_nodes:
            if p in maximal:
                dist[p] = 0
                continue
            best = None
            for q in succ.get(p, ()):
                dq = dist.get(q)
                if dq is not None and (best is None or dq + 1 < best):
                    best = dq + 1
            dist[p] = best
    return dist


def _stationary_kept(
    P: TafPresentation,
    levels: tp.List[tp.List[IntervalProjection]],
    maximal: tp.Set[IntervalProjection],
    arms_by_level: tp.List[tp.List[EnvelopeArm]],
) -> tp.Optional[tp.Dict[IntervalProjection, bool]]:
    """
    检测包络的周期平稳性，并在周期类型图上精确判定保留

    Returns:
        检测成功时返回每个节点的保留标记，否则 None
    """
    lookahead = len(levels)
    if P.stationary is None or lookahead < 3:
        return None
    signatures = [
        _level_signature(P, levels[i], maximal, levels[i + 1], arms_by_level[i])
        for i in range(lookahead - 1)
    ]
    first = P.stationary.from_level - 1
    found = detect_period(signatures[first:])
    if found is None:
        return None
    start, period = found
    start += first
    # 周期类型 (相位, 秩)：相位 φ 的转移来自第 start+φ 层
    type_kept: tp.Dict[tp.Tuple[int, int], bool] = {}
    for phase in range(period):
        node_sig, _ = signatures[start + phase]
        for r, (_, _, is_max) in enumerate(node_sig):
            type_kept[(phase, r)] = is_max
    changed = True
    while changed:
        changed = False
        for phase in range(period):
            _, transitions = signatures[start + phase]
            nxt = (phase + 1) % period
            for src, tgt in transitions:
                if not type_kept[(phase, src)] and type_kept[(nxt, tgt)]:
                    type_kept[(phase, src)] = True
                    changed = True

    kept: tp.Dict[IntervalProjection, bool] = {}
    for i in range(lookahead - 1, start - 1, -1):
        phase = (i - start) % period
        for r, p in enumerate(levels[i]):
            kept[p] = type_kept.get((phase, r), p in maximal)
    succ = _successors(arms_by_level)
    for i in range(start - 1, -1, -1):
        for p in levels[i]:
            kept[p] = p in maximal or any(kept[q] for q in succ.get(p, ()))
    logger.info(f"检测到包络平稳：起始第 {start + 1} 层，周期 {period}")
    return kept


def _successors(arms_by_level) -> tp.Dict[IntervalProjection, tp.List[IntervalProjection]]:
    succ: tp.Dict[IntervalProjection, tp.List[IntervalProjection]] = {}
    for arms in arms_by_level:
        for e in arms:
            succ.setdefault(e.source, []).append(e.target)
    return succ


def _horizon_kept(
    levels: tp.List[tp.List[IntervalProjection]],
    dist: tp.Dict[IntervalProjection, tp.Optional[int]],
    horizon: int,
    lookahead: int,
) -> tp.Dict[IntervalProjection, tp.Optional[bool]]:
    """
    视界内的保留判定

    计算范围内到达了极大节点即保留（距离可以超过 h）；到不了且自身之后还有 h 层
    前瞻时不保留；其余未判定。
    """
    kept: tp.Dict[IntervalProjection, tp.Optional[bool]] = {}
    for i, level_nodes in enumerate(levels, start=1):
        for p in level_nodes:
            if dist[p] is not None:
                kept[p] = True
            elif i + horizon <= lookahead:
                kept[p] = False
            else:
                kept[p] = None
    return kept


def build_envelope(P: TafPresentation, J: IdealTable, D: int, horizon: int) -> EnvelopeDiagram:
    """
    构造包络图并标记保留节点

    节点保留当且仅当沿包络臂可到达某个极大节点。有限表示（无模板且计算到顶层）
    精确判定；平稳表示先检测包络的周期性，在周期类型图上精确判定；否则在视界 h
    内判定，无法判定的节点标记为 None。

    Args:
        P: 表示
        J: 理想表
        D: 记录的层数
        horizon: 视界 h ≥ 1

    Returns:
        EnvelopeDiagram: 前 D 层的包络图

    Raises:
        ValidationError: horizon < 1
        DepthError: D 超出 P 或 J 的深度
    """
    if horizon < 1:
        raise ValidationError(message="视界必须 ≥ 1", details={"horizon": horizon})
    available = min(P.depth, J.depth)
    if not 1 <= D <= available:
        raise DepthError(
            message=f"包络深度 {D} 必须在 [1, {available}] 内",
            details={"depth": D, "presentation": P.depth, "ideal": J.depth},
        )
    lookahead = min(available, D + horizon)

    levels = [j_free_intervals(P, J, i) for i in range(1, lookahead + 1)]
    maximal: tp.Set[IntervalProjection] = set()
    for level_nodes in levels:
        maximal |= maximal_intervals(level_nodes)
    arms_by_level = [envelope_arms(P, J, i) for i in range(1, lookahead)]
    logger.info(
        f"包络计算到第 {lookahead} 层：节点 {sum(map(len, levels))} 个，"
        f"臂 {sum(map(len, arms_by_level))} 条"
    )

    final = P.stationary is None and lookahead == P.depth
    kept: tp.Dict[IntervalProjection, tp.Optional[bool]]
    if final:
        method = KEPT_FINITE
        dist = _reach_maximal(levels, maximal, _successors(arms_by_level))
        kept = {p: dist[p] is not None for p in dist}
    else:
        stationary = _stationary_kept(P, levels, maximal, arms_by_level)
        if stationary is not None:
            method = KEPT_STATIONARY
            kept = dict(stationary)
        else:
            method = KEPT_HORIZON
            dist = _reach_maximal(levels, maximal, _successors(arms_by_level))
            kept = _horizon_kept(levels, dist, horizon, lookahead)
    undecided = sum(1 for i in range(D) for p in levels[i] if kept[p] is None)
    if undecided:
        logger.warning(f"{undecided} 个节点在视界 {horizon} 内无法判定是否保留")

    nodes = tuple(
        tuple(EnvelopeNode(p, p in maximal, kept[p]) for p in levels[i]) for i in range(D)
    )
    arms = tuple(e for i in range(D - 1) for e in arms_by_level[i])
    return EnvelopeDiagram(
        presentation=P,
        depth=D,
        levels=nodes,
        arms=arms,
        horizon=horizon,
        lookahead=lookahead,
        kept_method=method,
        final=final and D == lookahead,
    )


def envelope_compression(
    P: TafPresentation,
    J: IdealTable,
    combination: tp.Mapping[MatrixUnit, tp.Union[int, Fraction]],
    level: tp.Optional[int] = None,
) -> tp.List[tp.Tuple[IntervalProjection, np.ndarray]]:
    """
    σ_i：把第 i 层矩阵单位的组合压缩到每个 J-自由区间

    Args:
        P: 表示
        J: 理想表
        combination: 矩阵单位到系数（整数或有理数）的映射
        level: 层（组合为空时必须给出）

    Returns:
        每个节点 [a,b] 及其 (b-a+1) 阶系数矩阵（相对坐标）

    Raises:
        ValidationError: 组合跨层或层未知
    """
    levels = {u.level for u in combination}
    if level is not None:
        levels.add(level)
    if len(levels) != 1:
        raise ValidationError(
            message="压缩的组合必须位于同一层", details={"levels": sorted(levels)}
        )
    i = levels.pop()
    for u in combination:
        check_unit(P, u)
    exact = all(isinstance(c, int) for c in combination.values())
    dtype = np.int64 if exact else object
    blocks = []
    for p in j_free_intervals(P, J, i):
        block = np.zeros((p.size, p.size), dtype=dtype)
        if not exact:
            block[:] = Fraction(0)
        for u, coefficient in combination.items():
            if u.summand == p.summand and p.a <= u.row and u.col <= p.b:
                block[u.row - p.a, u.col - p.a] += coefficient
        blocks.append((p, block))
    return blocks
