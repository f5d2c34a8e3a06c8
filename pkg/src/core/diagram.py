"""
表示与推进模块
校验TAF表示、沿嵌入推进矩阵单位、展开平稳模板
"""

import collections
import dataclasses
import logging
import typing as tp

from src.errors import DepthError, PreconditionError, PresentationError, ValidationError
from src.models.diagram import (
    LAYOUT_INTERLEAVE,
    EmbeddingArm,
    MatrixUnit,
    TafPresentation,
)
from src.models.verdict import Violation

logger = logging.getLogger(__name__)


def _check_structure(P: TafPresentation):
    """
    检查层级、分量与位置引用是否越界

    Raises:
        PresentationError: 引用越界
    """
    for i, arm in enumerate(P.arms):
        where = {"arm": i, "level": arm.level, "source": arm.source, "target": arm.target}
        if not 1 <= arm.level < P.depth:
            raise PresentationError(message="臂的源层不存在或没有后继层", details=where)
        if arm.source >= len(P.levels[arm.level - 1]):
            raise PresentationError(message="臂的源分量越界", details=where)
        if arm.target >= len(P.levels[arm.level]):
            raise PresentationError(message="臂的目标分量越界", details=where)
        source_size = P.size(arm.level, arm.source)
        target_size = P.size(arm.level + 1, arm.target)
        if len(arm.injection) != source_size:
            raise PresentationError(
                message=f"injection 长度 {len(arm.injection)} 与源分量尺寸 {source_size} 不符",
                details=where,
            )
        if any(not 1 <= x <= target_size for x in arm.injection):
            raise PresentationError(
                message=f"injection 的像超出目标分量 [1,{target_size}]", details=where
            )
    if P.stationary is not None and P.stationary.from_level > P.depth:
        raise PresentationError(
            message="平稳模板的起始层超出表示深度",
            details={"from_level": P.stationary.from_level, "depth": P.depth},
        )


def _template_violations(P: TafPresentation) -> tp.List[Violation]:
    """检查模板生效后的各层是否符合类型与臂模式"""
    template = P.stationary
    out = []
    for level in range(template.from_level, P.depth + 1):
        if len(P.levels[level - 1]) != len(template.types):
            out.append(
                Violation(
                    kind="template",
                    level=level,
                    message=f"第{level}层分量数 {len(P.levels[level - 1])} 与模板类型数 {len(template.types)} 不符",
                )
            )
            continue
        if level == P.depth or len(P.levels[level]) != len(template.types):
            continue
        observed = [
            (template.types[a.source], template.types[a.target])
            for a in P.arms
            if a.level == level
        ]
        if sorted(observed) != sorted(template.arms):
            out.append(
                Violation(
                    kind="template",
                    level=level,
                    message=f"第{level}层的臂模式与模板不一致",
                )
            )
    return out


def validate_presentation(P: TafPresentation) -> tp.List[Violation]:
    """
    校验表示的不变量

    检查分量尺寸、注入的严格递增性、每个目标分量上入臂像的不交覆盖，
    以及每个有后继层的分量至少有一条出臂。

    Args:
        P: 待校验的表示

    Returns:
        tp.List[Violation]: 违规列表，为空表示合法

    Raises:
        PresentationError: 层级、分量或位置引用越界
    """
    violations: tp.List[Violation] = []
    for level, sizes in enumerate(P.levels, start=1):
        for j, size in enumerate(sizes):
            if size < 1:
                violations.append(
                    Violation(
                        kind="size",
                        level=level,
                        summand=j,
                        message=f"第{level}层分量{j}的尺寸 {size} 小于 1",
                    )
                )
    if violations:
        return violations

    _check_structure(P)

    hits: tp.Dict[tp.Tuple[int, int], tp.Counter] = collections.defaultdict(collections.Counter)
    for i, arm in enumerate(P.arms):
        if any(x >= y for x, y in zip(arm.injection, arm.injection[1:])):
            violations.append(
                Violation(
                    kind="not-increasing",
                    level=arm.level,
                    summand=arm.source,
                    arm=i,
                    positions=arm.injection,
                    message=f"臂 {i} 的 injection 不是严格递增的",
                )
            )
        hits[(arm.level + 1, arm.target)].update(arm.injection)

    for level in range(2, P.depth + 1):
        for j, size in enumerate(P.levels[level - 1]):
            counter = hits.get((level, j), collections.Counter())
            overlap = tuple(sorted(k for k, c in counter.items() if c > 1))
            gap = tuple(k for k in range(1, size + 1) if counter[k] == 0)
            if overlap:
                violations.append(
                    Violation(
                        kind="overlap",
                        level=level,
                        summand=j,
                        positions=overlap,
                        message=f"第{level}层分量{j}: overlap at positions {set(overlap)}",
                    )
                )
            if gap:
                violations.append(
                    Violation(
                        kind="gap",
                        level=level,
                        summand=j,
                        positions=gap,
                        message=f"第{level}层分量{j}: gap at {set(gap)}",
                    )
                )

    for level in range(1, P.depth):
        for j in range(len(P.levels[level - 1])):
            if not P.arms_from(level, j):
                violations.append(
                    Violation(
                        kind="no-outgoing-arm",
                        level=level,
                        summand=j,
                        message=f"第{level}层分量{j}没有出臂",
                    )
                )

    if P.stationary is not None:
        violations.extend(_template_violations(P))

    if violations:
        logger.info(f"表示校验发现 {len(violations)} 处违规")
    return violations


def check_unit(P: TafPresentation, u: MatrixUnit):
    """
    确认矩阵单位属于表示

    Raises:
        ValidationError: 层级、分量或行列越界
    """
    if not 1 <= u.level <= P.depth:
        raise DepthError(
            message=f"矩阵单位的层 {u.level} 超出表示深度 {P.depth}",
            details={"unit": str(u)},
        )
    if not 0 <= u.summand < len(P.levels[u.level - 1]):
        raise ValidationError(message="矩阵单位的分量越界", details={"unit": str(u)})
    if not 1 <= u.row <= u.col <= P.size(u.level, u.summand):
        raise ValidationError(message="矩阵单位的行列越界", details={"unit": str(u)})


def push_arm(arm: EmbeddingArm, u: MatrixUnit) -> MatrixUnit:
    """沿一条臂推进矩阵单位"""
    return MatrixUnit(u.level + 1, arm.target, arm(u.row), arm(u.col))


def push_matrix_unit(P: TafPresentation, u: MatrixUnit) -> tp.FrozenSet[MatrixUnit]:
    """
    把矩阵单位推进到下一层：每条出臂给出一个像

    Args:
        P: 表示
        u: 矩阵单位，层级小于表示顶层

    Returns:
        tp.FrozenSet[MatrixUnit]: 第 level(u)+1 层的像集合

    Raises:
        DepthError: u 已在顶层
    """
    if u.level >= P.depth:
        raise DepthError(
            message=f"第{u.level}层已是顶层，无法继续推进",
            details={"unit": str(u), "depth": P.depth},
        )
    return frozenset(push_arm(arm, u) for arm in P.arms_from(u.level, u.summand))


def push_to_depth(P: TafPresentation, u: MatrixUnit, d: int) -> tp.FrozenSet[MatrixUnit]:
    """
    迭代推进到第 d 层

    Raises:
        DepthError: d 不在 [level(u), depth(P)] 内
    """
    if not u.level <= d <= P.depth:
        raise DepthError(
            message=f"目标层 {d} 必须在 [{u.level}, {P.depth}] 内",
            details={"unit": str(u)},
        )
    current = frozenset([u])
    for _ in range(u.level, d):
        current = frozenset(v for w in current for v in push_matrix_unit(P, w))
    return current


@dataclasses.dataclass(frozen=True)
class SummandGraph:
    """
    分量图：平稳表示按类型建点，否则按 (层, 分量) 建点

    edges[(源, 目标)] = 臂的重数
    """

    nodes: tp.Tuple[str, ...]
    edges: tp.Dict[tp.Tuple[str, str], int]

    @property
    def edge_count(self) -> int:
        return sum(self.edges.values())

    def multiplicity(self, source: str, target: str) -> int:
        return self.edges.get((source, target), 0)

    def components(self) -> tp.List[tp.FrozenSet[str]]:
        """弱连通分支（按首次出现顺序）"""
        parent = {n: n for n in self.nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s, t in self.edges:
            parent[find(s)] = find(t)
        groups: tp.Dict[str, tp.Set[str]] = {}
        for n in self.nodes:
            groups.setdefault(find(n), set()).add(n)
        return [frozenset(g) for g in groups.values()]

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [
                {"source": s, "target": t, "multiplicity": m}
                for (s, t), m in sorted(self.edges.items())
            ],
        }


def summand_graph(P: TafPresentation) -> SummandGraph:
    """
    分量多重图

    平稳表示按模板类型建点，边为模板臂；否则每个 (层, 分量) 一个点，边为全部臂。
    """
    edges: tp.Counter = collections.Counter()
    if P.stationary is not None:
        for s, t in P.stationary.arms:
            edges[(s, t)] += 1
        return SummandGraph(nodes=P.stationary.types, edges=dict(edges))

    def name(level, j):
        return f"L{level}S{j}"

    nodes = tuple(
        name(level, j) for level, sizes in enumerate(P.levels, start=1) for j in range(len(sizes))
    )
    for arm in P.arms:
        edges[(name(arm.level, arm.source), name(arm.level + 1, arm.target))] += 1
    return SummandGraph(nodes=nodes, edges=dict(edges))


def _next_level(
    P: TafPresentation, level: int
) -> tp.Tuple[tp.Tuple[int, ...], tp.List[EmbeddingArm]]:
    """按模板计算第 level+1 层的尺寸与第 level 层的臂"""
    template = P.stationary
    sizes = P.levels[level - 1]
    incoming: tp.Dict[str, tp.List[tp.Tuple[str, int]]] = {t: [] for t in template.types}
    for s, t in template.arms:
        incoming[t].append((s, sizes[template.type_index(s)]))

    new_sizes = []
    arms: tp.List[EmbeddingArm] = []
    for target, type_name in enumerate(template.types):
        feeds = incoming[type_name]
        total = sum(size for _, size in feeds)
        if total < 1:
            raise PreconditionError(
                message=f"模板类型 {type_name} 没有入臂，无法确定尺寸",
                details={"level": level + 1},
            )
        new_sizes.append(total)
        if template.layout_of(type_name) == LAYOUT_INTERLEAVE:
            m = len(feeds)
            if len({size for _, size in feeds}) != 1:
                raise PreconditionError(
                    message=f"交错排布要求类型 {type_name} 的入臂源尺寸相同",
                    details={"level": level, "sizes": [size for _, size in feeds]},
                )
            for j, (s, size) in enumerate(feeds):
                injection = tuple(m * (k - 1) + j + 1 for k in range(1, size + 1))
                arms.append(EmbeddingArm(level, template.type_index(s), target, injection))
        else:
            offset = 0
            for s, size in feeds:
                injection = tuple(offset + k for k in range(1, size + 1))
                arms.append(EmbeddingArm(level, template.type_index(s), target, injection))
                offset += size
    # 保持模板中臂的顺序
    order = {(s, t): i for i, (s, t) in enumerate(template.arms)}
    seen: tp.Counter = collections.Counter()

    def arm_key(arm):
        pair = (template.types[arm.source], template.types[arm.target])
        seen[pair] += 1
        return order[pair], seen[pair]

    arms = sorted(arms, key=arm_key)
    return tuple(new_sizes), arms


def extend_stationary(P: TafPresentation, extra_levels: int) -> TafPresentation:
    """
    按平稳模板展开 extra_levels 层

    新层尺寸由覆盖方程 size(q) = Σ size(source) 确定。

    Raises:
        PreconditionError: 没有平稳模板，或顶层还未进入模板
        ValidationError: extra_levels < 0
    """
    if P.stationary is None:
        raise PreconditionError(message="表示没有平稳模板，无法展开")
    if extra_levels < 0:
        raise ValidationError(message="展开层数不能为负", details={"extra_levels": extra_levels})
    if extra_levels == 0:
        return P
    if P.depth < P.stationary.from_level:
        raise PreconditionError(
            message="顶层尚未进入平稳模板",
            details={"depth": P.depth, "from_level": P.stationary.from_level},
        )
    if len(P.levels[-1]) != len(P.stationary.types):
        raise PresentationError(
            message="顶层分量数与模板类型数不符",
            details={"depth": P.depth, "types": len(P.stationary.types)},
        )
    levels = list(P.levels)
    arms = list(P.arms)
    current = P
    for _ in range(extra_levels):
        sizes, new_arms = _next_level(current, len(levels))
        levels.append(sizes)
        arms.extend(new_arms)
        current = TafPresentation(tuple(levels), tuple(arms), P.stationary)
    logger.debug(f"平稳表示从深度 {P.depth} 展开到 {current.depth}")
    return current


def truncate(P: TafPresentation, depth: int) -> TafPresentation:
    """
    截断到前 depth 层；结果不带平稳模板，顶层即最终层

    Raises:
        DepthError: depth 不在 [1, depth(P)] 内
    """
    if not 1 <= depth <= P.depth:
        raise DepthError(
            message=f"截断深度 {depth} 必须在 [1, {P.depth}] 内", details={"depth": depth}
        )
    return TafPresentation(
        levels=P.levels[:depth],
        arms=tuple(a for a in P.arms if a.level < depth),
        stationary=None,
    )


def at_depth(P: TafPresentation, depth: int) -> TafPresentation:
    """
    平稳表示展开或截断到恰好 depth 层；非平稳表示要求 depth ≤ depth(P)

    截断后保留模板，仍可继续展开。
    """
    if depth == P.depth:
        return P
    if depth > P.depth:
        if P.stationary is None:
            raise DepthError(
                message=f"请求深度 {depth} 超过有限表示的深度 {P.depth}",
                details={"depth": depth},
            )
        return extend_stationary(P, depth - P.depth)
    if depth < 1:
        raise DepthError(message="深度必须 ≥ 1", details={"depth": depth})
    stationary = P.stationary
    if stationary is not None and stationary.from_level > depth:
        stationary = None
    return TafPresentation(
        levels=P.levels[:depth],
        arms=tuple(a for a in P.arms if a.level < depth),
        stationary=stationary,
    )
