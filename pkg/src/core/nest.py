"""
巢表示模块
沿本质路径构造状态链、有限 GNS 阶段、核检查、巢检查与系数匹配见证
"""

import dataclasses
import logging
import typing as tp

import numpy as np

from src.core import ideals as ideal_ops
from src.core.diagram import check_unit, push_to_depth
from src.core.envelope import build_envelope
from src.core.meet import MeetVerdict, is_meet_irreducible
from src.core.primitivity import analyze_envelope
from src.errors import DepthError, PreconditionError, ValidationError
from src.models.base import BaseModel
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.envelope import EnvelopeArm, EnvelopeDiagram, IntervalProjection
from src.models.ideal import ClosedSet, IdealTable
from src.models.verdict import INCONCLUSIVE

logger = logging.getLogger(__name__)

RULE_LEFTMOST = "leftmost"
RULE_RIGHTMOST = "rightmost"
RULES = (RULE_LEFTMOST, RULE_RIGHTMOST)

KERNEL_ZERO = "zero"
KERNEL_SEPARATED = "separated"
KERNEL_VIOLATION = "violation"


@dataclasses.dataclass(frozen=True)
class StateChain(BaseModel):
    """
    从属投影链 (p_i)

    Attributes:
        path: 本质路径 Γ，每层一个节点
        positions: p_i 在 Γ(i) 中的相对位置
        arms: 连接相邻路径节点时选用的包络臂
        rule: leftmost / rightmost
    """

    path: tp.Tuple[IntervalProjection, ...]
    positions: tp.Tuple[int, ...]
    arms: tp.Tuple[EnvelopeArm, ...]
    rule: str = RULE_LEFTMOST

    @property
    def first(self) -> int:
        return self.path[0].level

    @property
    def last(self) -> int:
        return self.path[-1].level

    def node(self, level: int) -> IntervalProjection:
        return self.path[level - self.first]

    def position(self, level: int) -> int:
        return self.positions[level - self.first]

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "path": [p.to_dict() for p in self.path],
            "positions": list(self.positions),
        }


def build_state_chain(
    diagram: EnvelopeDiagram, path: tp.Sequence[IntervalProjection], rule: str = RULE_LEFTMOST
) -> StateChain:
    """
    沿路径选取从属投影

    leftmost 从第一层位置 1 出发并沿第一条连接臂推进；rightmost 从最后一个位置出发
    并沿最后一条连接臂推进。臂把 p_i 的位置映到 p_{i+1} 的位置（从属性）。

    Raises:
        ValidationError: 未知规则或路径为空
        PreconditionError: 相邻路径节点之间没有包络臂
    """
    if rule not in RULES:
        raise ValidationError(message=f"未知的选取规则 {rule}", details={"allowed": list(RULES)})
    if not path:
        raise ValidationError(message="本质路径为空")
    position = 1 if rule == RULE_LEFTMOST else path[0].size
    positions = [position]
    chosen = []
    for source, target in zip(path, path[1:]):
        arms = diagram.arms_between(source, target)
        if not arms:
            raise PreconditionError(
                message=f"路径节点 {source} 与 {target} 之间没有包络臂",
                details={"level": source.level},
            )
        arm = arms[0] if rule == RULE_LEFTMOST else arms[-1]
        position = arm(position)
        chosen.append(arm)
        positions.append(position)
    return StateChain(path=tuple(path), positions=tuple(positions), arms=tuple(chosen), rule=rule)


@dataclasses.dataclass(frozen=True, eq=False)
class NestRepresentation:
    """
    交不可约理想 J 的巢表示在有限深度上的数据

    Attributes:
        presentation: 表示
        ideal: 理想 J
        diagram: 包络图
        chain: 状态链
    """

    presentation: TafPresentation
    ideal: IdealTable
    diagram: EnvelopeDiagram
    chain: StateChain


def build_nest_representation(
    P: TafPresentation,
    J: IdealTable,
    D: int,
    horizon: int,
    rule: str = RULE_LEFTMOST,
    path_length: tp.Optional[int] = None,
) -> NestRepresentation:
    """
    构造包络、本质路径和状态链

    Raises:
        PreconditionError: 包络不是本原的
    """
    diagram = build_envelope(P, J, D, horizon)
    verdict = analyze_envelope(diagram, horizon, path_length or D)
    if not verdict.is_primitive:
        raise PreconditionError(
            message=f"包络不是本原的（{verdict.status}），无法构造巢表示",
            details={"status": verdict.status},
        )
    chain = build_state_chain(diagram, list(verdict.witness), rule)
    logger.info(f"状态链覆盖第 {chain.first} 到 {chain.last} 层（{rule}）")
    return NestRepresentation(presentation=P, ideal=J, diagram=diagram, chain=chain)


@dataclasses.dataclass(frozen=True, eq=False)
class FiniteNestStage:
    """
    第 d 个有限 GNS 阶段：p_d 所在列上的左乘作用

    Attributes:
        depth: 阶段 d
        node: Γ(d)
        position: p_d 的相对位置
        matrices: 每个矩阵单位 u 的 0/1 矩阵 τ_d(u)
    """

    depth: int
    node: IntervalProjection
    position: int
    matrices: tp.Dict[MatrixUnit, np.ndarray]

    @property
    def dimension(self) -> int:
        return self.node.size

    def tau(self, u: MatrixUnit) -> np.ndarray:
        return self.matrices[u]

    def omega(self, u: MatrixUnit) -> int:
        """ω(u) = τ_d(u) 的 (p_d, p_d) 元"""
        p = self.position - 1
        return int(self.matrices[u][p, p])

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "node": self.node.to_dict(),
            "position": self.position,
            "units": [
                {
                    "unit": u.to_dict(),
                    "omega": self.omega(u),
                    "entries": [[int(r) + 1, int(c) + 1] for r, c in np.argwhere(m)],
                }
                for u, m in sorted(self.matrices.items())
            ],
        }


def compress_unit(P: TafPresentation, u: MatrixUnit, node: IntervalProjection) -> np.ndarray:
    """把 u 推进到 node 所在层并压缩到区间（相对坐标）"""
    block = np.zeros((node.size, node.size), dtype=np.int64)
    for v in push_to_depth(P, u, node.level):
        if v.summand == node.summand and node.a <= v.row and v.col <= node.b:
            block[v.row - node.a, v.col - node.a] = 1
    return block


def finite_gns_stage(
    rep: NestRepresentation, d: int, units: tp.Iterable[MatrixUnit]
) -> FiniteNestStage:
    """
    构造第 d 个阶段

    Raises:
        DepthError: d 不在状态链范围内，或某个单位的层超过 d
        PreconditionError: Γ(d) 不是保留节点
    """
    chain = rep.chain
    if not chain.first <= d <= chain.last:
        raise DepthError(
            message=f"阶段 {d} 必须在 [{chain.first}, {chain.last}] 内", details={"depth": d}
        )
    node = chain.node(d)
    if rep.diagram.node(node).kept is not True:
        raise PreconditionError(message=f"Γ({d}) = {node} 不是保留节点")
    P = rep.presentation
    matrices = {}
    for u in units:
        check_unit(P, u)
        if u.level > d:
            raise DepthError(
                message=f"单位 {u} 的层超过阶段 {d}", details={"unit": str(u), "depth": d}
            )
        matrices[u] = compress_unit(P, u, node)
    return FiniteNestStage(depth=d, node=node, position=chain.position(d), matrices=matrices)


@dataclasses.dataclass(frozen=True)
class KernelEntry(BaseModel):
    """
    单个矩阵单位的核检查结果

    Attributes:
        unit: 矩阵单位
        in_ideal: 是否属于 J
        status: zero / separated / violation / inconclusive-at-horizon
        first_nonzero: 第一个 τ_d(u) ≠ 0 的阶段
    """

    unit: MatrixUnit
    in_ideal: bool
    status: str
    first_nonzero: tp.Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "unit": self.unit.to_dict(),
            "in_ideal": self.in_ideal,
            "status": self.status,
            "first_nonzero": self.first_nonzero,
        }


def _first_nonzero(rep: NestRepresentation, u: MatrixUnit, last: int) -> tp.Optional[int]:
    for d in range(max(u.level, rep.chain.first), last + 1):
        if compress_unit(rep.presentation, u, rep.chain.node(d)).any():
            return d
    return None


def kernel_check(
    rep: NestRepresentation, units: tp.Iterable[MatrixUnit], horizon: int
) -> tp.List[KernelEntry]:
    """
    在阶段 d ≤ horizon 上检查核：J 中的单位处处为零，J 外的单位在某个阶段非零
    """
    last = min(horizon, rep.chain.last)
    report = []
    for u in units:
        in_ideal = u.level <= rep.ideal.depth and rep.ideal.contains_unit(u)
        first = _first_nonzero(rep, u, last)
        if in_ideal:
            status = KERNEL_ZERO if first is None else KERNEL_VIOLATION
        else:
            status = KERNEL_SEPARATED if first is not None else INCONCLUSIVE
        if status == KERNEL_VIOLATION:
            logger.warning(f"J 中的单位 {u} 在第 {first} 阶段非零")
        report.append(KernelEntry(unit=u, in_ideal=in_ideal, status=status, first_nonzero=first))
    return report


@dataclasses.dataclass(frozen=True)
class NestReport(BaseModel):
    """
    巢检查结果

    Attributes:
        full_stage_nest: Γ(d) 全部上三角单位的不变坐标子空间是否全序
        image_invariant_subspace_chain: 只用给定 τ_d(u) 时不变坐标子空间是否全序
        classes: 后者的等价类个数（全序时不变子空间数为 classes + 1）
    """

    full_stage_nest: bool
    image_invariant_subspace_chain: bool
    classes: int


def _transitive_closure(adjacency: np.ndarray) -> np.ndarray:
    reach = adjacency.copy() | np.eye(len(adjacency), dtype=bool)
    for k in range(len(reach)):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def _is_total(adjacency: np.ndarray) -> tp.Tuple[bool, int]:
    """
    坐标子空间 span{e_k : k ∈ S} 不变 ⟺ S 对边 c→r 向下封闭；
    这些子空间构成全序当且仅当可达关系是全预序
    """
    reach = _transitive_closure(adjacency)
    total = bool((reach | reach.T).all())
    classes = len({tuple(row & reach[:, i]) for i, row in enumerate(reach)})
    return total, classes


def check_nest(stage: FiniteNestStage) -> NestReport:
    """有限阶段上的巢检查"""
    n = stage.dimension
    full = np.triu(np.ones((n, n), dtype=bool))
    image = np.zeros((n, n), dtype=bool)
    for m in stage.matrices.values():
        image |= m.astype(bool)
    # 矩阵元 (r, c) 把 e_c 映到 e_r，可达方向取 c → r
    full_total, _ = _is_total(full.T)
    image_total, classes = _is_total(image.T)
    return NestReport(
        full_stage_nest=full_total, image_invariant_subspace_chain=image_total, classes=classes
    )


@dataclasses.dataclass(frozen=True)
class EnvelopeUnit(BaseModel):
    """包络节点上三角部分的矩阵单位（相对坐标）"""

    node: IntervalProjection
    row: int
    col: int

    def to_dict(self) -> dict:
        return {"node": self.node.to_dict(), "row": self.row, "col": self.col}


@dataclasses.dataclass(frozen=True)
class DensityConstraint(BaseModel):
    """
    系数约束：f* x e 的系数 x[f.row, e.row] 必须等于 value
    """

    e: EnvelopeUnit
    f: EnvelopeUnit
    value: int


@dataclasses.dataclass(frozen=True)
class DensityWitness(BaseModel):
    """
    系数匹配的搜索结果

    Attributes:
        found: 是否找到
        unit: 找到的 A 中矩阵单位（None 且 found 时为零元）
        searched_level: 搜索到的最深层
    """

    found: bool
    unit: tp.Optional[MatrixUnit]
    searched_level: int
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "unit": self.unit.to_dict() if self.unit else None,
            "searched_level": self.searched_level,
            "note": self.note,
        }


def _check_envelope_unit(diagram: EnvelopeDiagram, x: EnvelopeUnit):
    if x.node.level > diagram.depth or x.node not in {n.projection for n in diagram.nodes(x.node.level)}:
        raise ValidationError(message=f"{x.node} 不是包络节点")
    if not 1 <= x.row <= x.col <= x.node.size:
        raise ValidationError(
            message=f"包络单位 ({x.row},{x.col}) 超出节点 {x.node} 的上三角部分"
        )


def constraints_for(a: EnvelopeUnit, pairs: tp.Iterable[tp.Tuple[EnvelopeUnit, EnvelopeUnit]]) -> tp.List[DensityConstraint]:
    """由目标单位 a 与单位对 (e, f) 得出系数约束"""
    return [
        DensityConstraint(e=e, f=f, value=int(f.row == a.row and e.row == a.col))
        for e, f in pairs
    ]


def density_witness(
    rep: NestRepresentation,
    a: EnvelopeUnit,
    constraints: tp.Sequence[DensityConstraint],
    search_depth: int,
) -> DensityWitness:
    """
    精确搜索 A 中的矩阵单位 â，使压缩到 a 所在节点后满足全部系数约束

    依次搜索第 1 到 min(search_depth, level(a)) 层的单位，最后尝试零元。
    失败时返回搜索到的最深层，表示深度不足而非不存在。

    Raises:
        ValidationError: 单位不在节点中或约束跨节点
    """
    _check_envelope_unit(rep.diagram, a)
    for c in constraints:
        for x in (c.e, c.f):
            _check_envelope_unit(rep.diagram, x)
            if x.node != a.node:
                raise ValidationError(message="约束必须与目标位于同一节点")
    seen: tp.Dict[tp.Tuple[int, int], int] = {}
    for c in constraints:
        key = (c.f.row, c.e.row)
        if seen.setdefault(key, c.value) != c.value:
            return DensityWitness(
                found=False, unit=None, searched_level=0, note=f"位置 {key} 上的约束互相矛盾"
            )

    P = rep.presentation
    node = a.node
    last = min(search_depth, node.level)
    for level in range(1, last + 1):
        for u in P.units(level):
            block = compress_unit(P, u, node)
            if all(block[r - 1, c - 1] == value for (r, c), value in seen.items()):
                logger.debug(f"在第 {level} 层找到匹配单位 {u}")
                return DensityWitness(found=True, unit=u, searched_level=level)
    if all(value == 0 for value in seen.values()):
        return DensityWitness(found=True, unit=None, searched_level=last, note="零元满足全部约束")
    logger.warning(f"搜索到第 {last} 层仍未找到匹配的单位")
    return DensityWitness(found=False, unit=None, searched_level=last, note="搜索深度不足")


def kernel_table(rep: NestRepresentation, depth: int) -> IdealTable:
    """
    τ 的核：在状态链起点到 depth 的每个阶段上都为零的单位，反向饱和后的理想表

    Raises:
        DepthError: depth 超出状态链范围
    """
    if not rep.chain.first <= depth <= rep.chain.last:
        raise DepthError(
            message=f"深度 {depth} 必须在 [{rep.chain.first}, {rep.chain.last}] 内",
            details={"depth": depth},
        )
    P = rep.presentation
    sets = []
    for level in range(1, depth + 1):
        pairs: tp.Dict[int, tp.List[tp.Tuple[int, int]]] = {}
        for u in P.units(level):
            if _first_nonzero(rep, u, depth) is None:
                pairs.setdefault(u.summand, []).append((u.row, u.col))
        sets.append(
            [ClosedSet.from_pairs(n, pairs.get(j, ())) for j, n in enumerate(P.levels[level - 1])]
        )
    sets = ideal_ops.saturate(P, ideal_ops.forward_close(P, sets))
    return ideal_ops.make_table(P, sets, exact=False)


@dataclasses.dataclass(frozen=True)
class KernelReport(BaseModel):
    """核与 J 的比较以及核的交不可约判定"""

    depth: int
    agrees_with_ideal: bool
    verdict: MeetVerdict

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "agrees_with_ideal": self.agrees_with_ideal,
            "verdict": self.verdict.to_dict(),
        }


def verify_kernel_meet_irreducible(
    rep: NestRepresentation, depth: int, horizon: int
) -> KernelReport:
    """比较 kernel_table 与 J，并用包络方法判定核是否交不可约"""
    kernel = kernel_table(rep, depth)
    agrees = ideal_ops.equal_at_depth(kernel, ideal_ops.restrict(rep.ideal, depth))
    if not agrees:
        logger.warning(f"深度 {depth} 上 τ 的核与 J 不一致")
    verdict = is_meet_irreducible(rep.presentation, kernel, horizon=horizon)
    return KernelReport(depth=depth, agrees_with_ideal=agrees, verdict=verdict)
