"""
本原性分析模块
通过成对公共后代检验判定包络图的素性（即本原性），并构造本质路径
"""

import collections
import dataclasses
import logging
import typing as tp

import numpy as np

from src.core.diagram import SummandGraph
from src.core.envelope import detect_period
from src.errors import ConstructionError, PreconditionError, ValidationError
from src.models.chain import MiChain
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.envelope import EnvelopeDiagram, IntervalProjection
from src.models.verdict import INCONCLUSIVE, NOT_PRIME, PRIMITIVE, PrimenessVerdict

logger = logging.getLogger(__name__)

TNode = tp.Hashable


class LeveledGraph:
    """
    分层有向图视图：每个节点属于一层，边只连接相邻层

    Attributes:
        first: 最低层
        last: 最高层
        final: 最高层是否为最终层（之后不再有层）
    """

    def __init__(
        self,
        levels: tp.Dict[int, tp.List[TNode]],
        succ: tp.Dict[TNode, tp.List[TNode]],
        final: bool = False,
    ):
        self._levels = {k: list(v) for k, v in levels.items() if v}
        self._succ = succ
        self.final = final
        self.level_of = {n: k for k, nodes in self._levels.items() for n in nodes}
        self.first = min(self._levels) if self._levels else 1
        self.last = max(self._levels) if self._levels else 0

    @classmethod
    def from_envelope(
        cls, diagram: EnvelopeDiagram, last: tp.Optional[int] = None
    ) -> "LeveledGraph":
        """
        包络中保留节点构成的子图（只含判定为保留的节点）

        Args:
            diagram: 包络图
            last: 截止层（默认已判定的最后一层）
        """
        last = diagram.decided_depth if last is None else last
        levels = {i: diagram.kept(i) for i in range(1, last + 1)}
        members = {p for nodes in levels.values() for p in nodes}
        succ: tp.Dict[TNode, tp.List[TNode]] = {}
        for p in members:
            targets = []
            for arm in diagram.arms_from(p):
                if arm.target in members and arm.target not in targets:
                    targets.append(arm.target)
            succ[p] = targets
        return cls(levels, succ, final=diagram.final and last == diagram.depth)

    @property
    def is_empty(self) -> bool:
        return not self._levels

    def nodes(self, level: int) -> tp.List[TNode]:
        return self._levels.get(level, [])

    def successors(self, node: TNode) -> tp.List[TNode]:
        return self._succ.get(node, [])

    def all_nodes(self) -> tp.List[TNode]:
        return [n for k in sorted(self._levels) for n in self._levels[k]]

    def descendants(self, node: TNode, until: int) -> tp.Dict[int, tp.Set[TNode]]:
        """node 在各层（直到 until）的后代集合，包含自身所在层"""
        level = self.level_of[node]
        out = {level: {node}}
        frontier = {node}
        for k in range(level + 1, min(until, self.last) + 1):
            frontier = {q for p in frontier for q in self.successors(p)}
            if not frontier:
                break
            out[k] = frontier
        return out


@dataclasses.dataclass(frozen=True, eq=False)
class TypeGraph:
    """
    有限类型图

    Attributes:
        labels: 类型标签（字符串或代表节点）
        adjacency: 布尔邻接矩阵
        phases: 每个类型的相位（周期展开时使用）
        period: 相位周期
        recurrent: 类型是否在各层反复出现（单层有限图为 False）
    """

    labels: tp.Tuple[tp.Any, ...]
    adjacency: np.ndarray
    phases: tp.Tuple[int, ...]
    period: int = 1
    recurrent: bool = True

    @property
    def size(self) -> int:
        return len(self.labels)

    @classmethod
    def from_summand_graph(cls, graph: SummandGraph) -> "TypeGraph":
        index = {n: i for i, n in enumerate(graph.nodes)}
        adjacency = np.zeros((len(index), len(index)), dtype=bool)
        for (s, t), m in graph.edges.items():
            if m:
                adjacency[index[s], index[t]] = True
        return cls(tuple(graph.nodes), adjacency, tuple(0 for _ in index))

    @classmethod
    def from_view(
        cls,
        view: LeveledGraph,
        signature: tp.Callable[[TNode], tp.Hashable] = lambda n: None,
    ) -> tp.Optional[tp.Tuple["TypeGraph", int]]:
        """
        检测视图的周期平稳性并折叠为类型图

        Returns:
            (类型图, 周期起始层)；视图不足三层或未检测到周期时返回 None
        """
        if view.is_empty or view.last - view.first < 2:
            return None
        signatures = []
        for k in range(view.first, view.last):
            nodes = view.nodes(k)
            rank = {n: r for r, n in enumerate(view.nodes(k + 1))}
            transitions = tuple(
                sorted((r, rank[q]) for r, p in enumerate(nodes) for q in view.successors(p))
            )
            signatures.append((tuple(signature(n) for n in nodes), transitions))
        found = detect_period(signatures)
        if found is None:
            return None
        start, period = found
        start_level = view.first + start
        labels = []
        phases = []
        offsets = []
        for phase in range(period):
            offsets.append(len(labels))
            for n in view.nodes(start_level + phase):
                labels.append(n)
                phases.append(phase)
        adjacency = np.zeros((len(labels), len(labels)), dtype=bool)
        for phase in range(period):
            _, transitions = signatures[start + phase]
            nxt = (phase + 1) % period
            for src, tgt in transitions:
                adjacency[offsets[phase] + src, offsets[nxt] + tgt] = True
        return cls(tuple(labels), adjacency, tuple(phases), period=period), start_level


@dataclasses.dataclass(frozen=True, eq=False)
class DescendantMatrices:
    """
    可达矩阵序列 R^1, R^2, ... 及其最终周期

    powers[d-1] = R^d（d = 1 .. preperiod+period-1），R^{preperiod+period} = R^{preperiod}
    """

    powers: tp.Tuple[np.ndarray, ...]
    preperiod: int
    period: int

    @property
    def window(self) -> int:
        return self.preperiod + self.period

    def power(self, d: int) -> np.ndarray:
        """任意 d ≥ 0 的 R^d（R^0 为单位阵）"""
        if d == 0:
            return np.eye(self.powers[0].shape[0], dtype=bool)
        if d > len(self.powers):
            d = self.preperiod + (d - self.preperiod) % self.period
        return self.powers[d - 1]


def _bool_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


def descendant_matrices(graph: tp.Union[TypeGraph, SummandGraph]) -> DescendantMatrices:
    """
    计算布尔可达矩阵的幂，直到序列重复

    Args:
        graph: 平稳的有限类型图

    Returns:
        DescendantMatrices: 幂序列与 (前周期, 周期)

    Raises:
        PreconditionError: 输入不是有限类型图
    """
    if isinstance(graph, SummandGraph):
        graph = TypeGraph.from_summand_graph(graph)
    if not isinstance(graph, TypeGraph):
        raise PreconditionError(
            message="descendant_matrices 只接受平稳类型图，非平稳输入请使用有界检验",
            details={"got": type(graph).__name__},
        )
    if graph.size == 0:
        raise PreconditionError(message="类型图为空")
    current = graph.adjacency.copy()
    powers = [current]
    seen = {current.tobytes(): 1}
    d = 1
    while True:
        d += 1
        current = _bool_product(current, graph.adjacency)
        key = current.tobytes()
        if key in seen:
            preperiod = seen[key]
            period = d - preperiod
            break
        seen[key] = d
        powers.append(current)
    logger.debug(f"可达矩阵序列：前周期 {preperiod}，周期 {period}")
    return DescendantMatrices(tuple(powers), preperiod, period)


def _failing_type_pairs(graph: TypeGraph, R: DescendantMatrices) -> tp.List[tp.Tuple[int, int, int]]:
    """所有 (s, t, δ)：s 与晚 δ 层的 t 在窗口内没有同层公共后代"""
    window = R.window
    failing = []
    for s in range(graph.size):
        for t in range(graph.size):
            for delta in range(window if graph.recurrent else 1):
                if (graph.phases[s] + delta) % graph.period != graph.phases[t]:
                    continue
                if delta == 0 and t <= s:
                    continue
                if not any(
                    (R.power(delta + d)[s] & R.power(d)[t]).any() for d in range(window)
                ):
                    failing.append((s, t, delta))
    return failing


def is_prime_pairwise(graph: tp.Union[TypeGraph, SummandGraph]) -> PrimenessVerdict:
    """
    成对公共后代检验

    素当且仅当任意两个类型（任意层差）都有同层公共后代；层差与步数都只需搜索
    一个完整的 (前周期 + 周期) 窗口。

    Returns:
        PrimenessVerdict: primitive 或带失败类型对的 not-prime
    """
    if isinstance(graph, SummandGraph):
        graph = TypeGraph.from_summand_graph(graph)
    if graph.size == 0:
        return PrimenessVerdict(status=NOT_PRIME, method="empty", note="类型图为空")
    R = descendant_matrices(graph)
    failing = _failing_type_pairs(graph, R)
    if not failing:
        return PrimenessVerdict(
            status=PRIMITIVE, method="pairwise", preperiod=R.preperiod, period=R.period
        )
    s, t, delta = failing[0]
    pairs = tuple((graph.labels[a], graph.labels[b]) for a, b, _ in failing)
    logger.info(f"类型 {graph.labels[s]} 与晚 {delta} 层的 {graph.labels[t]} 没有公共后代")
    return PrimenessVerdict(
        status=NOT_PRIME,
        method="pairwise",
        counterexample=(graph.labels[s], graph.labels[t]),
        pairs=pairs,
        preperiod=R.preperiod,
        period=R.period,
        lag=delta,
    )


def is_prime_bounded(view: LeveledGraph, horizon: int) -> PrimenessVerdict:
    """
    视界内的成对检验

    每对节点（层 i ≤ j）在 [j, j+horizon] 内寻找同层公共后代。有限图搜索到顶层
    仍不相交时为确定的反例；否则无法判定。

    Raises:
        ValidationError: horizon < 1
    """
    if horizon < 1:
        raise ValidationError(message="视界必须 ≥ 1", details={"horizon": horizon})
    if view.is_empty:
        return PrimenessVerdict(status=NOT_PRIME, method="empty", note="包络为空")
    nodes = view.all_nodes()
    desc = {n: view.descendants(n, view.last) for n in nodes}
    failing = []
    undecided = []
    for x_idx, x in enumerate(nodes):
        for y in nodes[x_idx + 1:]:
            i, j = view.level_of[x], view.level_of[y]
            if i > j:
                x, y, i, j = y, x, j, i
            limit = min(j + horizon, view.last)
            if any(
                desc[x].get(m, set()) & desc[y].get(m, set()) for m in range(j, limit + 1)
            ):
                continue
            if view.final and limit == view.last:
                failing.append((x, y))
            else:
                undecided.append((x, y))
    if failing:
        logger.info(f"有界检验找到 {len(failing)} 对无公共后代的节点")
        return PrimenessVerdict(
            status=NOT_PRIME,
            method="bounded",
            counterexample=failing[0],
            pairs=tuple(failing),
            window=view.last,
        )
    if undecided:
        return PrimenessVerdict(
            status=INCONCLUSIVE,
            method="bounded",
            counterexample=undecided[0],
            pairs=tuple(undecided),
            window=view.last,
            note=f"视界 {horizon} 内未找到公共后代",
        )
    return PrimenessVerdict(status=PRIMITIVE, method="bounded", window=view.last)


def _meeting_walks(
    view: LeveledGraph, g: TNode, x: TNode, until: int
) -> tp.Optional[tp.Tuple[tp.List[TNode], tp.List[TNode]]]:
    """
    从 g 与 x（同层）出发寻找最早的公共后代 z

    Returns:
        (g→z 的路径, x→z 的路径)，都不含起点；找不到时返回 None
    """
    level = view.level_of[g]
    parents_g: tp.Dict[TNode, TNode] = {}
    parents_x: tp.Dict[TNode, TNode] = {}
    front_g, front_x = [g], [x]
    for _ in range(level + 1, until + 1):
        next_g, next_x = [], []
        for p in front_g:
            for q in view.successors(p):
                if q not in parents_g:
                    parents_g[q] = p
                    next_g.append(q)
        for p in front_x:
            for q in view.successors(p):
                if q not in parents_x:
                    parents_x[q] = p
                    next_x.append(q)
        common = [q for q in next_g if q in parents_x]
        if common:
            z = common[0]
            return _unwind(parents_g, g, z), _unwind(parents_x, x, z)
        if not next_g or not next_x:
            return None
        front_g, front_x = next_g, next_x
    return None


def _unwind(parents: tp.Dict[TNode, TNode], start: TNode, end: TNode) -> tp.List[TNode]:
    path = [end]
    while path[-1] in parents and parents[path[-1]] != start:
        path.append(parents[path[-1]])
    return path[::-1]


def verify_essential_path(view: LeveledGraph, path: tp.Sequence[TNode]) -> int:
    """
    独立验证本质路径

    Returns:
        int: 最大的 j，使第 j 层及以下每个节点都能到达某个 Γ(i)（i ≥ 其所在层）；
        第一层即失败时返回 first-1
    """
    if view.is_empty or not path:
        return view.first - 1
    gamma: tp.Dict[int, TNode] = {}
    prev = None
    for node in path:
        if node not in view.level_of:
            break
        level = view.level_of[node]
        if prev is not None and (level != view.level_of[prev] + 1 or node not in view.successors(prev)):
            break
        gamma[level] = node
        prev = node
    if not gamma:
        return view.first - 1
    top = max(gamma)
    reached: tp.Set[TNode] = {gamma[top]}
    verified_levels = {top: all(n == gamma[top] for n in view.nodes(top))}
    for level in range(top - 1, view.first - 1, -1):
        now = {
            n
            for n in view.nodes(level)
            if gamma.get(level) == n or any(q in reached for q in view.successors(n))
        }
        verified_levels[level] = len(now) == len(view.nodes(level))
        reached = now
    verified = view.first - 1
    for level in range(view.first, top + 1):
        if not verified_levels[level]:
            break
        verified = level
    return verified


def find_essential_path(view: LeveledGraph, length: int) -> tp.List[TNode]:
    """
    最早义务吸收法构造本质路径

    维护尚未证明能到达路径的节点（义务）；每次通过当前路径节点与最早义务的
    公共后代延伸路径，同时沿途推进其余义务，并把每层新节点加入义务队列。

    Args:
        view: 保留子图
        length: 路径长度（层数）

    Returns:
        tp.List[TNode]: 从 view.first 起每层一个节点

    Raises:
        ValidationError: length < 1
        PreconditionError: 有限图上输出无法通过验证（图不是本原的）
    """
    if length < 1:
        raise ValidationError(message="路径长度必须 ≥ 1", details={"length": length})
    if view.is_empty:
        raise PreconditionError(message="保留子图为空，不存在本质路径")
    end = min(view.first + length - 1, view.last)
    level = view.first
    path = [view.nodes(level)[0]]
    pending: tp.Deque[TNode] = collections.deque(n for n in view.nodes(level) if n != path[0])

    while level < end:
        walk: tp.List[TNode] = []
        oldest_walk: tp.List[TNode] = []
        if pending:
            found = _meeting_walks(view, path[-1], pending[0], end)
            if found is not None:
                walk, oldest_walk = found
            else:
                pending.rotate(-1)
        if not walk:
            successors = view.successors(path[-1])
            if not successors:
                logger.warning(f"第 {level} 层的路径节点没有后继，路径在此终止")
                break
            walk = [successors[0]]
        for step, node in enumerate(walk):
            level += 1
            path.append(node)
            advanced: tp.Deque[TNode] = collections.deque()
            for idx, rep in enumerate(pending):
                if idx == 0 and step < len(oldest_walk):
                    nxt = oldest_walk[step]
                else:
                    successors = view.successors(rep)
                    if not successors:
                        logger.debug(f"义务 {rep} 没有后继，放弃")
                        continue
                    nxt = node if node in successors else successors[0]
                if nxt != node and nxt not in advanced:
                    advanced.append(nxt)
            for n in view.nodes(level):
                if n != node and n not in advanced:
                    advanced.append(n)
            pending = advanced
            if level >= end:
                break

    verified = verify_essential_path(view, path)
    if view.final and verified < view.level_of[path[-1]]:
        raise PreconditionError(
            message="本质路径验证失败：图不是本原的",
            details={"verified_through": verified, "last": view.level_of[path[-1]]},
        )
    logger.info(f"构造了长度 {len(path)} 的本质路径，验证到第 {verified} 层")
    return path


def characteristic_matrix_units(
    path: tp.Sequence[IntervalProjection], P: TafPresentation
) -> MiChain:
    """
    本质路径的特征矩阵单位：Γ(i) = [a_i, b_i] 的右上角 e_{a_i, b_i}

    Raises:
        ConstructionError: 得到的链违反 mi-链条件
    """
    from src.core import chains

    if not path:
        raise ValidationError(message="本质路径为空")
    units = tuple(MatrixUnit(p.level, p.summand, p.a, p.b) for p in path)
    chain = MiChain(start_level=path[0].level, units=units)
    check = chains.is_mi_chain(P, chain)
    if not check.ok:
        raise ConstructionError(
            message=f"特征矩阵单位不满足条件 ({check.condition})",
            details={"level": check.level, "reason": check.message},
        )
    return chain


def _envelope_signature(diagram: EnvelopeDiagram) -> tp.Callable[[IntervalProjection], tp.Hashable]:
    P = diagram.presentation

    def signature(p: IntervalProjection):
        return P.type_of(p.level, p.summand), p.summand, diagram.node(p).maximal

    return signature


def analyze_envelope(diagram: EnvelopeDiagram, horizon: int, path_length: int) -> PrimenessVerdict:
    """
    选择合适的检验判定包络的本原性

    有限表示用顶层为最终层的有界检验；检测到保留子图周期平稳时用成对检验；
    否则用视界内的有界检验。本原时附上映射到具体节点的本质路径。

    Args:
        diagram: 包络图
        horizon: 视界
        path_length: 本质路径长度上限

    Returns:
        PrimenessVerdict: 判定结果
    """
    decided = diagram.decided_depth
    if decided < 1:
        return PrimenessVerdict(
            status=INCONCLUSIVE, method="bounded", window=0, note="第一层已有未判定的节点"
        )
    view = LeveledGraph.from_envelope(diagram, last=decided)
    if view.is_empty:
        return PrimenessVerdict(status=NOT_PRIME, method="empty", note="包络为空（J 为整个代数）")

    if view.final:
        verdict = is_prime_bounded(view, max(horizon, diagram.depth))
    else:
        folded = TypeGraph.from_view(view, _envelope_signature(diagram))
        verdict = None
        if folded is not None:
            verdict = _pairwise_on_view(view, *folded)
        if verdict is None:
            verdict = is_prime_bounded(view, horizon)

    if verdict.status != PRIMITIVE:
        logger.info(f"包络判定为 {verdict.status}")
        return verdict
    # 路径可以穿过未判定层：极大节点总是保留的
    path_view = LeveledGraph.from_envelope(diagram, last=diagram.depth)
    path = find_essential_path(path_view, min(path_length, path_view.last - path_view.first + 1))
    return dataclasses.replace(verdict, witness=tuple(path), window=view.last)


def _pairwise_on_view(
    view: LeveledGraph, graph: TypeGraph, start_level: int
) -> tp.Optional[PrimenessVerdict]:
    """在折叠后的类型图上做成对检验，并把反例映射回具体节点"""
    for level in range(view.first, start_level):
        for p in view.nodes(level):
            if not view.successors(p) and view.nodes(level + 1):
                return PrimenessVerdict(
                    status=NOT_PRIME,
                    method="pairwise",
                    counterexample=(p, view.nodes(level + 1)[0]),
                    note="周期段之前存在没有后继的保留节点",
                )
    verdict = is_prime_pairwise(graph)
    if verdict.status != NOT_PRIME or verdict.counterexample is None:
        return dataclasses.replace(verdict, window=view.last)
    x, y = verdict.counterexample
    delta = verdict.lag
    y_level = view.level_of[y]
    target_level = view.level_of[x] + delta
    if delta and target_level <= view.last:
        # 把晚 δ 层的类型映射到对应层上相同秩的节点
        shift = target_level - y_level
        rank = view.nodes(y_level).index(y)
        candidates = view.nodes(y_level + shift)
        if rank < len(candidates):
            y = candidates[rank]
    return dataclasses.replace(verdict, counterexample=(x, y), window=view.last)
