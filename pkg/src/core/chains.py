"""
mi-链工具模块
mi-链的检查、由链诱导的理想，以及交不可约理想到 mi-链的构造
"""

import dataclasses
import logging
import typing as tp

from src.core import ideals as ideal_ops
from src.core.diagram import check_unit, push_matrix_unit
from src.core.envelope import build_envelope
from src.core.primitivity import analyze_envelope, characteristic_matrix_units
from src.errors import DepthError, PreconditionError, ValidationError, WorkbenchError
from src.models.chain import ChainCheck, MiChain
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.ideal import ClosedSet, IdealTable

logger = logging.getLogger(__name__)


def is_mi_chain(P: TafPresentation, chain: MiChain) -> ChainCheck:
    """
    检查 mi-链条件

    (A) 第 i 个单位是第 i 层的合法矩阵单位（层连续）；
    (B) e_{i+1} 属于 e_i 推进一层后生成的层内理想。

    Returns:
        ChainCheck: 是否为 mi-链及第一个违反的条件
    """
    if not chain.units:
        return ChainCheck(ok=False, condition="A", level=chain.start_level, message="链为空")
    for offset, u in enumerate(chain.units):
        level = chain.start_level + offset
        if u.level != level:
            return ChainCheck(
                ok=False,
                condition="A",
                level=level,
                message=f"第 {offset} 个单位位于第 {u.level} 层，应为第 {level} 层",
            )
        try:
            check_unit(P, u)
        except WorkbenchError as e:
            return ChainCheck(ok=False, condition="A", level=level, message=e.message)
    for e, f in zip(chain.units, chain.units[1:]):
        pushed = [(v.row, v.col) for v in push_matrix_unit(P, e) if v.summand == f.summand]
        closed = ClosedSet.from_pairs(P.size(f.level, f.summand), pushed)
        if (f.row, f.col) not in closed:
            return ChainCheck(
                ok=False,
                condition="B",
                level=f.level,
                message=f"{f} 不在 {e} 生成的第 {f.level} 层理想中",
            )
    return ChainCheck(ok=True)


@dataclasses.dataclass(frozen=True)
class ChainIdeal:
    """
    由 mi-链诱导的理想

    Attributes:
        table: 理想表
        exact: 所有判定是否都由周期检测确定
        reliable_depth: 判定至少有 h 层前瞻的最后一层
        violations: 理想中出现的链单位（正常情况下为空）
    """

    table: IdealTable
    exact: bool
    reliable_depth: int
    violations: tp.Tuple[MatrixUnit, ...] = ()

    def to_dict(self) -> dict:
        return {
            "exact": self.exact,
            "reliable_depth": self.reliable_depth,
            "violations": [u.to_dict() for u in self.violations],
            "ideal": self.table.to_dict(),
        }


def _avoids_chain(
    P: TafPresentation, chain: MiChain, u: MatrixUnit, end: int
) -> tp.Tuple[bool, bool]:
    """
    u 生成的理想在 [max(level(u), N), end] 上是否不含链单位

    Returns:
        (是否避开, 是否由构型循环确定)
    """
    sizes = P.levels[u.level - 1]
    current = [ClosedSet.empty(n) for n in sizes]
    current[u.summand] = ClosedSet.from_pairs(sizes[u.summand], [(u.row, u.col)])
    seen: tp.Dict[tp.Hashable, int] = {}
    level = u.level
    while True:
        e = chain.at(level)
        if level >= chain.start_level and e is not None and (e.row, e.col) in current[e.summand]:
            return False, True
        if (
            P.stationary is not None
            and level >= max(chain.start_level, P.stationary.from_level)
            and e is not None
        ):
            key = (P.levels[level - 1], tuple(current), (e.summand, e.row, e.col))
            first = seen.get(key)
            if first is not None and _chain_periodic(chain, first, level - first, end):
                return True, True
            seen[key] = level
        if level >= end:
            return True, P.stationary is None and end == P.depth
        current = _push_sets(P, current, level)
        level += 1


def _chain_periodic(chain: MiChain, start: int, period: int, end: int) -> bool:
    """链在 [start, end] 上是否以 period 为周期（比较分量与行列）"""
    for level in range(start, end - period + 1):
        a, b = chain.at(level), chain.at(level + period)
        if a is None or b is None or (a.summand, a.row, a.col) != (b.summand, b.row, b.col):
            return False
    return True


def _push_sets(P: TafPresentation, sets: tp.List[ClosedSet], level: int) -> tp.List[ClosedSet]:
    pairs: tp.Dict[int, tp.List[tp.Tuple[int, int]]] = {}
    for j, cs in enumerate(sets):
        corners = cs.corners()
        if not corners:
            continue
        for arm in P.arms_from(level, j):
            pairs.setdefault(arm.target, []).extend((arm(k), arm(l)) for k, l in corners)
    return [ClosedSet.from_pairs(n, pairs.get(q, ())) for q, n in enumerate(P.levels[level])]


def ideal_from_mi_chain(P: TafPresentation, chain: MiChain, D: int, horizon: int) -> ChainIdeal:
    """
    由 mi-链诱导的理想：所有不含任何链单位的理想的并

    单位 u 属于理想当且仅当它生成的理想（前向计算到公共前瞻层）不含链单位；
    再按 generate_ideal 的规则反向饱和。平稳表示上检测到构型循环时判定是精确的。

    Args:
        P: 表示
        chain: mi-链
        D: 理想表深度
        horizon: 视界 h ≥ 0

    Returns:
        ChainIdeal: 理想表及其可靠深度

    Raises:
        ValidationError: horizon < 0
        DepthError: D 超出表示或链的范围
    """
    if horizon < 0:
        raise ValidationError(message="视界不能为负", details={"horizon": horizon})
    if not chain.units:
        raise ValidationError(message="链为空")
    end = min(P.depth, chain.last_level)
    if not 1 <= D <= end:
        raise DepthError(
            message=f"深度 {D} 必须在 [1, {end}] 内（受表示深度与链范围限制）",
            details={"depth": D, "chain_last": chain.last_level},
        )
    exact = True
    sets = []
    for level in range(1, D + 1):
        level_sets = []
        for j, n in enumerate(P.levels[level - 1]):
            best = [n + 1] * (n + 2)
            for k in range(1, n + 1):
                for l in range(k, n + 1):
                    avoids, decided = _avoids_chain(P, chain, MatrixUnit(level, j, k, l), end)
                    if avoids:
                        exact = exact and decided
                        best[k] = min(best[k], l)
                        break
            level_sets.append(ClosedSet.from_pairs(n, [(k, best[k]) for k in range(1, n + 1) if best[k] <= n]))
        sets.append(level_sets)
    sets = ideal_ops.saturate(P, ideal_ops.forward_close(P, sets))
    table = ideal_ops.make_table(
        P, sets, exact=exact, qualifier="exact" if exact else "depth-qualified"
    )
    violations = tuple(
        e for e in chain.units if e.level <= D and table.contains_unit(e)
    )
    if violations:
        logger.warning(f"诱导理想包含 {len(violations)} 个链单位")
    reliable = D if exact else max(0, min(D, end - horizon))
    logger.info(f"由链诱导了深度 {D} 的理想（可靠深度 {reliable}，精确={exact}）")
    return ChainIdeal(table=table, exact=exact, reliable_depth=reliable, violations=violations)


def mi_chain_from_ideal(
    P: TafPresentation, J: IdealTable, D: int, horizon: int, path_length: tp.Optional[int] = None
) -> MiChain:
    """
    交不可约理想的特征 mi-链：包络 → 本质路径 → 特征矩阵单位

    Raises:
        PreconditionError: 包络不是本原的
    """
    envelope = build_envelope(P, J, D, horizon)
    verdict = analyze_envelope(envelope, horizon, path_length or D)
    if not verdict.is_primitive:
        raise PreconditionError(
            message=f"包络不是本原的（{verdict.status}），J 不是交不可约理想",
            details={"counterexample": verdict.counterexample},
        )
    return characteristic_matrix_units(list(verdict.witness), P)
