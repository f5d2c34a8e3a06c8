"""
穷举预言机模块
在小实例上枚举全部理想，按定义判定交不可约，并独立验证楔形分类与包络定理
"""

import dataclasses
import itertools
import logging
import typing as tp
from functools import cached_property

from src.config import get_settings
from src.core import ideals as ideal_ops
from src.core.diagram import push_matrix_unit, truncate
from src.core.envelope import build_envelope
from src.core.primitivity import analyze_envelope
from src.errors import OracleBoundError, ValidationError
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.ideal import IdealTable

logger = logging.getLogger(__name__)

TUnitSet = tp.FrozenSet[MatrixUnit]

METHOD_PROFILES = "profiles"
METHOD_GENERATORS = "generators"
METHOD_SUBSETS = "subsets"


def _sort_key(ideal: TUnitSet):
    return len(ideal), tuple(sorted(ideal))


@dataclasses.dataclass(frozen=True, eq=False)
class IdealLattice:
    """
    小实例的完整理想格

    Attributes:
        descriptor: 实例描述（如 "T_3"）
        presentation: 对应的表示
        ideals: 全部理想（矩阵单位集合），按 (大小, 单位) 排序
    """

    descriptor: str
    presentation: TafPresentation
    ideals: tp.Tuple[TUnitSet, ...]

    @cached_property
    def index(self) -> tp.Dict[TUnitSet, int]:
        return {ideal: i for i, ideal in enumerate(self.ideals)}

    @property
    def zero(self) -> TUnitSet:
        return self.ideals[0]

    @property
    def whole(self) -> TUnitSet:
        return self.ideals[-1]

    def __len__(self):
        return len(self.ideals)

    @cached_property
    def meet_table(self) -> tp.List[tp.List[int]]:
        """meet_table[i][j] 为 ideals[i] ∩ ideals[j] 的序号"""
        return [[self.index[a & b] for b in self.ideals] for a in self.ideals]

    @cached_property
    def join_table(self) -> tp.List[tp.List[int]]:
        """join_table[i][j] 为包含两者之并的最小理想的序号"""
        table = []
        for a in self.ideals:
            row = []
            for b in self.ideals:
                union = a | b
                row.append(next(i for i, c in enumerate(self.ideals) if union <= c))
            table.append(row)
        return table

    def meet_irreducible(self) -> tp.List[TUnitSet]:
        """全部真交不可约理想（不含整个代数）"""
        return [
            ideal
            for ideal in self.ideals
            if ideal != self.whole and is_meet_irreducible_bruteforce(self, ideal)[0]
        ]

    def to_dict(self) -> dict:
        mi = set(self.meet_irreducible())
        return {
            "descriptor": self.descriptor,
            "count": len(self.ideals),
            "ideals": [
                {"units": [u.to_dict() for u in sorted(ideal)], "meet_irreducible": ideal in mi}
                for ideal in self.ideals
            ],
        }


def tn_units(n: int) -> tp.List[MatrixUnit]:
    return [MatrixUnit(1, 0, k, l) for k in range(1, n + 1) for l in range(k, n + 1)]


def _profiles(n: int) -> tp.Iterator[tp.Tuple[int, ...]]:
    """全部单调不减的边界轮廓 t，k ≤ t(k) ≤ n+1"""

    def extend(prefix):
        k = len(prefix) + 1
        if k > n:
            yield tuple(prefix)
            return
        low = max(k, prefix[-1] if prefix else 1)
        for t in range(low, n + 2):
            yield from extend(prefix + [t])

    yield from extend([])


def _profile_units(level: int, summand: int, profile: tp.Sequence[int]) -> tp.Set[MatrixUnit]:
    n = len(profile)
    return {
        MatrixUnit(level, summand, k, l)
        for k in range(1, n + 1)
        for l in range(profile[k - 1], n + 1)
    }


def _is_closed(units: tp.AbstractSet[MatrixUnit], sizes: tp.Sequence[int]) -> bool:
    """(k,l) 在集合中 ⟹ 所有 k' ≤ k、l' ≥ l 的单位也在"""
    for u in units:
        n = sizes[u.summand]
        if u.row > 1 and MatrixUnit(u.level, u.summand, u.row - 1, u.col) not in units:
            return False
        if u.col < n and MatrixUnit(u.level, u.summand, u.row, u.col + 1) not in units:
            return False
    return True


def enumerate_ideals_Tn(n: int, method: str = METHOD_PROFILES) -> IdealLattice:
    """
    枚举 T_n 的全部理想

    profiles 方法遍历单调边界轮廓；subsets 方法过滤全部子集，作为独立的交叉验证。

    Raises:
        OracleBoundError: n 超过配置上限（subsets 方法还受单位数上限约束）
        ValidationError: 未知方法或 n < 1
    """
    from src.fixtures import tn

    settings = get_settings()
    if n < 1:
        raise ValidationError(message="n 必须 ≥ 1", details={"n": n})
    if n > settings.oracle_max_n:
        raise OracleBoundError(
            message=f"n={n} 超过穷举上限 TAF_ORACLE_MAX_N={settings.oracle_max_n}",
            details={"n": n},
        )
    units = tn_units(n)
    if method == METHOD_PROFILES:
        ideals = [frozenset(_profile_units(1, 0, p)) for p in _profiles(n)]
    elif method == METHOD_SUBSETS:
        if len(units) > settings.oracle_max_units:
            raise OracleBoundError(
                message=f"{len(units)} 个单位超过子集枚举上限 TAF_ORACLE_MAX_UNITS={settings.oracle_max_units}",
                details={"n": n},
            )
        ideals = []
        for mask in range(1 << len(units)):
            subset = {u for b, u in enumerate(units) if mask >> b & 1}
            if _is_closed(subset, [n]):
                ideals.append(frozenset(subset))
    else:
        raise ValidationError(message=f"未知的枚举方法 {method}")
    ideals.sort(key=_sort_key)
    logger.info(f"T_{n} 共有 {len(ideals)} 个理想（{method}）")
    return IdealLattice(descriptor=f"T_{n}", presentation=tn(n), ideals=tuple(ideals))


def wedge_ideal(n: int, i0: int, j0: int) -> TUnitSet:
    """
    楔形理想：在 i0 ≤ k ≤ l ≤ j0 的位置上为零的矩阵

    Raises:
        ValidationError: 不满足 1 ≤ i0 ≤ j0 ≤ n
    """
    if not 1 <= i0 <= j0 <= n:
        raise ValidationError(
            message=f"楔形参数必须满足 1 ≤ i0 ≤ j0 ≤ n", details={"n": n, "i0": i0, "j0": j0}
        )
    return frozenset(u for u in tn_units(n) if not (i0 <= u.row and u.col <= j0))


def is_meet_irreducible_bruteforce(
    lattice: IdealLattice, J: TUnitSet
) -> tp.Tuple[bool, tp.Optional[tp.Tuple[TUnitSet, TUnitSet]]]:
    """
    按定义判定：是否存在两个真包含 J 的理想，其交恰为 J

    整个代数空真地交不可约（由调用方标记为非真理想）。

    Returns:
        (是否交不可约, 反例理想对)

    Raises:
        ValidationError: J 不在格中
    """
    if J not in lattice.index:
        raise ValidationError(message="J 不是格中的理想")
    above = [I for I in lattice.ideals if J < I]
    for a, I1 in enumerate(above):
        for I2 in above[a + 1:]:
            if I1 & I2 == J:
                return False, (I1, I2)
    return True, None


def _pull_back(P: TafPresentation, top: TUnitSet) -> tp.Set[MatrixUnit]:
    """第一层中像全部落在 top 中的单位"""
    return {
        u for u in P.units(1) if all(v in top for v in push_matrix_unit(P, u))
    }


def _check_two_level(P: TafPresentation):
    settings = get_settings()
    if P.depth > 2:
        raise OracleBoundError(
            message="只支持一层或两层的表示", details={"depth": P.depth}
        )
    count = sum(1 for level in range(1, P.depth + 1) for _ in P.units(level))
    if count > settings.oracle_max_units:
        raise OracleBoundError(
            message=f"{count} 个矩阵单位超过上限 TAF_ORACLE_MAX_UNITS={settings.oracle_max_units}",
            details={"units": count},
        )


def enumerate_ideals_two_level(P: TafPresentation, method: str = METHOD_PROFILES) -> IdealLattice:
    """
    枚举至多两层表示的全部理想

    profiles：顶层每个分量取一个边界轮廓，第一层为像全部落在顶层集合中的单位。
    generators：对所有单位子集调用 generate_ideal 并去重。

    Raises:
        OracleBoundError: 层数或单位数超限
        ValidationError: 未知方法
    """
    _check_two_level(P)
    top = P.depth
    if method == METHOD_PROFILES:
        ideals = set()
        per_summand = [list(_profiles(n)) for n in P.levels[top - 1]]
        for combo in itertools.product(*per_summand):
            top_units = set()
            for j, profile in enumerate(combo):
                top_units |= _profile_units(top, j, profile)
            top_units = frozenset(top_units)
            units = set(top_units)
            if top == 2:
                units |= _pull_back(P, top_units)
            ideals.add(frozenset(units))
    elif method == METHOD_GENERATORS:
        units = [u for level in range(1, top + 1) for u in P.units(level)]
        ideals = set()
        for mask in range(1 << len(units)):
            subset = [u for b, u in enumerate(units) if mask >> b & 1]
            ideals.add(ideal_ops.generate_ideal(P, subset, top).unit_set())
    else:
        raise ValidationError(message=f"未知的枚举方法 {method}")
    ordered = sorted(ideals, key=_sort_key)
    logger.info(f"{top} 层表示共有 {len(ordered)} 个理想（{method}）")
    return IdealLattice(descriptor=f"{top}-level", presentation=P, ideals=tuple(ordered))


def to_table(P: TafPresentation, ideal: TUnitSet) -> IdealTable:
    """把格中的理想转换为覆盖整个表示的理想表"""
    return ideal_ops.generate_ideal(P, sorted(ideal), P.depth)


@dataclasses.dataclass(frozen=True)
class WedgeReport:
    """楔形分类验证报告"""

    n: int
    ideal_count: int
    mi_count: int
    expected: int
    agrees: bool
    wedges: tp.Tuple[tp.Tuple[int, int], ...]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["wedges"] = [list(w) for w in self.wedges]
        return d


def verify_wedge_theorem(n: int) -> WedgeReport:
    """
    真交不可约理想恰为楔形理想，共 n(n+1)/2 个
    """
    lattice = enumerate_ideals_Tn(n)
    mi = set(lattice.meet_irreducible())
    wedges = {
        (i0, j0): wedge_ideal(n, i0, j0)
        for i0 in range(1, n + 1)
        for j0 in range(i0, n + 1)
    }
    expected = n * (n + 1) // 2
    agrees = mi == set(wedges.values()) and len(mi) == expected
    if not agrees:
        logger.warning(f"T_{n} 的交不可约理想与楔形理想不一致")
    return WedgeReport(
        n=n,
        ideal_count=len(lattice),
        mi_count=len(mi),
        expected=expected,
        agrees=agrees,
        wedges=tuple(sorted(wedges)),
    )


@dataclasses.dataclass(frozen=True)
class EnvelopeTheoremReport:
    """包络定理验证报告"""

    descriptor: str
    checked: int
    meet_irreducible: int
    disagreements: tp.Tuple[tp.Tuple[MatrixUnit, ...], ...] = ()
    methods_agree: tp.Optional[bool] = None

    @property
    def agrees(self) -> bool:
        return not self.disagreements and self.methods_agree is not False

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "checked": self.checked,
            "meet_irreducible": self.meet_irreducible,
            "methods_agree": self.methods_agree,
            "agrees": self.agrees,
            "disagreements": [[u.to_dict() for u in ideal] for ideal in self.disagreements],
        }


def _compare_envelope(
    lattice: IdealLattice, P: TafPresentation, horizon: int
) -> tp.Tuple[int, int, tp.List[tp.Tuple[MatrixUnit, ...]]]:
    """对格中每个真理想比较包络本原性与穷举交不可约性"""
    checked = 0
    mi_count = 0
    disagreements = []
    for ideal in lattice.ideals:
        if ideal == lattice.whole:
            continue
        checked += 1
        mi, _ = is_meet_irreducible_bruteforce(lattice, ideal)
        mi_count += mi
        table = to_table(P, ideal)
        envelope = build_envelope(P, table, P.depth, horizon)
        primitive = analyze_envelope(envelope, horizon, P.depth).is_primitive
        if primitive != mi:
            logger.warning(f"{lattice.descriptor}: 理想 {sorted(ideal)} 上包络判定与穷举不一致")
            disagreements.append(tuple(sorted(ideal)))
    return checked, mi_count, disagreements


def verify_envelope_theorem(n: int, horizon: tp.Optional[int] = None) -> EnvelopeTheoremReport:
    """
    对 T_n 的每个真理想验证：包络本原 ⟺ 穷举交不可约
    """
    horizon = get_settings().horizon if horizon is None else horizon
    lattice = enumerate_ideals_Tn(n)
    checked, mi_count, disagreements = _compare_envelope(lattice, lattice.presentation, horizon)
    return EnvelopeTheoremReport(
        descriptor=lattice.descriptor,
        checked=checked,
        meet_irreducible=mi_count,
        disagreements=tuple(disagreements),
    )


def verify_envelope_theorem_two_level(
    P: TafPresentation, horizon: tp.Optional[int] = None
) -> EnvelopeTheoremReport:
    """
    两层表示上的包络定理验证，同时比较两种枚举方法

    表示先截断为不带模板的有限系统，顶层即最终层。
    """
    horizon = get_settings().horizon if horizon is None else horizon
    finite = truncate(P, P.depth)
    lattice = enumerate_ideals_two_level(finite, METHOD_PROFILES)
    by_generators = enumerate_ideals_two_level(finite, METHOD_GENERATORS)
    methods_agree = set(lattice.ideals) == set(by_generators.ideals)
    if not methods_agree:
        logger.warning("两种枚举方法得到的理想格不一致")
    checked, mi_count, disagreements = _compare_envelope(lattice, finite, horizon)
    return EnvelopeTheoremReport(
        descriptor=lattice.descriptor,
        checked=checked,
        meet_irreducible=mi_count,
        disagreements=tuple(disagreements),
        methods_agree=methods_agree,
    )
