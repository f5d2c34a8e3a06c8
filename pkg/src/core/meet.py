"""
交不可约判定模块
通过包络的本原性（或小实例上的穷举）判定理想是否交不可约，并给出反例理想对
"""

import dataclasses
import logging
import typing as tp

from src.config import get_settings
from src.core import ideals as ideal_ops
from src.core import oracle
from src.core.envelope import build_envelope
from src.core.primitivity import analyze_envelope
from src.errors import OracleBoundError, ValidationError
from src.models.base import BaseModel
from src.models.diagram import TafPresentation
from src.models.envelope import IntervalProjection
from src.models.ideal import IdealTable
from src.models.verdict import INCONCLUSIVE, NO, PRIMITIVE, UNKNOWN, YES, PrimenessVerdict

logger = logging.getLogger(__name__)

METHOD_ENVELOPE = "envelope"
METHOD_BRUTEFORCE = "bruteforce"


@dataclasses.dataclass(frozen=True)
class MeetVerdict(BaseModel):
    """
    交不可约判定结果

    Attributes:
        status: yes / no / inconclusive-at-depth
        method: envelope / bruteforce
        witness: 反例理想对 (I1, I2)，满足 I1 ∩ I2 = J 且都真包含 J
        primeness: 包络方法下的素性判定
        improper: J 是否为整个代数
        note: 说明
    """

    status: str
    method: str
    witness: tp.Optional[tp.Tuple[IdealTable, IdealTable]] = None
    primeness: tp.Optional[PrimenessVerdict] = None
    improper: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "method": self.method,
            "improper": self.improper,
            "note": self.note,
            "primeness": self.primeness.to_dict() if self.primeness else None,
            "witness": (
                [
                    {"generators": [u.to_dict() for u in t.generators()], "depth": t.depth}
                    for t in self.witness
                ]
                if self.witness
                else None
            ),
        }


def _corner_ideal(P: TafPresentation, J: IdealTable, node: IntervalProjection) -> IdealTable:
    """J ∨ Id(节点右上角)"""
    generated = ideal_ops.generate_ideal(P, [node.corner], J.depth)
    return ideal_ops.join(P, J, generated)


def _witness_from_pairs(
    P: TafPresentation, J: IdealTable, pairs: tp.Sequence[tp.Tuple[tp.Any, tp.Any]]
) -> tp.Optional[tp.Tuple[IdealTable, IdealTable]]:
    """依次尝试失败节点对，返回第一个满足 I1 ∩ I2 = J 的理想对"""
    for x, y in pairs:
        if not isinstance(x, IntervalProjection) or not isinstance(y, IntervalProjection):
            continue
        if x.level > J.depth or y.level > J.depth:
            continue
        I1 = _corner_ideal(P, J, x)
        I2 = _corner_ideal(P, J, y)
        meet = ideal_ops.intersect(I1, I2)
        if ideal_ops.equal_at_depth(meet, J) and not ideal_ops.equal_at_depth(I1, J) and not ideal_ops.equal_at_depth(I2, J):
            return I1, I2
        logger.debug(f"节点对 ({x}, {y}) 给出的理想对交不等于 J，尝试下一对")
    return None


def is_meet_irreducible(
    P: TafPresentation,
    J: IdealTable,
    method: str = METHOD_ENVELOPE,
    horizon: tp.Optional[int] = None,
    depth: tp.Optional[int] = None,
) -> MeetVerdict:
    """
    判定 J 是否交不可约

    envelope 方法构造包络并判定本原性；否定时由失败节点对的右上角单位生成
    I1 = J ∨ Id(x)、I2 = J ∨ Id(y)，并在工作深度上确认 I1 ∩ I2 = J。
    bruteforce 方法在至多两层的小表示上穷举理想格。

    Args:
        P: 表示
        J: 理想表
        method: envelope 或 bruteforce
        horizon: 视界（默认取配置）
        depth: 包络深度（默认 J 的深度）

    Returns:
        MeetVerdict: 判定结果

    Raises:
        ValidationError: 未知方法
        OracleBoundError: 穷举实例超出规模上限
    """
    settings = get_settings()
    horizon = settings.horizon if horizon is None else horizon
    if method == METHOD_BRUTEFORCE:
        return _bruteforce(P, J)
    if method != METHOD_ENVELOPE:
        raise ValidationError(
            message=f"未知的判定方法 {method}", details={"allowed": [METHOD_ENVELOPE, METHOD_BRUTEFORCE]}
        )
    D = min(J.depth, P.depth) if depth is None else depth
    envelope = build_envelope(P, J, D, horizon)
    verdict = analyze_envelope(envelope, horizon, settings.path_length)
    if verdict.status == PRIMITIVE:
        return MeetVerdict(status=YES, method=method, primeness=verdict)
    if verdict.status == INCONCLUSIVE:
        return MeetVerdict(
            status=UNKNOWN, method=method, primeness=verdict, note=verdict.note
        )
    improper = verdict.method == "empty"
    if improper:
        return MeetVerdict(
            status=NO, method=method, primeness=verdict, improper=True, note="J 是整个代数"
        )
    pairs = list(verdict.pairs) or ([verdict.counterexample] if verdict.counterexample else [])
    witness = _witness_from_pairs(P, J, pairs)
    note = ""
    if witness is None:
        note = "未能在工作深度上构造出满足 I1 ∩ I2 = J 的理想对"
        logger.warning(note)
    return MeetVerdict(status=NO, method=method, witness=witness, primeness=verdict, note=note)


def _bruteforce(P: TafPresentation, J: IdealTable) -> MeetVerdict:
    """在至多两层的表示上用理想格穷举判定"""
    if P.depth > 2:
        raise OracleBoundError(
            message="穷举判定只支持一层或两层的表示", details={"depth": P.depth}
        )
    if J.depth < P.depth:
        raise ValidationError(
            message="穷举判定需要覆盖整个表示的理想表",
            details={"ideal_depth": J.depth, "presentation_depth": P.depth},
        )
    lattice = oracle.enumerate_ideals_two_level(P)
    target = J.unit_set(P.depth)
    if target not in lattice.index:
        raise ValidationError(message="J 不在理想格中（理想表未饱和或不一致）")
    mi, witness = oracle.is_meet_irreducible_bruteforce(lattice, target)
    improper = target == lattice.whole
    if mi:
        return MeetVerdict(
            status=YES,
            method=METHOD_BRUTEFORCE,
            improper=improper,
            note="整个代数：空真意义下成立，不计入交不可约理想" if improper else "",
        )
    I1, I2 = (oracle.to_table(P, s) for s in witness)
    return MeetVerdict(status=NO, method=METHOD_BRUTEFORCE, witness=(I1, I2))
