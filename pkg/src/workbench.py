"""
工作台命令调度
解析输入文件、按命令调用计算模块，并把结果整理为报告与退出码
"""

import dataclasses
import logging
import typing as tp

from src.config import Settings, get_settings
from src.core import chains, ideals as ideal_ops, meet, nest, oracle
from src.core.diagram import at_depth, summand_graph, truncate, validate_presentation
from src.core.envelope import build_envelope
from src.core.primitivity import analyze_envelope
from src.errors import ConstructionError, DataParseError, ValidationError
from src.fixtures import by_name
from src.models.base import BaseModel
from src.models.chain import MiChain
from src.models.diagram import MatrixUnit, TafPresentation
from src.models.ideal import IdealDocument, IdealTable
from src.models.verdict import INCONCLUSIVE, NO, NOT_PRIME, PRIMITIVE, UNKNOWN, YES
from src.utils import color, load_from_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONSTRUCTION = ConstructionError.code

COMMANDS = (
    "validate",
    "ideal-gen",
    "ideal-op",
    "envelope",
    "prime-check",
    "mi-check",
    "chain-check",
    "chain-to-ideal",
    "ideal-to-chain",
    "rep-stage",
    "oracle-wedge",
    "oracle-envelope",
)
IDEAL_OPS = ("meet", "join", "contains")

_PRIMENESS_EXIT = {PRIMITIVE: EXIT_OK, NOT_PRIME: EXIT_NO, INCONCLUSIVE: EXIT_INCONCLUSIVE}
_MEET_EXIT = {YES: EXIT_OK, NO: EXIT_NO, UNKNOWN: EXIT_INCONCLUSIVE}


@dataclasses.dataclass(frozen=True)
class RunConfig(BaseModel):
    """
    一次运行的参数

    Attributes:
        command: 命令名
        presentation: 表示文件路径
        fixture: 样例名（与 presentation 二选一）
        ideal: 理想文件路径（缺省为零理想）
        ideal2: 第二个理想文件（ideal-op 使用）
        chain: 链文件路径
        units: 矩阵单位列表文件路径
        n: oracle 命令的 T_n 大小
        op: ideal-op 的运算
        depth: 工作深度 D
        horizon: 视界 h
        method: 判定方法
        rule: 状态链选取规则
        output: 报告输出路径
        format: json 或 text
    """

    command: str
    presentation: tp.Optional[str] = None
    fixture: tp.Optional[str] = None
    ideal: tp.Optional[str] = None
    ideal2: tp.Optional[str] = None
    chain: tp.Optional[str] = None
    units: tp.Optional[str] = None
    n: tp.Optional[int] = None
    op: tp.Optional[str] = None
    depth: tp.Optional[int] = None
    horizon: tp.Optional[int] = None
    method: tp.Optional[str] = None
    rule: str = nest.RULE_LEFTMOST
    output: tp.Optional[str] = None
    format: str = "json"

    def validate(self):
        """
        Raises:
            ValidationError: 参数取值不合法
        """
        if self.command not in COMMANDS:
            raise ValidationError(
                message=f"未知命令 {self.command}", details={"allowed": list(COMMANDS)}
            )
        if self.depth is not None and self.depth < 1:
            raise ValidationError(message="--depth 必须 ≥ 1", details={"depth": self.depth})
        if self.horizon is not None and self.horizon < 1:
            raise ValidationError(message="--horizon 必须 ≥ 1", details={"horizon": self.horizon})
        if self.n is not None and self.n < 1:
            raise ValidationError(message="--n 必须 ≥ 1", details={"n": self.n})
        if self.format not in ("json", "text"):
            raise ValidationError(message="--format 必须是 json 或 text")
        if self.presentation and self.fixture:
            raise ValidationError(message="--presentation 与 --fixture 不能同时给出")


@dataclasses.dataclass(frozen=True)
class CommandResult:
    """命令结果：退出码、报告文档与一行摘要"""

    exit_code: int
    report: dict
    summary: str

    def render_text(self) -> str:
        return color.for_exit(self.summary, self.exit_code)


class Workbench:
    """
    命令调度器
    负责加载输入、把平稳表示展开到所需深度，并把各模块的结果映射为退出码
    """

    def __init__(self, config: RunConfig, settings: tp.Optional[Settings] = None):
        config.validate()
        self.config = config
        self.settings = settings or get_settings()

    @property
    def horizon(self) -> int:
        return self.config.horizon if self.config.horizon is not None else self.settings.horizon

    # ----------- 输入 -----------

    def load_presentation(self) -> TafPresentation:
        """
        Raises:
            ValidationError: 没有给出表示
            DataParseError: 文件不符合格式
        """
        if self.config.fixture:
            return by_name(self.config.fixture, self.config.depth)
        if not self.config.presentation:
            raise ValidationError(message="需要 --presentation 或 --fixture")
        d = load_from_file(self.config.presentation)
        return TafPresentation.load(d, where=self.config.presentation)

    def working_depth(self, P: TafPresentation) -> int:
        """工作深度：--depth，否则配置值；有限表示不超过自身深度"""
        if self.config.depth is not None:
            return self.config.depth
        if P.is_stationary:
            return self.settings.depth
        return min(self.settings.depth, P.depth)

    def extend(self, P: TafPresentation, depth: int) -> TafPresentation:
        """平稳表示展开到 depth 层（有限表示超深时抛出 DepthError）"""
        if depth > P.depth:
            if P.is_stationary:
                logger.info(f"平稳表示从 {P.depth} 层展开到 {depth} 层")
            return at_depth(P, depth)
        return P

    def prepared(self) -> tp.Tuple[TafPresentation, int]:
        """加载表示并展开到 D + h 层（有限表示保持原样）"""
        P = self.load_presentation()
        D = self.working_depth(P)
        if P.is_stationary:
            P = self.extend(P, D + self.horizon)
        elif D > P.depth:
            P = self.extend(P, D)
        return P, D

    def load_ideal(self, path: tp.Optional[str], P: TafPresentation) -> IdealTable:
        """
        读取理想文件（对象 {generators, depth} 或生成元列表），缺省为零理想

        理想表覆盖 P 的全部已展开层。
        """
        if path is None:
            return ideal_ops.zero_ideal(P, P.depth)
        d = load_from_file(path)
        if isinstance(d, list):
            d = {"generators": d}
        doc = IdealDocument.load(d, where=path)
        return ideal_ops.generate_ideal(P, doc.generators, P.depth)

    def load_chain(self) -> MiChain:
        if not self.config.chain:
            raise ValidationError(message="需要 --chain")
        return MiChain.load(load_from_file(self.config.chain), where=self.config.chain)

    def load_units(self) -> tp.Optional[tp.List[MatrixUnit]]:
        if not self.config.units:
            return None
        d = load_from_file(self.config.units)
        if isinstance(d, dict):
            d = d.get("units")
        if not isinstance(d, list):
            raise DataParseError(
                message="单位文件必须是列表或 {units: [...]}", details={"file": self.config.units}
            )
        return [MatrixUnit.load(u, where=f"{self.config.units}[{i}]") for i, u in enumerate(d)]

    # ----------- 命令 -----------

    def run(self) -> CommandResult:
        handler = getattr(self, "cmd_" + self.config.command.replace("-", "_"))
        logger.info(f"执行命令 {self.config.command}")
        result = handler()
        logger.info(f"命令 {self.config.command} 结束，退出码 {result.exit_code}")
        return result

    def cmd_validate(self) -> CommandResult:
        P = self.load_presentation()
        violations = validate_presentation(P)
        report = {
            "valid": not violations,
            "depth": P.depth,
            "violations": [v.to_dict() for v in violations],
            "summand_graph": summand_graph(P).to_dict(),
        }
        if violations:
            return CommandResult(EXIT_NO, report, f"表示不合法：{len(violations)} 处违反")
        return CommandResult(EXIT_OK, report, f"表示合法（{P.depth} 层）")

    def cmd_ideal_gen(self) -> CommandResult:
        P, D = self.prepared()
        table = ideal_ops.restrict(self.load_ideal(self.config.ideal, P), D)
        report = {"ideal": table.to_dict()}
        units = self.load_units()
        if units:
            report["membership"] = [
                {"unit": u.to_dict(), "membership": ideal_ops.membership(table, u)} for u in units
            ]
        return CommandResult(EXIT_OK, report, f"生成了深度 {D} 的理想表")

    def cmd_ideal_op(self) -> CommandResult:
        op = self.config.op
        if op not in IDEAL_OPS:
            raise ValidationError(message="--op 必须是 meet、join 或 contains", details={"op": op})
        if not self.config.ideal or not self.config.ideal2:
            raise ValidationError(message="ideal-op 需要 --ideal 与 --ideal2")
        P, D = self.prepared()
        T1 = self.load_ideal(self.config.ideal, P)
        T2 = self.load_ideal(self.config.ideal2, P)
        if op == "contains":
            result = ideal_ops.contains(T1, T2)
            code = EXIT_OK if result else EXIT_NO
            return CommandResult(code, {"contains": result}, f"I1 ⊇ I2：{result}")
        table = ideal_ops.intersect(T1, T2) if op == "meet" else ideal_ops.join(P, T1, T2)
        table = ideal_ops.restrict(table, D)
        return CommandResult(EXIT_OK, {"ideal": table.to_dict()}, f"{op} 完成（深度 {D}）")

    def cmd_envelope(self) -> CommandResult:
        P, D = self.prepared()
        J = self.load_ideal(self.config.ideal, P)
        diagram = build_envelope(P, J, D, self.horizon)
        report = {"envelope": diagram.to_dict()}
        if diagram.decided_depth < D:
            return CommandResult(
                EXIT_INCONCLUSIVE, report, f"包络在第 {diagram.decided_depth + 1} 层起有未判定节点"
            )
        return CommandResult(EXIT_OK, report, f"包络构造完成（{diagram.kept_method}）")

    def cmd_prime_check(self) -> CommandResult:
        P, D = self.prepared()
        J = self.load_ideal(self.config.ideal, P)
        diagram = build_envelope(P, J, D, self.horizon)
        verdict = analyze_envelope(diagram, self.horizon, self.settings.path_length)
        summary = f"包络素性：{verdict.status}（{verdict.method}）"
        if verdict.counterexample:
            x, y = verdict.counterexample
            summary += f"，反例 {x} / {y}"
        return CommandResult(_PRIMENESS_EXIT[verdict.status], {"verdict": verdict.to_dict()}, summary)

    def cmd_mi_check(self) -> CommandResult:
        method = self.config.method or meet.METHOD_ENVELOPE
        if method == meet.METHOD_BRUTEFORCE:
            # 穷举只看前 D 层构成的有限系统
            P = self.load_presentation()
            D = self.working_depth(P)
            P = truncate(self.extend(P, D), D)
        else:
            P, D = self.prepared()
        J = self.load_ideal(self.config.ideal, P)
        verdict = meet.is_meet_irreducible(P, J, method=method, horizon=self.horizon, depth=D)
        summary = f"交不可约：{verdict.status}（{verdict.method}）"
        if verdict.improper:
            summary += "，J 是整个代数"
        return CommandResult(_MEET_EXIT[verdict.status], {"verdict": verdict.to_dict()}, summary)

    def cmd_chain_check(self) -> CommandResult:
        P = self.load_presentation()
        chain = self.load_chain()
        if chain.units:
            P = self.extend(P, chain.last_level)
        check = chains.is_mi_chain(P, chain)
        report = {"check": check.to_dict()}
        if check.ok:
            return CommandResult(EXIT_OK, report, "是 mi-链")
        return CommandResult(
            EXIT_NO, report, f"不是 mi-链：第 {check.level} 层违反条件 ({check.condition})"
        )

    def cmd_chain_to_ideal(self) -> CommandResult:
        P, D = self.prepared()
        chain = self.load_chain()
        result = chains.ideal_from_mi_chain(P, chain, D, self.horizon)
        if result.violations:
            return CommandResult(
                EXIT_CONSTRUCTION,
                result.to_dict(),
                f"诱导理想包含 {len(result.violations)} 个链单位，链不满足 mi-链条件",
            )
        return CommandResult(
            EXIT_OK,
            result.to_dict(),
            f"诱导理想：深度 {D}，可靠深度 {result.reliable_depth}",
        )

    def cmd_ideal_to_chain(self) -> CommandResult:
        P, D = self.prepared()
        J = self.load_ideal(self.config.ideal, P)
        chain = chains.mi_chain_from_ideal(P, J, D, self.horizon, self.settings.path_length)
        return CommandResult(
            EXIT_OK, {"chain": chain.to_dict()}, f"特征 mi-链：{len(chain.units)} 个单位"
        )

    def cmd_rep_stage(self) -> CommandResult:
        P, D = self.prepared()
        J = self.load_ideal(self.config.ideal, P)
        rep = nest.build_nest_representation(P, J, D, self.horizon, self.config.rule, D)
        d = rep.chain.last
        units = self.load_units()
        if units is None:
            units = [u for level in range(1, min(d, 2) + 1) for u in P.units(level)]
        stage = nest.finite_gns_stage(rep, d, units)
        nest_report = nest.check_nest(stage)
        kernel = nest.kernel_check(rep, units, d)
        violations = [e for e in kernel if e.status == nest.KERNEL_VIOLATION]
        report = {
            "chain": rep.chain.to_dict(),
            "stage": stage.to_dict(),
            "nest": nest_report.to_dict(),
            "kernel": [e.to_dict() for e in kernel],
        }
        if violations or not nest_report.full_stage_nest:
            return CommandResult(EXIT_NO, report, f"第 {d} 阶段检查失败：{len(violations)} 个核违反")
        return CommandResult(EXIT_OK, report, f"第 {d} 阶段：维数 {stage.dimension}，巢检查通过")

    def _oracle_sizes(self) -> tp.List[int]:
        if self.config.n is not None:
            return [self.config.n]
        return list(range(1, min(5, self.settings.oracle_max_n) + 1))

    def cmd_oracle_wedge(self) -> CommandResult:
        reports = [oracle.verify_wedge_theorem(n) for n in self._oracle_sizes()]
        ok = all(r.agrees for r in reports)
        report = {"reports": [r.to_dict() for r in reports], "agrees": ok}
        return CommandResult(
            EXIT_OK if ok else EXIT_NO, report, f"楔形分类{'一致' if ok else '不一致'}"
        )

    def cmd_oracle_envelope(self) -> CommandResult:
        if self.config.presentation or self.config.fixture:
            P = self.load_presentation()
            depth = min(P.depth, 2) if self.config.depth is None else self.config.depth
            P = self.extend(P, depth) if depth > P.depth else at_depth(P, depth)
            reports = [oracle.verify_envelope_theorem_two_level(P, self.horizon)]
        else:
            reports = [oracle.verify_envelope_theorem(n, self.horizon) for n in self._oracle_sizes()]
        ok = all(r.agrees for r in reports)
        report = {"reports": [r.to_dict() for r in reports], "agrees": ok}
        return CommandResult(
            EXIT_OK if ok else EXIT_NO, report, f"包络定理{'一致' if ok else '不一致'}"
        )
