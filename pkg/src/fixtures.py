"""
命名的样例表示
REF2、STD2、SWAP、单层 T_n 与恒等嵌入的常数 T_n
"""

import re
import typing as tp

from src.config import get_settings
from src.core.diagram import extend_stationary
from src.errors import ValidationError
from src.models.diagram import LAYOUT_BLOCK, LAYOUT_INTERLEAVE, StationaryTemplate, TafPresentation


def _stationary(
    sizes: tp.Sequence[int],
    types: tp.Sequence[str],
    arms: tp.Sequence[tp.Tuple[str, str]],
    layout: tp.Dict[str, str],
    depth: int,
) -> TafPresentation:
    if depth < 1:
        raise ValidationError(message="深度必须 ≥ 1", details={"depth": depth})
    template = StationaryTemplate(
        from_level=1, types=tuple(types), arms=tuple(arms), layout=tuple(sorted(layout.items()))
    )
    P = TafPresentation(levels=(tuple(sizes),), arms=(), stationary=template)
    return extend_stationary(P, depth - 1)


def ref2(depth: tp.Optional[int] = None) -> TafPresentation:
    """T_2 → T_4 → T_8 → ...，臂 k↦2k−1 与 k↦2k"""
    depth = get_settings().depth if depth is None else depth
    return _stationary([2], ["r"], [("r", "r"), ("r", "r")], {"r": LAYOUT_INTERLEAVE}, depth)


def std2(depth: tp.Optional[int] = None) -> TafPresentation:
    """T_2 → T_4 → T_8 → ...，臂 k↦k 与 k↦k+2^i"""
    depth = get_settings().depth if depth is None else depth
    return _stationary([2], ["s"], [("s", "s"), ("s", "s")], {"s": LAYOUT_BLOCK}, depth)


def swap(depth: tp.Optional[int] = None) -> TafPresentation:
    """
    类型 a、b、t，臂 a→b、b→a、t→t、t→a；第一层尺寸都为 1

    尺寸满足 t=1、a_{i+1}=b_i+1、b_{i+1}=a_i。
    """
    depth = get_settings().depth if depth is None else depth
    return _stationary(
        [1, 1, 1],
        ["a", "b", "t"],
        [("a", "b"), ("b", "a"), ("t", "t"), ("t", "a")],
        {},
        depth,
    )


def tn(n: int) -> TafPresentation:
    """单层的 T_n"""
    if n < 1:
        raise ValidationError(message="n 必须 ≥ 1", details={"n": n})
    return TafPresentation(levels=((n,),), arms=())


def constant_tn(n: int, depth: tp.Optional[int] = None) -> TafPresentation:
    """T_n → T_n → ...，恒等嵌入"""
    if n < 1:
        raise ValidationError(message="n 必须 ≥ 1", details={"n": n})
    depth = get_settings().depth if depth is None else depth
    return _stationary([n], ["t"], [("t", "t")], {}, depth)


_NAMED = {"ref2": ref2, "std2": std2, "swap": swap}


def by_name(name: str, depth: tp.Optional[int] = None) -> TafPresentation:
    """
    按名字取样例：ref2、std2、swap、t<n>、const-t<n>

    Raises:
        ValidationError: 未知的名字
    """
    key = name.strip().lower()
    if key in _NAMED:
        return _NAMED[key](depth)
    match = re.fullmatch(r"(const-)?t(\d+)", key)
    if match is None:
        raise ValidationError(
            message=f"未知的样例 {name}",
            details={"allowed": sorted(_NAMED) + ["t<n>", "const-t<n>"]},
        )
    n = int(match.group(2))
    return constant_tn(n, depth) if match.group(1) else tn(n)
