"""
测试共享夹具
"""

import random
from pathlib import Path

import pytest

from src.core import ideals as ideal_ops
from src.core import nest
from src.core.envelope import build_envelope
from src.fixtures import ref2, std2, swap
from src.models.diagram import EmbeddingArm, TafPresentation

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    for key in ("TAF_ORACLE_MAX_N", "TAF_ORACLE_MAX_UNITS", "TAF_DEPTH", "TAF_HORIZON", "TAF_PATH_LENGTH", "DEBUG"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("TAF_LOG_FILE", str(tmp_path / "test.log"))


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def ref2_deep():
    """REF2 展开到 D+h = 9 层"""
    return ref2(9)


@pytest.fixture(scope="session")
def ref2_envelope(ref2_deep):
    """REF2、J = 0、D = 6、h = 3 的包络"""
    J = ideal_ops.zero_ideal(ref2_deep, ref2_deep.depth)
    return build_envelope(ref2_deep, J, 6, 3)


@pytest.fixture(scope="session")
def std2_envelope():
    P = std2(9)
    return build_envelope(P, ideal_ops.zero_ideal(P, P.depth), 6, 3)


@pytest.fixture(scope="session")
def swap_envelope():
    P = swap(6)
    return build_envelope(P, ideal_ops.zero_ideal(P, P.depth), 4, 2)


@pytest.fixture(scope="session")
def ref2_rep(ref2_deep):
    """REF2、J = 0 的巢表示（leftmost）"""
    J = ideal_ops.zero_ideal(ref2_deep, ref2_deep.depth)
    return nest.build_nest_representation(ref2_deep, J, 6, 3)


def random_presentation(rng: random.Random, max_levels: int = 4, max_summands: int = 3) -> TafPresentation:
    """
    随机生成合法表示：每个目标分量的位置被随机划分给入臂，每块排序后作为注入
    """
    depth = rng.randint(1, max_levels)
    levels = [tuple(rng.randint(1, 3) for _ in range(rng.randint(1, max_summands)))]
    arms = []
    for level in range(1, depth):
        sources = levels[-1]
        # 每个源分量至少一条出臂
        feeds = [[] for _ in range(rng.randint(1, max_summands))]
        for s in range(len(sources)):
            feeds[rng.randrange(len(feeds))].append(s)
        for _ in range(rng.randint(0, 2)):
            feeds[rng.randrange(len(feeds))].append(rng.randrange(len(sources)))
        for target in feeds:
            if not target:
                target.append(rng.randrange(len(sources)))
        sizes = []
        for t, target in enumerate(feeds):
            size = sum(sources[s] for s in target)
            positions = list(range(1, size + 1))
            rng.shuffle(positions)
            offset = 0
            for s in target:
                chunk = sorted(positions[offset:offset + sources[s]])
                offset += sources[s]
                arms.append(EmbeddingArm(level, s, t, tuple(chunk)))
            sizes.append(size)
        levels.append(tuple(sizes))
    return TafPresentation(levels=tuple(levels), arms=tuple(arms))
