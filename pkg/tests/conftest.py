import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")

from ckngb.system import BalanceCondition, SystemConfig
from ckngb.ttf import InterShockSpec


@pytest.fixture
def reference_config() -> SystemConfig:
    """2-out-of-4 system, r = 0.7, BC3, Erlang-2 inter-shock times."""
    return SystemConfig(4, 2, 0.7, BalanceCondition.BC3, InterShockSpec(preset="ER"))
