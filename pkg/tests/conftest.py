from __future__ import annotations

import pytest

from lamsa import ModelVariant, SystemParams

# Reference parameter set used for every published number: m=1, M=5, R=5,
# k=1, p0=10 (model units).
REF_SADDLE_P = 4.64383
REF_SADDLE_FL = -15.0


@pytest.fixture
def params() -> SystemParams:
    return SystemParams()


@pytest.fixture
def cc_params() -> SystemParams:
    return SystemParams(variant=ModelVariant.CONSTRAINT_CONSISTENT)
