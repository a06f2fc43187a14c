"""Shared configurations: the reference homogeneous and heterogeneous setups."""

import numpy as np
import pytest

from hybridcell.gamma import LogNormalParams
from hybridcell.geometry import CrossTierSpec, NetworkConfig, PathLossModel, TierSpec, dbm_to_watts

LAMBDA0 = 1.0 / (16.0 * 300.0**2)
PATH_LOSS = PathLossModel(33.88, 4.0, 35.0)
SHADOW_6DB = LogNormalParams.from_db(6.0)


def homogeneous_config(shadow=SHADOW_6DB):
    return NetworkConfig(PATH_LOSS, 40.0, (TierSpec(40.0, LAMBDA0, name="macro"),), shadow=shadow)


def two_tier_config(shadow=SHADOW_6DB):
    return NetworkConfig(
        PATH_LOSS, 40.0,
        (TierSpec(40.0, LAMBDA0, name="macro"), TierSpec(20.0, 4 * LAMBDA0, name="das")),
        shadow=shadow,
    )


def femto_tier():
    return TierSpec(dbm_to_watts(20.0), 50 * LAMBDA0, penetration_loss_db=10.0, name="femto")


def three_source_config(shadow=SHADOW_6DB):
    base = two_tier_config(shadow)
    return NetworkConfig(
        base.path_loss, base.serving_power, base.tiers, shadow=shadow,
        cross_tier=CrossTierSpec(femto_tier(), 5.0),
    )


@pytest.fixture
def homog():
    return homogeneous_config()


@pytest.fixture
def homog_clear():
    return homogeneous_config(LogNormalParams(0.0))


@pytest.fixture
def two_tier():
    return two_tier_config()


@pytest.fixture
def three_source():
    return three_source_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20121016)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
