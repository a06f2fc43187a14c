import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import LAMBDA0, PATH_LOSS, homogeneous_config, two_tier_config
from hybridcell.errors import DomainError, GuardClearanceError
from hybridcell.gamma import GammaParams, LogNormalParams
from hybridcell.geometry import (
    NetworkConfig,
    PathLossModel,
    TierSpec,
    db_to_linear,
    dbm_to_watts,
    guard_radius,
    path_loss,
    signal_params,
    small_ball_distances,
    tier_coefficient,
    tier_coefficients,
    typical_cell_radius,
)

MACRO = TierSpec(40.0, LAMBDA0)


class TestTierCoefficient:
    def test_equal_power(self):
        assert tier_coefficient(MACRO, MACRO, 4.0) == 2.0

    def test_das(self):
        assert tier_coefficient(TierSpec(20.0, 1e-6), MACRO, 4.0) == pytest.approx(1 + 0.5**0.25, rel=1e-14)
        assert tier_coefficient(TierSpec(20.0, 1e-6), MACRO, 4.0) == pytest.approx(1.8409, abs=1e-4)

    def test_vanishing_power(self):
        assert tier_coefficient(TierSpec(1e-30, 1e-6), MACRO, 4.0) == pytest.approx(1.0, abs=1e-7)


class TestCellRadius:
    def test_homogeneous(self):
        assert typical_cell_radius(homogeneous_config()) == pytest.approx(300.0, rel=1e-14)

    def test_two_tier(self):
        assert typical_cell_radius(two_tier_config()) == pytest.approx(143.20, abs=0.005)

    def test_single_tier_reduces(self):
        lam = 3e-6
        cfg = NetworkConfig(PATH_LOSS, 10.0, (TierSpec(10.0, lam),))
        assert typical_cell_radius(cfg) == pytest.approx(1 / (4 * math.sqrt(lam)), rel=1e-14)

    @given(st.floats(0.01, 100))
    def test_density_scaling(self, alpha):
        cfg = two_tier_config()
        r = typical_cell_radius(cfg)
        assert typical_cell_radius(cfg.scale_densities(alpha)) == pytest.approx(r / math.sqrt(alpha), rel=1e-12)

    def test_doubling(self):
        cfg = homogeneous_config()
        assert typical_cell_radius(cfg.scale_densities(2)) == pytest.approx(300 / math.sqrt(2), rel=1e-14)

    def test_override(self):
        cfg = replace(homogeneous_config(), cell_radius_override=123.0)
        assert typical_cell_radius(cfg) == 123.0

    def test_zero_density(self):
        cfg = NetworkConfig(PATH_LOSS, 40.0, (TierSpec(40.0, 0.0),))
        with pytest.raises(DomainError):
            typical_cell_radius(cfg)


class TestGuardRadius:
    def test_homogeneous(self):
        cfg = homogeneous_config()
        assert guard_radius(cfg.tiers[0], cfg) == pytest.approx(300.0, rel=1e-14)

    def test_sixteenth_power(self):
        cfg = homogeneous_config()
        weak = TierSpec(40.0 / 16, LAMBDA0)
        assert guard_radius(weak, cfg) == pytest.approx(0.5 * 300.0, rel=1e-14)

    def test_vanishing_power(self):
        cfg = homogeneous_config()
        assert guard_radius(TierSpec(1e-30, LAMBDA0), cfg) == pytest.approx(0.0, abs=1e-5)

    def test_outer_edge_is_a_rc(self):
        cfg = two_tier_config()
        rc = typical_cell_radius(cfg)
        for tier, a in zip(cfg.tiers, tier_coefficients(cfg)):
            assert rc + guard_radius(tier, cfg) == pytest.approx(a * rc, rel=1e-14)


class TestPathLoss:
    def test_clamped(self):
        assert path_loss(10.0, PATH_LOSS) == path_loss(35.0, PATH_LOSS)

    def test_reference_value(self):
        assert path_loss(35.0, PATH_LOSS) == pytest.approx(33.88 * 35.0**4, rel=1e-14)

    def test_monotone(self, rng):
        r = np.sort(rng.uniform(0, 5000, 500))
        assert np.all(np.diff(path_loss(r, PATH_LOSS)) >= 0)

    @pytest.mark.parametrize("args", [(0, 4, 35), (1, 2, 35), (1, 4, 0)])
    def test_invalid_model(self, args):
        with pytest.raises(DomainError):
            PathLossModel(*args)


class TestSignal:
    def test_clamp_no_shadow(self):
        cfg = homogeneous_config(LogNormalParams(0.0))
        s = signal_params(0.1, cfg)  # r = 30 m < d0
        assert s.shape == 1.0
        assert s.scale == pytest.approx(40.0 / path_loss(35.0, PATH_LOSS), rel=1e-14)

    def test_power_scaling(self):
        cfg = homogeneous_config()
        s1 = signal_params(0.5, cfg)
        s2 = signal_params(0.5, replace(cfg, serving_power=80.0))
        assert s2.shape == s1.shape
        assert s2.scale == pytest.approx(2 * s1.scale, rel=1e-14)

    def test_sampled_mean(self, rng):
        cfg = homogeneous_config()
        s = signal_params(0.5, cfg)
        draws = 40.0 * rng.exponential(1.0, 1_000_000) * cfg.shadow.sample(rng, 1_000_000) / path_loss(150.0, PATH_LOSS)
        assert draws.mean() == pytest.approx(s.mean(), rel=0.01)

    def test_scale_decreasing(self):
        cfg = homogeneous_config()
        betas = np.linspace(0.2, 1.0, 30)  # beta R_c > d0 throughout
        scales = [signal_params(b, cfg).scale for b in betas]
        assert np.all(np.diff(scales) < 0)

    @pytest.mark.parametrize("beta", [-0.1, 1.01])
    def test_beta_domain(self, beta):
        with pytest.raises(DomainError):
            signal_params(beta, homogeneous_config())


class TestGuardClearance:
    def test_violation_names_tier(self):
        cfg = NetworkConfig(
            PATH_LOSS, 40.0, (TierSpec(40.0, LAMBDA0, name="macro"), TierSpec(1e-4, LAMBDA0, name="tiny")),
            cell_radius_override=300.0,
        )
        with pytest.raises(GuardClearanceError) as info:
            small_ball_distances(1.0, cfg)
        assert info.value.tier == "tiny"
        assert "tiny" in str(info.value)

    def test_clear(self):
        d = small_ball_distances(1.0, homogeneous_config())
        np.testing.assert_allclose(d, [300.0])


def test_unit_conversions():
    assert dbm_to_watts(20.0) == pytest.approx(0.1)
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert db_to_linear(10.0) == pytest.approx(10.0)


def test_penetration_loss_folds_into_power():
    femto = TierSpec(0.1, 1e-5, penetration_loss_db=10.0)
    assert femto.effective_power == pytest.approx(0.01)
