import math

import numpy as np
import pytest

from schedsim.channel import (
    ChannelParams,
    UserLink,
    cost231_path_loss,
    draw_fast_fading,
    draw_shadowing,
    instantaneous_rate,
    place_users,
    snr,
)
from schedsim.errors import ConfigError

# Independent hand evaluation of the COST-231 formula at the reference point
# (1 km, 2000 MHz, h_b 30 m, h_m 1.5 m, metro), frozen before implementation.
PL_1KM_METRO = 140.79202015973772
DECADE_SLOPE_HB30 = 35.224855781586214


def default_params(**kw):
    return ChannelParams(**kw)


class TestCost231:
    def test_spot_value_1km_metro(self):
        pl = cost231_path_loss(1000.0, default_params())
        assert pl == pytest.approx(PL_1KM_METRO, abs=1e-9)
        assert abs(pl - 140.8) < 0.1

    def test_suburban_is_exactly_3db_below_metro(self):
        metro = cost231_path_loss(1000.0, default_params(env_class="metro"))
        sub = cost231_path_loss(1000.0, default_params(env_class="suburban"))
        assert metro - sub == pytest.approx(3.0, abs=1e-12)

    def test_one_decade_distance_slope(self):
        p = default_params()
        diff = cost231_path_loss(1000.0, p) - cost231_path_loss(100.0, p)
        assert diff == pytest.approx(DECADE_SLOPE_HB30, abs=1e-9)

    def test_short_range_clamps_with_warning(self):
        p = default_params()
        with pytest.warns(UserWarning):
            clamped = cost231_path_loss(5.0, p)
        assert clamped == cost231_path_loss(20.0, p)

    def test_invalid_inputs_raise(self):
        p = default_params()
        with pytest.raises(ConfigError):
            cost231_path_loss(0.0, p)
        with pytest.raises(ConfigError):
            cost231_path_loss(-3.0, p)
        with pytest.raises(ConfigError):
            cost231_path_loss(500.0, default_params(carrier_freq_mhz=900.0))
        with pytest.raises(ConfigError):
            cost231_path_loss(500.0, default_params(bs_height_m=10.0))

    def test_strictly_increasing_in_distance(self):
        p = default_params()
        d = np.linspace(20.0, 2000.0, 100)
        pl = [cost231_path_loss(x, p) for x in d]
        assert all(b > a for a, b in zip(pl, pl[1:]))

    def test_finite_positive_over_valid_range(self):
        p = default_params()
        for d in (20.0, 100.0, 999.0, 5000.0):
            pl = cost231_path_loss(d, p)
            assert math.isfinite(pl) and pl > 0


class TestShadowing:
    def test_sigma_zero_is_degenerate(self):
        rng = np.random.default_rng(1)
        assert draw_shadowing(rng, 0.0) == 0.0

    def test_sample_statistics(self):
        rng = np.random.default_rng(7)
        draws = draw_shadowing(rng, 8.0, size=100_000)
        assert abs(draws.mean()) < 0.1
        assert abs(draws.std() - 8.0) < 0.2

    def test_seed_determinism(self):
        a = draw_shadowing(np.random.default_rng(42), 8.0)
        b = draw_shadowing(np.random.default_rng(42), 8.0)
        assert a == b

    def test_negative_sigma_rejected(self):
        with pytest.raises(ConfigError):
            draw_shadowing(np.random.default_rng(0), -1.0)


class TestFastFading:
    def test_unit_mean(self):
        rng = np.random.default_rng(3)
        draws = draw_fast_fading(rng, size=100_000)
        assert abs(draws.mean() - 1.0) < 0.02

    def test_strictly_positive(self):
        rng = np.random.default_rng(4)
        assert np.all(draw_fast_fading(rng, size=100_000) > 0)


class TestSnr:
    def test_zero_db_when_rx_equals_noise(self):
        p = default_params()
        pl = cost231_path_loss(700.0, p)
        # pick the shadow that lands the rx power exactly on the noise floor
        link = UserLink(0, 700.0, shadowing_db=p.noise_dbm() - p.tx_power_dbm + pl)
        assert snr(p, link, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_link_budget_chain(self):
        # tx 46 dBm, PL 140.79202... dB, shadow 0, noise floor -95 dBm for
        # 10 MHz and NF 9 dB; chain frozen from hand arithmetic.
        p = default_params()
        assert p.noise_dbm() == pytest.approx(-95.0, abs=1e-12)
        expected = 10.0 ** ((46.0 - PL_1KM_METRO + 95.0) / 10.0)
        assert snr(p, UserLink(0, 1000.0, 0.0), 1.0) == pytest.approx(expected, rel=1e-12)
        # sanity figure for a round 140.8 dB loss
        assert 10.0 ** ((46.0 - 140.8 + 95.0) / 10.0) == pytest.approx(1.047, abs=1e-3)

    def test_fading_gain_is_multiplicative(self):
        p = default_params()
        link = UserLink(0, 400.0, 2.5)
        assert snr(p, link, 2.0) == 2.0 * snr(p, link, 1.0)

    def test_equal_distance_equal_snr(self):
        p = default_params()
        a = snr(p, UserLink(0, 650.0, 0.0), 1.0)
        b = snr(p, UserLink(1, 650.0, 0.0), 1.0)
        assert a == b


class TestRate:
    def test_reference_point(self):
        p = default_params()
        assert instantaneous_rate(1.0, p) == 10_000.0

    def test_snr_three_doubles_the_zero_db_rate(self):
        p = default_params()
        assert instantaneous_rate(3.0, p) == 2.0 * instantaneous_rate(1.0, p)

    def test_vanishes_at_low_snr(self):
        p = default_params()
        assert instantaneous_rate(1e-12, p) < 1e-4 * instantaneous_rate(1.0, p)

    def test_strictly_increasing(self):
        p = default_params()
        s = np.logspace(-3, 4, 50)
        r = instantaneous_rate(s, p)
        assert np.all(np.diff(r) > 0)

    def test_nonpositive_snr_rejected(self):
        p = default_params()
        with pytest.raises(ValueError):
            instantaneous_rate(0.0, p)
        with pytest.raises(ValueError):
            instantaneous_rate(np.array([1.0, -2.0]), p)

    def test_dimension_sanity(self):
        # bits per slot = bandwidth * slot * log2(1 + SNR) on fixed inputs
        p = default_params(bandwidth_hz=5e6, slot_duration_s=2e-3)
        assert instantaneous_rate(7.0, p) == pytest.approx(5e6 * 2e-3 * 3.0, rel=1e-12)


class TestPlacement:
    def test_equal_spacing_progression(self):
        d = place_users(10, 1000.0, "equal_spacing")
        assert np.allclose(d, np.arange(100.0, 1100.0, 100.0))

    def test_single_user_at_radius(self):
        assert place_users(1, 1000.0, "equal_spacing")[0] == 1000.0

    def test_zero_users_rejected(self):
        with pytest.raises(ConfigError):
            place_users(0, 1000.0, "equal_spacing")

    def test_uniform_ring_area_density(self):
        rng = np.random.default_rng(11)
        d = place_users(100_000, 1000.0, "uniform_ring", rng)
        assert np.all((d > 0) & (d <= 1000.0))
        frac_inner = np.mean(d <= 500.0)
        assert abs(frac_inner - 0.25) < 0.01

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError):
            place_users(4, 1000.0, "grid")


class TestParamsValidation:
    def test_defaults_valid(self):
        default_params().validate()

    @pytest.mark.parametrize(
        "kw",
        [
            dict(bandwidth_hz=0.0),
            dict(cell_radius_m=-1.0),
            dict(slot_duration_s=0.0),
            dict(shadowing_sigma_db=-2.0),
            dict(carrier_freq_mhz=1200.0),
            dict(env_class="rural"),
            dict(tx_power_dbm=float("inf")),
        ],
    )
    def test_bad_params_rejected(self, kw):
        with pytest.raises(ConfigError):
            default_params(**kw).validate()
