"""Channel model: loss, thermal noise, correlated sources, mismatch."""

import numpy as np
import pytest

from cvgec.channel import (
    ChannelModel,
    NoiseSource,
    apply_channel,
    bookkeeping_excess,
    dump_channel_config,
    excess_noise_snu,
    mismatch_from_visibility,
    parse_channel_config,
    standard_two_channel,
    with_mismatch,
)
from cvgec.states import as_snu, vacuum_state

from test_states import random_physical_state


def single_source(g1, g2, variance, xi=0.0, eta=1.0, thermal=0.0):
    src = NoiseSource(np.sqrt([g1, g2]), variance)
    return ChannelModel(2, eta, thermal, (src,), xi)


class TestApplyChannel:
    def test_unit_transmission_no_sources_is_identity(self):
        rng = np.random.default_rng(4)
        state = random_physical_state(rng, 2)
        out = apply_channel(state, (0, 1), ChannelModel(2, 1.0, 0.0))
        assert np.allclose(out.cov, state.cov, atol=1e-15)
        assert np.allclose(out.mean, state.mean, atol=1e-15)

    def test_single_channel_variance(self):
        # eta = 0.8, g = (1, 0), 5 natural units of source variance:
        # 0.8 * 0.5 + 0.2 * 0.5 + 5 = 5.5 natural (11 SNU)
        model = single_source(1.0, 0.0, 5.0, eta=0.8)
        out = apply_channel(vacuum_state(2), (0, 1), model)
        assert out.cov[0, 0] == pytest.approx(5.5, abs=1e-12)
        assert as_snu(out.cov[0, 0]) == pytest.approx(11.0, abs=1e-12)

    def test_cross_covariance_from_shared_source(self):
        # couplings (0.78, 1.0), variance v: cross covariance 0.78 * v
        v = 2.5
        model = ChannelModel(2, 1.0, 0.0, (NoiseSource([0.78, 1.0], v),))
        out = apply_channel(vacuum_state(2), (0, 1), model)
        assert out.cov[0, 2] == pytest.approx(0.78 * v, abs=1e-12)
        assert out.cov[1, 3] == pytest.approx(0.78 * v, abs=1e-12)

    def test_pure_loss_equals_vacuum_on_vacuum(self):
        model = ChannelModel(2, [0.3, 0.9], 0.0)
        out = apply_channel(vacuum_state(2), (0, 1), model)
        assert np.allclose(out.cov, vacuum_state(2).cov, atol=1e-15)

    def test_thermal_environment(self):
        model = ChannelModel(1, 0.6, 2.0)
        out = apply_channel(vacuum_state(1), (0,), model)
        assert out.cov[0, 0] == pytest.approx(0.6 * 0.5 + 0.4 * 2.5, abs=1e-14)

    def test_mean_attenuation(self):
        from cvgec.states import displace

        state = displace(vacuum_state(1), 0, 2.0, -1.0)
        out = apply_channel(state, (0,), ChannelModel(1, 0.49, 0.0))
        assert np.allclose(out.mean, [1.4, -0.7], atol=1e-14)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            apply_channel(vacuum_state(1), (0, 1), ChannelModel(2, 1.0, 0.0))

    def test_monotone_in_source_variance(self):
        # Loewner order: more source variance never decreases the covariance
        rng = np.random.default_rng(8)
        for _ in range(20):
            g1, g2 = rng.uniform(0.1, 3.0, 2)
            lo, hi = np.sort(rng.uniform(0.0, 10.0, 2))
            xi = rng.uniform(0.0, 0.5)
            state = random_physical_state(rng, 2)
            out_lo = apply_channel(state, (0, 1), single_source(g1, g2, lo, xi))
            out_hi = apply_channel(state, (0, 1), single_source(g1, g2, hi, xi))
            diff = out_hi.cov - out_lo.cov
            assert np.linalg.eigvalsh(diff).min() >= -1e-12


class TestMismatchBookkeeping:
    def test_bookkeeping_modes_appended(self):
        model = single_source(1.0, 2.0, 3.0, xi=0.25)
        out = apply_channel(vacuum_state(2), (0, 1), model)
        assert out.n_modes == 4  # one per channel per source
        excess = bookkeeping_excess(model)
        assert excess.shape == (1, 2)
        assert out.cov[4, 4] == pytest.approx(0.5 + excess[0, 0], abs=1e-14)
        assert out.cov[6, 6] == pytest.approx(0.5 + excess[0, 1], abs=1e-14)

    def test_total_excess_invariant_in_xi(self):
        # only the split between interfering and booked power changes
        for xi in (0.0, 0.3, 0.9):
            model = single_source(1.5, 0.7, 4.0, xi=xi)
            out = apply_channel(vacuum_state(2), (0, 1), model)
            matched = out.cov[0, 0] - 0.5
            booked = out.cov[4, 4] - 0.5 if model.mismatch > 0 else 0.0
            assert matched + booked == pytest.approx(1.5 * 4.0, abs=1e-12)

    def test_half_mismatch_halves_interfering_power(self):
        base = apply_channel(vacuum_state(2), (0, 1), single_source(1.0, 1.0, 6.0, xi=0.0))
        half = apply_channel(vacuum_state(2), (0, 1), single_source(1.0, 1.0, 6.0, xi=0.5))
        assert half.cov[0, 2] == pytest.approx(0.5 * base.cov[0, 2], abs=1e-12)

    def test_with_mismatch(self):
        model = single_source(1.0, 1.0, 1.0)
        assert with_mismatch(model, 0.01).mismatch == 0.01
        assert model.mismatch == 0.0  # original untouched
        with pytest.raises(ValueError):
            with_mismatch(model, 1.0)

    def test_visibility_mapping(self):
        assert mismatch_from_visibility(0.995) == pytest.approx(0.009975, abs=1e-12)
        assert mismatch_from_visibility(1.0) == 0.0

    def test_zero_xi_adds_no_bookkeeping_noise(self):
        model = single_source(1.0, 1.0, 5.0, xi=0.0)
        out = apply_channel(vacuum_state(2), (0, 1), model)
        assert np.allclose(out.cov[4:, 4:], 0.5 * np.eye(4), atol=1e-15)


class TestExcessNoise:
    def test_no_sources(self):
        assert excess_noise_snu(ChannelModel(2, 1.0, 0.0), 0) == 0.0

    def test_unit_conversion(self):
        model = ChannelModel(1, 1.0, 0.0, (NoiseSource([1.0], 0.5),))
        assert excess_noise_snu(model, 0) == pytest.approx(1.0)

    def test_ratio_between_channels(self):
        # channel-2 excess 10 SNU with g1/g2 = 0.61 puts 6.1 SNU on channel 1
        model = standard_two_channel(6.1, 0.61)
        assert excess_noise_snu(model, 0) == pytest.approx(6.1, abs=1e-12)
        assert excess_noise_snu(model, 1) == pytest.approx(10.0, abs=1e-12)

    def test_independent_of_mismatch(self):
        model = single_source(1.0, 2.0, 3.0, xi=0.4)
        assert excess_noise_snu(model, 1) == pytest.approx(
            excess_noise_snu(with_mismatch(model, 0.0), 1)
        )


class TestValidation:
    def test_eta_range(self):
        with pytest.raises(ValueError):
            ChannelModel(1, 0.0, 0.0)
        with pytest.raises(ValueError):
            ChannelModel(1, 1.1, 0.0)

    def test_coupling_length(self):
        with pytest.raises(ValueError):
            ChannelModel(2, 1.0, 0.0, (NoiseSource([1.0], 1.0),))

    def test_negative_variance(self):
        with pytest.raises(ValueError):
            NoiseSource([1.0, 1.0], -0.1)


class TestConfigRoundTrip:
    def test_round_trip(self):
        model = ChannelModel(
            2,
            [0.9, 0.8],
            [0.0, 0.1],
            (
                NoiseSource([0.78102, 1.0], 12.5, "gawbs"),
                NoiseSource([1.0, 0.0], 0.25),
            ),
            mismatch=0.009975,
        )
        back = parse_channel_config(dump_channel_config(model))
        assert back.n_channels == model.n_channels
        assert np.array_equal(back.eta, model.eta)
        assert np.array_equal(back.thermal, model.thermal)
        assert back.mismatch == model.mismatch
        assert len(back.sources) == 2
        for a, b in zip(back.sources, model.sources):
            assert np.array_equal(a.coupling, b.coupling)
            assert a.variance == b.variance

    def test_comments_and_defaults(self):
        text = "# a comment\nn_channels 2\nsource s0 1.5 1 1\n"
        model = parse_channel_config(text)
        assert np.array_equal(model.eta, [1.0, 1.0])
        assert model.mismatch == 0.0
        assert model.sources[0].variance == 1.5

    def test_bad_line_reports_position(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_channel_config("n_channels 2\nbogus 1\n")
