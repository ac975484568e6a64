import math

import numpy as np
import pytest

from twinbeam import model, synth
from twinbeam.dsp import AnalyzerSettings, band_power_rel_snl, welch_psd
from twinbeam.errors import ConfigurationError, DomainError

FS = 1e8
SETTINGS = AnalyzerSettings(rbw=150e3, vbw=2.0)
REF_PARAMS = model.NopoParams.from_derived(0.84, 1.38, 24.7e6, 0.88)
S_I_20M = model.intensity_diff_spectrum(REF_PARAMS, 20e6)   # 0.55353
S_P_20M = model.phase_sum_spectrum(REF_PARAMS, 20e6)        # 0.71125


def psd_at(estimate, f0):
    return estimate.psd[np.argmin(np.abs(estimate.frequencies - f0))]


def estimate(series, settings=SETTINGS):
    return welch_psd(series, FS, settings)


class TestColoredGaussianSeries:
    def test_white_identity(self):
        series = synth.colored_gaussian_series(np.ones_like, FS, 2 ** 20, seed=3)
        est = estimate(series)
        assert est.num_averages >= 200
        # flat within 0.2 dB on 1-MHz sub-band averages across (1, 40) MHz
        for lo in np.arange(1e6, 40e6, 1e6):
            band = (est.frequencies >= lo) & (est.frequencies < lo + 1e6)
            assert abs(10 * math.log10(np.mean(est.psd[band]))) < 0.2

    def test_matches_amplitude_dip_target(self):
        psd = lambda f: model.intensity_diff_psd(f, 0.88 * 0.84, 24.7e6)
        series = synth.colored_gaussian_series(psd, FS, 2 ** 22, seed=7)
        assert psd_at(estimate(series), 20e6) == pytest.approx(S_I_20M, abs=0.015)

    def test_deterministic_for_fixed_seed(self):
        a = synth.colored_gaussian_series(np.ones_like, FS, 2 ** 14, seed=42)
        b = synth.colored_gaussian_series(np.ones_like, FS, 2 ** 14, seed=42)
        assert np.array_equal(a, b)

    def test_distinct_sources_get_distinct_streams(self):
        a = synth.colored_gaussian_series(np.ones_like, FS, 2 ** 14, seed=42, source="a")
        b = synth.colored_gaussian_series(np.ones_like, FS, 2 ** 14, seed=42, source="b")
        assert not np.array_equal(a, b)

    def test_output_is_real_and_zero_mean(self):
        series = synth.colored_gaussian_series(np.ones_like, FS, 2 ** 16, seed=1)
        assert series.dtype == float
        assert abs(np.mean(series)) < 0.05

    def test_nonpositive_psd_rejected(self):
        with pytest.raises(DomainError):
            synth.colored_gaussian_series(lambda f: 1.0 - f / 1e7, FS, 2 ** 14, seed=0)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(DomainError):
            synth.colored_gaussian_series(np.ones_like, FS, 3000, seed=0)


class TestSynthesizeTwinBeams:
    def test_squeezed_combinations_hit_targets(self):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 22, seed=2)
        traces = synth.synthesize_twin_beams(REF_PARAMS, cfg)
        assert psd_at(estimate(traces.xminus), 20e6) == pytest.approx(S_I_20M, abs=0.015)
        assert psd_at(estimate(traces.yplus), 20e6) == pytest.approx(S_P_20M, abs=0.015)

    def test_conjugates_are_reciprocal_under_minimum_uncertainty(self):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 22, seed=2)
        traces = synth.synthesize_twin_beams(REF_PARAMS, cfg)
        assert psd_at(estimate(traces.xplus), 20e6) == pytest.approx(1.0 / S_I_20M, abs=0.08)
        product = psd_at(estimate(traces.xminus), 20e6) * psd_at(estimate(traces.xplus), 20e6)
        assert product == pytest.approx(1.0, abs=0.07)

    def test_explicit_excess_scales_conjugate(self):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 20, seed=13,
                                conjugate_mode="explicit", conjugate_excess=3.0)
        traces = synth.synthesize_twin_beams(REF_PARAMS, cfg)
        assert psd_at(estimate(traces.xplus), 20e6) == pytest.approx(
            3.0 / S_I_20M, rel=0.12)

    def test_single_beam_psd_is_mean_of_combination_psds(self):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 22, seed=2)
        traces = synth.synthesize_twin_beams(REF_PARAMS, cfg)
        target = (S_I_20M + 1.0 / S_I_20M) / 2.0
        assert psd_at(estimate(traces.x1), 20e6) == pytest.approx(target, abs=0.07)

    def test_uncorrelated_limit_is_vacuum(self):
        params = model.NopoParams.from_derived(1e-6, 1e4, 24.7e6, 1e-6)
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 20, seed=5)
        traces = synth.synthesize_twin_beams(params, cfg)
        for name in ("xminus", "xplus", "yplus", "yminus"):
            assert psd_at(estimate(getattr(traces, name)), 20e6) == pytest.approx(1.0, abs=0.05)

    def test_combinations_independent(self):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 20, seed=9)
        traces = synth.synthesize_twin_beams(REF_PARAMS, cfg)
        assert abs(np.corrcoef(traces.xminus, traces.yplus)[0, 1]) < 0.01
        assert abs(np.corrcoef(traces.xminus, traces.xplus)[0, 1]) < 0.01

    def test_beam_reconstruction_identity(self):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=2 ** 18, seed=9)
        traces = synth.synthesize_twin_beams(REF_PARAMS, cfg)
        np.testing.assert_allclose(
            synth.combine_channels(traces.x1, traces.x2, "difference"),
            traces.xminus, atol=1e-12)
        np.testing.assert_allclose(
            synth.combine_channels(traces.y1, traces.y2, "sum"),
            traces.yplus, atol=1e-12)

    def test_undersampled_bandwidth_warns(self):
        cfg = synth.SynthConfig(sample_rate=4e6, num_samples=2 ** 16, seed=1)
        with pytest.warns(UserWarning, match="Nyquist"):
            synth.synthesize_twin_beams(REF_PARAMS, cfg)

    def test_target_uncertainty_product_exact(self):
        freqs = np.linspace(0.0, FS / 2, 101)
        dip = model.intensity_diff_psd(freqs, 0.88 * 0.84, 24.7e6)
        np.testing.assert_allclose(dip * (1.0 / dip), 1.0, rtol=1e-15)


class TestApplyDetection:
    def test_vacuum_fixed_point(self):
        white = synth.white_series(2 ** 20, np.random.default_rng(8))
        out = synth.apply_detection(white, 0.5, seed=21)
        assert psd_at(estimate(out), 20e6) == pytest.approx(1.0, abs=0.05)

    def test_affine_psd_law(self):
        series = synth.colored_gaussian_series(
            lambda f: np.full_like(f, 0.2608), FS, 2 ** 21, seed=11)
        out = synth.apply_detection(series, 0.88, seed=12)
        assert psd_at(estimate(out), 20e6) == pytest.approx(
            0.88 * 0.2608 + 0.12, abs=0.015)

    def test_unit_efficiency_identity(self):
        series = synth.white_series(2 ** 12, np.random.default_rng(0))
        assert synth.apply_detection(series, 1.0, seed=0) is series

    def test_domain(self):
        with pytest.raises(DomainError):
            synth.apply_detection(np.zeros(8), 0.0, seed=0)


class TestCombineChannels:
    def test_snl_preservation(self):
        rng = np.random.default_rng(4)
        a, b = rng.standard_normal(2 ** 20), rng.standard_normal(2 ** 20)
        for op in ("sum", "difference"):
            out = synth.combine_channels(a, b, op)
            assert psd_at(estimate(out), 20e6) == pytest.approx(1.0, abs=0.06)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            synth.combine_channels(np.zeros(4), np.zeros(5), "sum")


class TestMzMeasure:
    ifc = model.InterferometerConfig.matched(20e6)

    def traces(self, n=2 ** 21, seed=9):
        cfg = synth.SynthConfig(sample_rate=FS, num_samples=n, seed=seed)
        return synth.synthesize_twin_beams(REF_PARAMS, cfg)

    def test_transparent_chain_passes_quadrature_through(self):
        traces = self.traces(n=2 ** 20)
        chain = synth.DetectionChain(mode_match=1.0, enl=1e-9)
        readout = synth.mz_measure(traces, "phase", self.ifc, chain, seed=9)
        assert psd_at(estimate(readout.signal_channel), 20e6) == pytest.approx(
            S_P_20M, abs=0.04)

    def test_reference_phase_chain_reading(self):
        # (0.90 * S_P + 0.10 + 0.04) through the electronics floor: -0.606 dB
        traces = self.traces()
        chain = synth.DetectionChain(mode_match=0.90, enl=0.4074, excess_phase_noise=0.04)
        readout = synth.mz_measure(traces, "phase", self.ifc, chain, seed=9)
        reading = band_power_rel_snl(
            estimate(readout.signal_channel), estimate(readout.snl_channel), 20e6)
        expected = 10 * math.log10(
            (0.90 * S_P_20M + 0.10 + 0.04) * (1 - 0.4074) + 0.4074)
        assert reading == pytest.approx(expected, abs=0.3)
        assert reading == pytest.approx(-0.60, abs=0.3)  # measured raw phase dip

    def test_amplitude_chain_reading(self):
        traces = self.traces()
        chain = synth.DetectionChain(enl=0.4074)
        readout = synth.mz_measure(traces, "amplitude", self.ifc, chain, seed=9)
        reading = band_power_rel_snl(
            estimate(readout.signal_channel), estimate(readout.snl_channel), 20e6)
        assert reading == pytest.approx(-1.334, abs=0.3)

    def test_snl_channel_is_unity(self):
        traces = self.traces(n=2 ** 20)
        chain = synth.DetectionChain(mode_match=0.9, enl=0.4074)
        readout = synth.mz_measure(traces, "amplitude", self.ifc, chain, seed=3)
        assert psd_at(estimate(readout.snl_channel), 20e6) == pytest.approx(1.0, abs=0.05)

    def test_out_of_tolerance_interferometer_rejected(self):
        traces = self.traces(n=2 ** 16)
        bad = model.InterferometerConfig(analysis_frequency=20e6, arm_length_difference=8.0)
        with pytest.raises(ConfigurationError, match="theta"):
            synth.mz_measure(traces, "phase", bad, synth.DetectionChain(), seed=0)

    def test_unknown_mode_rejected(self):
        with pytest.raises(DomainError):
            synth.mz_measure(self.traces(n=2 ** 16), "both", self.ifc,
                             synth.DetectionChain(), seed=0)

    def test_deterministic(self):
        traces = self.traces(n=2 ** 16)
        chain = synth.DetectionChain(mode_match=0.9, enl=0.3, excess_phase_noise=0.02)
        a = synth.mz_measure(traces, "phase", self.ifc, chain, seed=77)
        b = synth.mz_measure(traces, "phase", self.ifc, chain, seed=77)
        assert np.array_equal(a.signal_channel, b.signal_channel)
        assert np.array_equal(a.snl_channel, b.snl_channel)


class TestSynthConfigValidation:
    def test_power_of_two_required(self):
        with pytest.raises(DomainError):
            synth.SynthConfig(sample_rate=FS, num_samples=3000, seed=0)

    def test_conjugate_mode_checked(self):
        with pytest.raises(DomainError):
            synth.SynthConfig(sample_rate=FS, num_samples=1024, seed=0,
                              conjugate_mode="squeezed")

    def test_explicit_excess_below_one_rejected(self):
        with pytest.raises(DomainError):
            synth.SynthConfig(sample_rate=FS, num_samples=1024, seed=0,
                              conjugate_mode="explicit", conjugate_excess=0.5)
