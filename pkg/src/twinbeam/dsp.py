"""Spectrum-analyzer emulation: Welch averaging with RBW/VBW semantics.

The estimator is normalized so unit-variance white input reads a flat PSD
of 1.0, matching the SNL-relative convention used everywhere else.  RBW
fixes the segment length through the window's equivalent noise bandwidth;
VBW is emulated as a single-pole low-pass over the stream of segment
periodograms, mirroring an analyzer's video filter on a noise-like trace.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError

_ENBW_BINS = {"hann": 1.5, "rectangular": 1.0}


@dataclass(frozen=True)
class AnalyzerSettings:
    """Resolution/video bandwidths and optional display span of the emulated analyzer."""
    rbw: float
    vbw: float
    window: str = "hann"
    center_frequency: float = None
    span: float = None

    def __post_init__(self):
        if self.rbw <= 0:
            raise DomainError("resolution bandwidth must be positive")
        if not 0 < self.vbw <= self.rbw:
            raise DomainError(f"video bandwidth must satisfy 0 < vbw <= rbw, got {self.vbw}")
        if self.window not in _ENBW_BINS:
            raise DomainError(f"unsupported window {self.window!r}")
        if (self.center_frequency is None) != (self.span is None):
            raise DomainError("center_frequency and span must be given together")
        if self.span is not None and self.span <= 0:
            raise DomainError("span must be positive")


@dataclass(frozen=True)
class SpectrumEstimate:
    """Frequency grid plus SNL-relative PSD, with averaging provenance."""
    frequencies: np.ndarray
    psd: np.ndarray
    num_averages: int
    settings: AnalyzerSettings

    def __post_init__(self):
        if len(self.frequencies) != len(self.psd):
            raise DomainError("frequency grid and PSD lengths differ")
        if np.any(np.diff(self.frequencies) <= 0):
            raise DomainError("frequency grid must be strictly increasing")
        if np.any(np.asarray(self.psd) < 0):
            raise DomainError("PSD values must be nonnegative")
        if self.num_averages < 1:
            raise DomainError("num_averages must be >= 1")


def segment_length(sample_rate, settings):
    """Segment length implied by the RBW: L = round(Fs * ENBW / rbw)."""
    return int(round(sample_rate * _ENBW_BINS[settings.window] / settings.rbw))


def welch_psd(series, sample_rate, settings):
    """Averaged periodogram of a real series in SNL-relative units.

    Hann (or rectangular) window, 50% overlap; the per-segment periodogram
    stream is smoothed by a single-pole filter whose time constant is
    1/(2 pi vbw) against the segment update rate.  The reported
    num_averages is the effective count 1/sum(weights^2) of that filter.
    """
    series = np.asarray(series, dtype=float)
    length = segment_length(sample_rate, settings)
    hop = max(1, length // 2)
    if len(series) < length + hop:
        raise InsufficientDataError(
            f"series of {len(series)} samples too short for two {length}-sample "
            f"segments at 50% overlap; need at least {length + hop}",
            required_length=length + hop)

    if settings.window == "hann":
        win = np.hanning(length)
    else:
        win = np.ones(length)
    power_norm = np.sum(win ** 2)

    segments = np.lib.stride_tricks.sliding_window_view(series, length)[::hop]
    spectra = np.fft.rfft(segments * win, axis=1)
    periodograms = (spectra.real ** 2 + spectra.imag ** 2) / power_norm
    periodograms[:, 0] *= 0.5   # DC and Nyquist carry no one-sided doubling
    periodograms[:, -1] *= 0.5

    # Video filter: normalized exponential average over the segment stream,
    # decay per update set by the VBW time constant 1/(2 pi vbw).
    dt = hop / sample_rate
    tau = 1.0 / (2.0 * math.pi * settings.vbw)
    decay = tau / (tau + dt)
    accum = np.zeros(periodograms.shape[1])
    norm = 0.0
    for p in periodograms:
        accum = decay * accum + p
        norm = decay * norm + 1.0
    psd = accum / norm

    # Segment k (0 = newest) carries weight decay^k / norm.
    num_segments = periodograms.shape[0]
    if decay < 1.0:
        sum_w = (1.0 - decay ** num_segments) / (1.0 - decay)
        sum_w2 = (1.0 - decay ** (2 * num_segments)) / (1.0 - decay ** 2)
    else:
        sum_w, sum_w2 = num_segments, num_segments
    num_averages = max(1, int(round(sum_w ** 2 / sum_w2)))

    freqs = np.fft.rfftfreq(length, 1.0 / sample_rate)
    if settings.span is not None:
        lo = settings.center_frequency - settings.span / 2.0
        hi = settings.center_frequency + settings.span / 2.0
        keep = (freqs >= lo) & (freqs <= hi)
        freqs, psd = freqs[keep], psd[keep]
    return SpectrumEstimate(frequencies=freqs, psd=psd,
                            num_averages=num_averages, settings=settings)


def band_power_rel_snl(measured, reference, f0):
    """Nearest-bin reading of 10 log10(measured/reference) at f0, in dB."""
    if measured.settings != reference.settings:
        raise DomainError("measured and reference estimates use different analyzer settings")
    if len(measured.frequencies) != len(reference.frequencies) or \
            not np.array_equal(measured.frequencies, reference.frequencies):
        raise DomainError("measured and reference estimates live on different grids")
    idx = int(np.argmin(np.abs(measured.frequencies - f0)))
    offset = abs(measured.frequencies[idx] - f0)
    if offset > measured.settings.rbw / 2.0:
        warnings.warn(
            f"requested frequency {f0:.6g} Hz is {offset:.6g} Hz from the nearest bin, "
            f"beyond half the RBW", stacklevel=2)
    ref_power = reference.psd[idx]
    if ref_power <= 0:
        raise DomainError(f"reference power is zero at {measured.frequencies[idx]:.6g} Hz")
    return 10.0 * math.log10(measured.psd[idx] / ref_power)
