"""Bispectral analysis of quadratic phase coupling in time series."""

__version__ = "0.1.0"

from .spectral import (PowerSpectrum, Spectrum, TimeSeries, dft, dft_reference,
                       inverse_dft, power_spectrum)
from .synth import Ensemble, SynthParams, add_noise, generate
from .bispec import (BicoherenceMap, BispectrumEstimate, Peak, PeakReport, bicoherence,
                     biphase, bispectrum, coupling_index, detect_peaks, surrogate_test)
from .ingest import (SessionSeries, TickRecord, TransformSpec, parse_ticks, segment,
                     sessionize, transform)

__all__ = [
    "TimeSeries", "Spectrum", "PowerSpectrum", "dft", "dft_reference", "inverse_dft",
    "power_spectrum", "SynthParams", "Ensemble", "generate", "add_noise",
    "BispectrumEstimate", "BicoherenceMap", "Peak", "PeakReport", "bispectrum",
    "bicoherence", "biphase", "detect_peaks", "surrogate_test", "coupling_index",
    "TickRecord", "SessionSeries", "TransformSpec", "parse_ticks", "sessionize",
    "transform", "segment",
]
