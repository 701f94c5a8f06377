"""Bispectrum accumulation, bicoherence, peak detection and surrogate testing.

The triple product F(ka) F(kb) conj(F(ka + kb)) is summed over segments
(or ensemble realizations). A single segment's triple product has magnitude
|F(ka)||F(kb)||F(ka+kb)| whatever the phases, so coupling only shows up
after averaging: coherent biphases add up, random ones cancel.

Matrices are stored densely with shape (n//2, n//4 + 1) and indexed as
``[ka, kb]``; only cells in the principal domain

    1 <= kb <= ka,  ka + kb <= n/2

carry data (``domain`` mask), everything else is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spectral import Spectrum, TimeSeries, fft_radix2, fit_length

DEFAULT_THRESHOLD = 0.6
DEFAULT_POWER_FLOOR = 1e-12
DEFAULT_SURROGATES = 99
PEAK_SLACK = 1e-9


def principal_domain(n: int) -> np.ndarray:
    """Boolean mask of shape (n//2, n//4 + 1) over [ka, kb]."""
    ka = np.arange(n // 2)[:, None]
    kb = np.arange(n // 4 + 1)[None, :]
    return (kb >= 1) & (kb <= ka) & (ka + kb <= n // 2)


def in_domain(n: int, ka: int, kb: int) -> bool:
    return 1 <= kb <= ka and ka + kb <= n // 2


def _stack_spectra(spectra: Sequence[Spectrum]) -> np.ndarray:
    spectra = list(spectra)
    if not spectra:
        raise ValueError("need at least one spectrum")
    lengths = {s.n for s in spectra}
    if len(lengths) != 1:
        raise ValueError(f"spectra have mismatched lengths {sorted(lengths)}")
    return np.stack([s.bins for s in spectra])


@dataclass(frozen=True, eq=False)
class BispectrumEstimate:
    n: int
    m: int
    acc: np.ndarray
    p_ab: np.ndarray
    p_g: np.ndarray
    domain: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.domain is None:
            object.__setattr__(self, "domain", principal_domain(self.n))
        for name in ("acc", "p_ab", "p_g", "domain"):
            getattr(self, name).setflags(write=False)

    @property
    def mean(self) -> np.ndarray:
        """Segment-averaged bispectrum."""
        return self.acc / self.m

    def at(self, ka: int, kb: int) -> complex:
        if not in_domain(self.n, ka, kb):
            raise ValueError(f"({ka}, {kb}) is outside the principal domain for n={self.n}")
        return complex(self.acc[ka, kb])


def bispectrum_from_bins(bins: np.ndarray, chunk: int = 256) -> BispectrumEstimate:
    """Accumulate from an (m, n) array of complex spectra."""
    bins = np.atleast_2d(np.asarray(bins, dtype=complex))
    m, n = bins.shape
    if n < 4:
        raise ValueError(f"segment length {n} too short for a bispectrum")
    dom = principal_domain(n)
    ka, kb = np.nonzero(dom)
    acc = np.zeros(dom.shape, dtype=complex)
    p_ab = np.zeros(dom.shape)
    p_g = np.zeros(dom.shape)
    acc_flat = np.zeros(ka.size, dtype=complex)
    pab_flat = np.zeros(ka.size)
    pg_flat = np.zeros(ka.size)
    for start in range(0, m, chunk):
        F = bins[start:start + chunk]
        prod = F[:, ka] * F[:, kb]
        fg = F[:, ka + kb]
        acc_flat += np.sum(prod * np.conj(fg), axis=0)
        pab_flat += np.sum(np.abs(prod) ** 2, axis=0)
        pg_flat += np.sum(np.abs(fg) ** 2, axis=0)
    acc[ka, kb] = acc_flat
    p_ab[ka, kb] = pab_flat
    p_g[ka, kb] = pg_flat
    if not (np.all(np.isfinite(acc)) and np.all(np.isfinite(p_ab)) and np.all(np.isfinite(p_g))):
        raise ValueError("bispectrum accumulators overflowed")
    return BispectrumEstimate(n=n, m=m, acc=acc, p_ab=p_ab, p_g=p_g, domain=dom)


def bispectrum(spectra: Sequence[Spectrum]) -> BispectrumEstimate:
    """Sum F(ka) F(kb) conj(F(ka+kb)) over ``spectra`` on the principal domain."""
    return bispectrum_from_bins(_stack_spectra(spectra))


def full_bispectrum(spectra: Sequence[Spectrum]) -> np.ndarray:
    """Unrestricted (n, n) accumulator with ka + kb taken modulo n.

    Debug mode for checking the symmetries that justify storing only the
    principal domain.
    """
    F = _stack_spectra(spectra)
    n = F.shape[1]
    k = np.arange(n)
    idx = (k[:, None] + k[None, :]) % n
    a = F[:, :, None]
    b = F[:, None, :]
    # separate real products keep F(a)F(b) bit-identical to F(b)F(a);
    # the complex ufunc may fuse multiply-adds asymmetrically
    pair = (a.real * b.real - a.imag * b.imag) + 1j * (a.real * b.imag + a.imag * b.real)
    return np.sum(pair * np.conj(F[:, idx]), axis=0)


def segment_bins(segments, length_policy: str = "error") -> np.ndarray:
    """Forward transforms of every segment as an (m, n) array.

    Accepts an ``Ensemble``, a list of ``TimeSeries`` or a 2-D array.
    """
    if hasattr(segments, "realizations"):
        segments = segments.realizations
    if isinstance(segments, np.ndarray):
        values = np.atleast_2d(segments.astype(float))
    else:
        segments = list(segments)
        if not segments:
            raise ValueError("need at least one segment")
        lengths = {len(s) for s in segments}
        if len(lengths) != 1:
            raise ValueError(f"segments have mismatched lengths {sorted(lengths)}")
        values = np.stack([s.values if isinstance(s, TimeSeries) else np.asarray(s, float)
                           for s in segments])
    if not np.all(np.isfinite(values)):
        raise ValueError("segments contain non-finite samples")
    values, _ = fit_length(values, length_policy)
    return fft_radix2(values)


@dataclass(frozen=True, eq=False)
class BicoherenceMap:
    b2: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.b2.setflags(write=False)
        self.valid.setflags(write=False)


def bicoherence(est: BispectrumEstimate, power_floor: float = DEFAULT_POWER_FLOOR) -> BicoherenceMap:
    """Squared bicoherence |acc|^2 / (p_ab * p_g).

    ``power_floor`` is relative: a cell is valid only when its denominator
    exceeds ``power_floor`` times the largest denominator in the domain.
    By Cauchy-Schwarz valid cells lie in [0, 1] up to rounding.
    """
    if not (power_floor > 0):
        raise ValueError(f"power_floor must be > 0, got {power_floor}")
    denom = est.p_ab * est.p_g
    top = float(np.max(denom[est.domain])) if est.domain.any() else 0.0
    valid = est.domain & (denom > 0) & (denom > power_floor * top)
    b2 = np.zeros(denom.shape)
    num = est.acc.real ** 2 + est.acc.imag ** 2
    b2[valid] = num[valid] / denom[valid]
    return BicoherenceMap(b2=b2, valid=valid)


def biphase(est: BispectrumEstimate, ka: int, kb: int) -> float:
    """arg of the accumulated bispectrum at (ka, kb), in (-pi, pi]."""
    value = est.at(ka, kb)
    if abs(value) < 1e-12:
        raise ValueError(f"no phase information at ({ka}, {kb}): |P| = {abs(value):.3g}")
    phase = float(np.angle(value))
    return np.pi if phase == -np.pi else phase


@dataclass(frozen=True)
class Peak:
    ka: int
    kb: int
    magnitude: float
    b2: float
    biphase: float
    p_value: float | None = None


@dataclass(frozen=True)
class PeakReport:
    peaks: tuple[Peak, ...]
    threshold_b2: float
    surrogates_used: int = 0

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)


def detect_peaks(bmap: BicoherenceMap, est: BispectrumEstimate,
                 threshold_b2: float = DEFAULT_THRESHOLD) -> PeakReport:
    """All valid cells with b2 >= threshold (with 1e-9 slack), strongest first.

    Ties are ordered by (ka, kb) ascending. ``magnitude`` is |mean P|.
    """
    if not (0 < threshold_b2 <= 1):
        raise ValueError(f"threshold_b2 must lie in (0, 1], got {threshold_b2}")
    hits = bmap.valid & (bmap.b2 >= threshold_b2 - PEAK_SLACK)
    peaks = []
    for ka, kb in zip(*np.nonzero(hits)):
        ka, kb = int(ka), int(kb)
        val = est.acc[ka, kb]
        phase = biphase(est, ka, kb) if abs(val) >= 1e-12 else 0.0
        peaks.append(Peak(ka, kb, float(abs(val) / est.m), float(bmap.b2[ka, kb]), phase))
    peaks.sort(key=lambda p: (-p.b2, p.ka, p.kb))
    return PeakReport(tuple(peaks), threshold_b2)


def coupling_index(bmap: BicoherenceMap) -> float:
    """Mean squared bicoherence over valid cells: 0 for fully independent
    phases, 1 when every valid triple is locked."""
    if not bmap.valid.any():
        raise ValueError("bicoherence map has no valid cells")
    return float(np.mean(bmap.b2[bmap.valid]))


def randomize_phases(bins: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Replace the phases of each row of real-signal spectra with uniform draws.

    Magnitudes and conjugate symmetry are kept; DC and Nyquist bins are left
    alone so the surrogate stays real.
    """
    bins = np.atleast_2d(bins)
    m, n = bins.shape
    half = (n - 1) // 2
    phi = rng.uniform(0.0, 2 * np.pi, size=(m, half))
    out = bins.copy()
    out[:, 1:half + 1] = np.abs(bins[:, 1:half + 1]) * np.exp(1j * phi)
    out[:, n - half:] = np.conj(out[:, half:0:-1])
    return out


def phase_randomized_surrogate(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Time-domain phase-randomized copy of an (m, n) array of segments."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    F = randomize_phases(fft_radix2(values), rng)
    n = values.shape[1]
    return (np.conj(fft_radix2(np.conj(F))) / n).real


def _b2_at(bins: np.ndarray, ka: int, kb: int) -> float:
    prod = bins[:, ka] * bins[:, kb]
    fg = bins[:, ka + kb]
    num = abs(np.sum(prod * np.conj(fg))) ** 2
    den = float(np.sum(np.abs(prod) ** 2) * np.sum(np.abs(fg) ** 2))
    return num / den if den > 0 else 0.0


@dataclass(frozen=True)
class SurrogateResult:
    observed_b2: float
    surrogate_b2: np.ndarray
    p_value: float
    target: tuple[int, int]

    @property
    def n_surrogates(self) -> int:
        return self.surrogate_b2.size


def surrogate_test(segments, target: tuple[int, int], n_surrogates: int = DEFAULT_SURROGATES,
                   seed: int = 0, length_policy: str = "error") -> SurrogateResult:
    """Phase-randomization test of b2 at ``target``.

    Each surrogate redraws every Fourier phase of every segment, which keeps
    the power spectrum and destroys any phase coupling. The p-value is
    (1 + #{surrogate >= observed}) / (n_surrogates + 1). Surrogate ``j`` uses
    its own seed stream, so results do not depend on evaluation order.
    """
    if n_surrogates < 19:
        raise ValueError(f"n_surrogates must be >= 19, got {n_surrogates}")
    bins = segment_bins(segments, length_policy)
    n = bins.shape[1]
    ka, kb = target
    if not in_domain(n, ka, kb):
        raise ValueError(f"target ({ka}, {kb}) is outside the principal domain for n={n}")
    observed = _b2_at(bins, ka, kb)
    surr = np.empty(n_surrogates)
    for j in range(n_surrogates):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))
        surr[j] = _b2_at(randomize_phases(bins, rng), ka, kb)
    p = (1 + int(np.sum(surr >= observed))) / (n_surrogates + 1)
    return SurrogateResult(observed, surr, p, (ka, kb))


def analyze_segments(segments, threshold_b2: float = DEFAULT_THRESHOLD,
                     power_floor: float = DEFAULT_POWER_FLOOR,
                     length_policy: str = "error"):
    """Convenience pipeline: transforms, estimate, bicoherence and peaks."""
    bins = segment_bins(segments, length_policy)
    est = bispectrum_from_bins(bins)
    bmap = bicoherence(est, power_floor)
    return bins, est, bmap, detect_peaks(bmap, est, threshold_b2)
