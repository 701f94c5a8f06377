"""Discrete Fourier transform engine.

Forward convention is the unnormalized negative exponent

    F(k) = sum_t f(t) exp(-2j*pi*k*t/N),

with the 1/N factor carried by the inverse. Bin ``k`` corresponds to
angular frequency ``2*pi*k/N`` rad/sample. The continuous transform is the
N -> infinity limit of this sum (up to sign and 1/sqrt(2*pi) scaling) and is
not implemented separately.

Two routes compute the same contract: ``dft_reference`` is the O(N^2)
literal sum and ``dft`` is an iterative radix-2 transform. The reference
exists to test the fast path and should not be used for real work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

CONVENTION = "unnormalized-forward"

LengthPolicy = Literal["error", "pad", "truncate"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real series; ``dt`` is in seconds or 1.0 for index time."""

    values: np.ndarray
    dt: float = 1.0
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError(f"TimeSeries values must be 1-D, got shape {v.shape}")
        if v.size < 2:
            raise ValueError(f"TimeSeries needs at least 2 samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ValueError(f"TimeSeries sample {bad} is not finite ({v[bad]})")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex DFT output. ``length_policy`` records any padding or truncation
    applied to the source before transforming."""

    bins: np.ndarray
    n: int
    convention: str = CONVENTION
    dt: float = 1.0
    length_policy: str = "exact"
    source_length: int | None = None

    def __post_init__(self):
        b = np.array(self.bins, dtype=complex)
        if b.ndim != 1 or b.size != self.n:
            raise ValueError(f"Spectrum expects {self.n} bins, got shape {b.shape}")
        if self.convention != CONVENTION:
            raise ValueError(f"unsupported convention {self.convention!r}")
        object.__setattr__(self, "bins", _frozen(b))
        if self.source_length is None:
            object.__setattr__(self, "source_length", self.n)


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    power: np.ndarray = field()

    def __post_init__(self):
        p = np.array(self.power, dtype=float)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("power entries must be finite and non-negative")
        object.__setattr__(self, "power", _frozen(p))


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft_radix2(x: np.ndarray) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT along the last axis.

    Works on any leading batch shape. The last axis length must be a power
    of two.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"radix-2 transform needs a power-of-two length, got {n}")
    lead = x.shape[:-1]
    a = x[..., _bit_reverse_indices(n)].astype(complex)
    # exact twiddles exp(-2*pi*i*k/n), k < n/2
    k = np.arange(max(n // 2, 1))
    twiddle = np.exp(-2j * np.pi * k / n)
    size = 2
    while size <= n:
        half = size // 2
        w = twiddle[:: n // size][:half]
        a = a.reshape(*lead, n // size, size)
        even = a[..., :half]
        odd = a[..., half:] * w
        a = np.concatenate([even + odd, even - odd], axis=-1)
        size *= 2
    return a.reshape(*lead, n)


def _check_finite(series: TimeSeries) -> np.ndarray:
    # TimeSeries already validates; this guards duck-typed callers
    v = np.asarray(series.values, dtype=float)
    if v.size < 2 or not np.all(np.isfinite(v)):
        raise ValueError("series must have >= 2 finite samples")
    return v


def dft_reference(series: TimeSeries) -> Spectrum:
    """Direct O(N^2) evaluation of the forward sum. Testing oracle only."""
    f = _check_finite(series)
    n = f.size
    t = np.arange(n)
    # reduce k*t mod n before scaling so the phase argument stays small
    phase = np.outer(t, t) % n
    kernel = np.exp(-2j * np.pi * phase / n)
    bins = np.array([np.sum(f * kernel[k]) for k in range(n)])
    return Spectrum(bins, n, dt=series.dt)


def fit_length(values: np.ndarray, policy: LengthPolicy = "error") -> tuple[np.ndarray, str]:
    """Bring ``values`` to a power-of-two length according to ``policy``.

    Returns the adjusted array and the tag recorded in Spectrum metadata.
    """
    n = values.shape[-1]
    if is_power_of_two(n):
        return values, "exact"
    lo = 1 << (n.bit_length() - 1)
    hi = lo << 1
    if policy == "error":
        raise ValueError(
            f"length {n} is not a power of two; accepted lengths are 2, 4, 8, ... "
            f"(nearest: {lo} or {hi}). Pass length_policy='pad' to zero-pad to {hi} "
            f"or length_policy='truncate' to keep the first {lo} samples."
        )
    if policy == "pad":
        pad = [(0, 0)] * (values.ndim - 1) + [(0, hi - n)]
        return np.pad(values, pad), "zero-padded"
    if policy == "truncate":
        return values[..., :lo], "truncated"
    raise ValueError(f"unknown length policy {policy!r}")


def dft(series: TimeSeries, length_policy: LengthPolicy = "error") -> Spectrum:
    """Fast forward transform with the same contract as ``dft_reference``."""
    f = _check_finite(series)
    f, tag = fit_length(f, length_policy)
    return Spectrum(fft_radix2(f), f.size, dt=series.dt,
                    length_policy=tag, source_length=len(series))


def inverse_dft(spectrum: Spectrum) -> TimeSeries:
    """Inverse transform (carries the 1/N factor).

    The imaginary part of the result must be numerical residue only; a
    spectrum without conjugate symmetry is rejected.
    """
    b = np.asarray(spectrum.bins, dtype=complex)
    if not np.all(np.isfinite(b)):
        raise ValueError("spectrum contains non-finite bins")
    n = b.size
    if is_power_of_two(n):
        x = np.conj(fft_radix2(np.conj(b))) / n
    else:
        t = np.arange(n)
        kernel = np.exp(2j * np.pi * (np.outer(t, t) % n) / n)
        x = kernel @ b / n
    residue = float(np.max(np.abs(x.imag))) if n else 0.0
    scale = max(1.0, float(np.max(np.abs(x.real))))
    if residue > 1e-9 * scale:
        raise ValueError(
            f"inverse has imaginary residue {residue:.3g}; spectrum is not the "
            "transform of a real series"
        )
    return TimeSeries(x.real, dt=spectrum.dt)


def power_spectrum(spectrum: Spectrum) -> PowerSpectrum:
    b = spectrum.bins
    return PowerSpectrum(b.real ** 2 + b.imag ** 2)
