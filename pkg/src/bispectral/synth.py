"""Three-cosine benchmark ensembles with and without quadratic phase coupling.

Each realization is

    f(t) = A cos(2 pi ka t/n + th_a) + A cos(2 pi kb t/n + th_b) + A cos(2 pi kg t/n + th_g)

with th_a, th_b uniform on [0, 2 pi) per realization. In ``independent``
mode th_g is a third independent draw; in ``coupled`` mode th_g = th_a + th_b.

Random streams are derived from ``(seed, realization index)`` through
``numpy.random.SeedSequence`` spawn keys, so realizations can be generated
in any order (or in parallel) and still come out bit-identical. Phase draws
and noise draws use disjoint key prefixes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from .spectral import TimeSeries, is_power_of_two

_PHASE_STREAM = 0
_NOISE_STREAM = 1


@dataclass(frozen=True)
class SynthParams:
    n: int = 256
    m: int = 64
    k_alpha: int = 5
    k_beta: int = 9
    k_gamma_rule: Literal["sum", "explicit"] = "sum"
    k_gamma: int | None = None
    coupling: Literal["independent", "coupled"] = "coupled"
    amplitude: float = 1.0
    noise_amplitude: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not is_power_of_two(self.n) or self.n < 8:
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.k_alpha < 1 or self.k_beta < 1:
            raise ValueError(
                f"k_alpha and k_beta must be >= 1, got {self.k_alpha}, {self.k_beta}")
        if self.k_alpha + self.k_beta >= self.n / 2:
            raise ValueError(
                f"k_alpha + k_beta must stay below n/2 = {self.n // 2}, "
                f"got {self.k_alpha + self.k_beta}")
        if self.k_gamma_rule == "sum":
            if self.k_gamma is not None and self.k_gamma != self.k_alpha + self.k_beta:
                raise ValueError("k_gamma_rule='sum' requires k_gamma == k_alpha + k_beta")
        elif self.k_gamma_rule == "explicit":
            if self.k_gamma is None or not 1 <= self.k_gamma < self.n / 2:
                raise ValueError(
                    f"explicit k_gamma must lie in [1, n/2), got {self.k_gamma}")
        else:
            raise ValueError(f"unknown k_gamma_rule {self.k_gamma_rule!r}")
        if self.coupling not in ("independent", "coupled"):
            raise ValueError(f"coupling must be 'independent' or 'coupled', got {self.coupling!r}")
        if not (self.amplitude > 0):
            raise ValueError(f"amplitude must be > 0, got {self.amplitude}")
        if not (self.noise_amplitude >= 0):
            raise ValueError(f"noise_amplitude must be >= 0, got {self.noise_amplitude}")

    @property
    def kg(self) -> int:
        if self.k_gamma_rule == "sum":
            return self.k_alpha + self.k_beta
        return int(self.k_gamma)

    @property
    def bins(self) -> tuple[int, int, int]:
        return self.k_alpha, self.k_beta, self.kg


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Equal-length realizations. ``phases`` is an (m, 3) array of
    (th_a, th_b, th_g); both are None for ingested data."""

    realizations: tuple[TimeSeries, ...]
    params: SynthParams | None = None
    phases: np.ndarray | None = None

    def __post_init__(self):
        reals = tuple(self.realizations)
        if not reals:
            raise ValueError("ensemble needs at least one realization")
        lengths = {len(r) for r in reals}
        if len(lengths) != 1:
            raise ValueError(f"realizations have unequal lengths {sorted(lengths)}")
        object.__setattr__(self, "realizations", reals)
        if self.phases is not None:
            ph = np.array(self.phases, dtype=float)
            ph.setflags(write=False)
            object.__setattr__(self, "phases", ph)

    @property
    def values(self) -> np.ndarray:
        """(m, n) array view of the realizations."""
        return np.stack([r.values for r in self.realizations])

    @property
    def m(self) -> int:
        return len(self.realizations)

    @property
    def n(self) -> int:
        return len(self.realizations[0])


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def draw_phases(params: SynthParams) -> np.ndarray:
    """(m, 3) phase table. The first two columns do not depend on the coupling
    mode, so coupled and independent ensembles with one seed are matched."""
    out = np.empty((params.m, 3))
    for i in range(params.m):
        th = _rng(params.seed, _PHASE_STREAM, i).uniform(0.0, 2 * np.pi, size=3)
        if params.coupling == "coupled":
            th[2] = th[0] + th[1]
        out[i] = th
    return out


def three_cosines(params: SynthParams, theta_a: float, theta_b: float,
                  theta_g: float) -> np.ndarray:
    """Noise-free closed form for one realization."""
    t = np.arange(params.n)
    A = params.amplitude
    total = np.zeros(params.n)
    for k, th in zip(params.bins, (theta_a, theta_b, theta_g)):
        total += A * np.cos(2 * np.pi * ((k * t) % params.n) / params.n + th)
    return total


def generate(params: SynthParams, phases: Sequence | np.ndarray | None = None) -> Ensemble:
    """Build an ensemble from ``params``.

    ``phases`` overrides the seeded draw (a test hook). It may be (m, 2) --
    th_g then follows the coupling mode, drawn from the seed when
    independent -- or (m, 3), used verbatim. A coupled ensemble rejects
    (m, 3) tables that break th_g = th_a + th_b.
    """
    if phases is None:
        table = draw_phases(params)
    else:
        given = np.atleast_2d(np.asarray(phases, dtype=float))
        if given.shape[0] != params.m or given.shape[1] not in (2, 3):
            raise ValueError(f"phases must have shape ({params.m}, 2) or ({params.m}, 3), "
                             f"got {given.shape}")
        if given.shape[1] == 3:
            table = given.copy()
            if params.coupling == "coupled" and not np.array_equal(
                    table[:, 2], table[:, 0] + table[:, 1]):
                raise ValueError("coupled mode requires theta_g == theta_a + theta_b")
        else:
            table = draw_phases(params)
            table[:, :2] = given
            if params.coupling == "coupled":
                table[:, 2] = table[:, 0] + table[:, 1]

    label = f"{params.coupling} ka={params.k_alpha} kb={params.k_beta} kg={params.kg}"
    reals = tuple(
        TimeSeries(three_cosines(params, *table[i]), label=f"{label} r{i}")
        for i in range(params.m)
    )
    ens = Ensemble(reals, params=params, phases=table)
    if params.noise_amplitude > 0:
        ens = add_noise(ens, params.noise_amplitude, params.seed)
    return ens


def add_noise(ensemble: Ensemble, noise_amplitude: float, seed: int) -> Ensemble:
    """Add i.i.d. uniform noise on [-a, a] to every sample. Returns a new ensemble."""
    if not (noise_amplitude >= 0):
        raise ValueError(f"noise_amplitude must be >= 0, got {noise_amplitude}")
    if noise_amplitude == 0:
        return ensemble
    reals = []
    for i, r in enumerate(ensemble.realizations):
        noise = _rng(seed, _NOISE_STREAM, i).uniform(-noise_amplitude, noise_amplitude, size=len(r))
        reals.append(TimeSeries(r.values + noise, dt=r.dt, label=r.label))
    params = ensemble.params
    if params is not None:
        params = replace(params, noise_amplitude=noise_amplitude)
    return Ensemble(tuple(reals), params=params, phases=ensemble.phases)
