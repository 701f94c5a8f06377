import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bispectral.spectral import dft, dft_reference
from bispectral.synth import SynthParams, add_noise, draw_phases, generate


def closed_form(n, bins, phases, amp=1.0):
    t = np.arange(n)
    return sum(amp * np.cos(2 * np.pi * k * t / n + th) for k, th in zip(bins, phases))


class TestParams:
    @pytest.mark.parametrize("kwargs, match", [
        (dict(k_alpha=0), "k_alpha and k_beta"),
        (dict(k_alpha=64, k_beta=64), "below n/2"),
        (dict(n=100), "power of two"),
        (dict(m=0), "m must"),
        (dict(amplitude=0), "amplitude"),
        (dict(noise_amplitude=-1), "noise_amplitude"),
        (dict(k_gamma_rule="explicit"), "explicit k_gamma"),
        (dict(k_gamma_rule="sum", k_gamma=3), "k_gamma == k_alpha"),
        (dict(coupling="sometimes"), "coupling"),
    ])
    def test_invalid(self, kwargs, match):
        with pytest.raises(ValueError, match=match):
            SynthParams(**kwargs)

    def test_sum_rule(self):
        assert SynthParams(k_alpha=5, k_beta=9).kg == 14

    def test_explicit_rule(self):
        # the reciprocal relation 1/kg = 1/ka + 1/kb has no integer solution
        # for (5, 9); explicit bins stay available for such experiments
        p = SynthParams(k_gamma_rule="explicit", k_gamma=3)
        assert p.bins == (5, 9, 3)


class TestGenerate:
    def test_forced_zero_phases_start_at_three(self):
        p = SynthParams(coupling="coupled", m=2, noise_amplitude=0.0)
        ens = generate(p, phases=np.zeros((2, 2)))
        assert ens.realizations[0].values[0] == 3.0
        assert ens.phases[0, 2] == 0.0

    def test_spectral_support(self):
        p = SynthParams(n=256, k_alpha=5, k_beta=9, m=3, noise_amplitude=0.0, seed=5)
        for r in generate(p).realizations:
            mag = np.abs(dft_reference(r).bins)
            support = [5, 9, 14, 251, 247, 242]
            assert np.all(np.abs(mag[support] - 128) < 1e-6)
            off = np.delete(mag, support)
            assert np.max(off) < 1e-6
            assert np.sum(off ** 2) < 1e-10 * np.sum(mag ** 2)

    def test_deterministic(self):
        p = SynthParams(seed=123, noise_amplitude=0.05, m=8)
        a, b = generate(p), generate(p)
        assert a.values.tobytes() == b.values.tobytes()
        assert a.phases.tobytes() == b.phases.tobytes()

    def test_seed_changes_output(self):
        a = generate(SynthParams(seed=1, m=2)).values
        b = generate(SynthParams(seed=2, m=2)).values
        assert not np.array_equal(a, b)

    def test_coupled_phase_law(self):
        ph = generate(SynthParams(coupling="coupled", seed=9)).phases
        assert np.array_equal(ph[:, 2], ph[:, 0] + ph[:, 1])

    def test_matched_first_two_phases(self):
        a = draw_phases(SynthParams(coupling="coupled", seed=4))
        b = draw_phases(SynthParams(coupling="independent", seed=4))
        assert np.array_equal(a[:, :2], b[:, :2])
        assert not np.allclose(b[:, 2], b[:, 0] + b[:, 1])

    def test_phase_ranges(self):
        ph = generate(SynthParams(coupling="independent", m=200, seed=3)).phases
        assert np.all((ph >= 0) & (ph < 2 * np.pi))

    def test_order_independent_streams(self):
        # realization i depends only on (seed, i)
        small = generate(SynthParams(m=3, seed=77, noise_amplitude=0.05)).values
        big = generate(SynthParams(m=10, seed=77, noise_amplitude=0.05)).values
        assert np.array_equal(small, big[:3])

    def test_hook_rejects_broken_coupling(self):
        with pytest.raises(ValueError, match="theta_g"):
            generate(SynthParams(coupling="coupled", m=1), phases=[[0.1, 0.2, 0.0]])

    def test_hook_shape(self):
        with pytest.raises(ValueError, match="shape"):
            generate(SynthParams(m=2), phases=np.zeros((3, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 63 - 1), st.sampled_from(["coupled", "independent"]),
       st.floats(0.1, 10))
def test_closed_form_match(seed, coupling, amp):
    p = SynthParams(m=3, seed=seed, coupling=coupling, amplitude=amp, noise_amplitude=0.0)
    ens = generate(p)
    for r, th in zip(ens.realizations, ens.phases):
        ref = closed_form(p.n, p.bins, th, amp)
        assert np.max(np.abs(r.values - ref)) < 1e-12 * max(1, amp)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 63 - 1))
def test_power_spectra_indistinguishable(seed):
    common = dict(m=2, seed=seed, noise_amplitude=0.0)
    a = generate(SynthParams(coupling="independent", **common))
    b = generate(SynthParams(coupling="coupled", **common))
    for ra, rb in zip(a.realizations, b.realizations):
        pa = np.abs(dft(ra).bins) ** 2
        pb = np.abs(dft(rb).bins) ** 2
        assert np.max(np.abs(pa - pb)) <= 1e-9 * np.max(pa)


class TestNoise:
    def test_zero_is_identity(self):
        ens = generate(SynthParams(m=2, noise_amplitude=0.0))
        out = add_noise(ens, 0.0, seed=1)
        assert np.array_equal(out.values, ens.values)

    def test_mean_and_bounds(self):
        ens = generate(SynthParams(m=64, noise_amplitude=0.0))  # 16384 samples
        noisy = add_noise(ens, 0.05, seed=8)
        noise = noisy.values - ens.values
        assert abs(noise.mean()) <= 0.005
        assert np.max(np.abs(noise)) <= 0.05
        # uniform on [-a, a] has variance a^2/3
        assert abs(noise.var() - 0.05 ** 2 / 3) < 0.1 * 0.05 ** 2 / 3

    def test_deterministic_and_pure(self):
        ens = generate(SynthParams(m=4, noise_amplitude=0.0))
        before = ens.values.copy()
        a = add_noise(ens, 0.05, seed=3)
        b = add_noise(ens, 0.05, seed=3)
        assert a.values.tobytes() == b.values.tobytes()
        assert np.array_equal(ens.values, before)

    def test_negative_rejected(self):
        ens = generate(SynthParams(m=1, noise_amplitude=0.0))
        with pytest.raises(ValueError):
            add_noise(ens, -0.1, seed=0)
