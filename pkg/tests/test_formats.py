import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bispectral.bispec import principal_domain
from bispectral.formats import (read_config, read_ensemble_csv, read_heatmap, read_phases_csv,
                                read_spectrum_csv, write_config, write_ensemble_csv,
                                write_heatmap, write_matrix_csv, write_phases_csv,
                                write_spectrum_csv)
from bispectral.spectral import TimeSeries, dft


def payload(path):
    raw = path.read_bytes()
    header, body = raw[:raw.index(b"255\n") + 4], raw[raw.index(b"255\n") + 4:]
    return header, body


class TestHeatmap:
    def test_all_zero(self, tmp_path):
        write_heatmap(np.zeros((4, 4)), tmp_path / "z.pgm")
        header, body = payload(tmp_path / "z.pgm")
        assert header == b"P5\n4 4\n255\n"
        assert body == bytes(16)

    def test_single_max(self, tmp_path):
        m = np.zeros((3, 5))
        m[1, 2] = 0.37
        write_heatmap(m, tmp_path / "s.pgm")
        img = read_heatmap(tmp_path / "s.pgm")
        assert img.shape == (3, 5) and img[1, 2] == 255 and img.sum() == 255

    def test_half_rounds_up(self, tmp_path):
        write_heatmap(np.array([[0, 0.5], [0.5, 1.0]]), tmp_path / "h.pgm")
        assert payload(tmp_path / "h.pgm")[1] == bytes([0, 128, 128, 255])

    def test_mask_zeroes_cells(self, tmp_path):
        m = np.array([[2.0, 1.0], [1.0, 1.0]])
        mask = np.array([[False, True], [True, True]])
        write_heatmap(m, tmp_path / "m.pgm", mask=mask)
        assert payload(tmp_path / "m.pgm")[1] == bytes([0, 255, 255, 255])

    def test_rejects_non_finite(self, tmp_path):
        with pytest.raises(ValueError):
            write_heatmap(np.array([[np.nan, 1.0]]), tmp_path / "x.pgm")

    def test_io_error(self, tmp_path):
        with pytest.raises(OSError):
            write_heatmap(np.ones((2, 2)), tmp_path / "missing" / "x.pgm")

    @settings(max_examples=40, deadline=None)
    @given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)),
                  elements=st.floats(0, 1e6, allow_subnormal=False)))
    def test_scaling_contract(self, tmp_path_factory, m):
        path = tmp_path_factory.mktemp("pgm") / "p.pgm"
        write_heatmap(m, path)
        img = read_heatmap(path)
        if m.max() == 0:
            assert not img.any()
        else:
            assert img.flat[np.argmax(m)] == 255
            expected = np.floor(m / m.max() * 255 + 0.5)
            assert np.all(np.abs(img - expected) <= 0)


def test_ensemble_round_trip(tmp_path):
    x = np.random.default_rng(0).normal(size=(3, 16))
    write_ensemble_csv(x, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "r0,r1,r2"
    assert np.array_equal(read_ensemble_csv(tmp_path / "e.csv"), x)


def test_ensemble_rejects_other_header(tmp_path):
    (tmp_path / "e.csv").write_text("a,b\n1,2\n3,4\n")
    with pytest.raises(ValueError, match="ensemble"):
        read_ensemble_csv(tmp_path / "e.csv")


def test_phases_round_trip(tmp_path):
    ph = np.random.default_rng(1).uniform(0, 6, size=(4, 3))
    write_phases_csv(ph, tmp_path / "p.csv")
    assert np.array_equal(read_phases_csv(tmp_path / "p.csv"), ph)


def test_spectrum_round_trip(tmp_path):
    s = dft(TimeSeries(np.random.default_rng(2).normal(size=8)))
    write_spectrum_csv(s, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "index,real,imag" and len(lines) == 9
    assert np.array_equal(read_spectrum_csv(tmp_path / "s.csv").bins, s.bins)


def test_matrix_csv_layout(tmp_path):
    dom = principal_domain(16)
    m = np.where(dom, 0.5, 0.0)
    write_matrix_csv(m, dom, tmp_path / "m.csv")
    rows = [r.split(",") for r in (tmp_path / "m.csv").read_text().splitlines()]
    assert rows[0] == ["ka\\kb", "1", "2", "3", "4"]
    assert [r[0] for r in rows[1:]] == [str(k) for k in range(1, 8)]
    # ka=1 has only kb=1; ka=7 has only kb=1
    assert rows[1][1:] == ["0.5", "", "", ""]
    assert rows[4][1:] == ["0.5", "0.5", "0.5", "0.5"]
    assert rows[5][1:] == ["0.5", "0.5", "0.5", ""]
    assert rows[7][1:] == ["0.5", "", "", ""]


def test_config_round_trip(tmp_path):
    write_config({"seed": 7, "kg": None, "mode": "coupled"}, tmp_path / "c.txt",
                 comments=["hello"])
    text = (tmp_path / "c.txt").read_text()
    assert text == "# hello\nseed=7\nkg=\nmode=coupled\n"
    assert read_config(tmp_path / "c.txt") == {"seed": "7", "kg": "", "mode": "coupled"}


def test_config_rejects_garbage(tmp_path):
    (tmp_path / "c.txt").write_text("seed 7\n")
    with pytest.raises(ValueError, match="key=value"):
        read_config(tmp_path / "c.txt")
