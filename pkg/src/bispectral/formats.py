"""File formats: ensemble/spectrum/matrix CSVs, PGM heatmaps, key=value configs."""

from __future__ import annotations

import csv
import os
import re
from pathlib import Path

import numpy as np

from .spectral import Spectrum


def _fmt(x: float) -> str:
    return repr(float(x))


def write_heatmap(matrix: np.ndarray, path, mask: np.ndarray | None = None) -> tuple[int, int]:
    """Binary PGM (P5, maxval 255), one byte per cell, row-major.

    Values scale linearly so the largest cell maps to 255 and 0 to 0,
    rounding half up. Cells outside ``mask`` and negative values are 0.
    Returns (width, height).
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"heatmap matrix must be 2-D, got shape {m.shape}")
    if mask is None:
        mask = np.ones(m.shape, dtype=bool)
    if not np.all(np.isfinite(m[mask])):
        raise ValueError("heatmap matrix contains non-finite values")
    vals = np.where(mask, np.clip(m, 0.0, None), 0.0)
    top = float(vals.max()) if vals.size else 0.0
    if top > 0:
        pixels = np.floor(vals * (255.0 / top) + 0.5)
        pixels[vals == top] = 255
    else:
        pixels = np.zeros(m.shape)
    height, width = m.shape
    data = f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.astype(np.uint8).tobytes()
    Path(path).write_bytes(data)
    return width, height


def read_heatmap(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"255":
        raise ValueError(f"{path} is not an 8-bit binary PGM")
    width, height = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)


def write_ensemble_csv(values: np.ndarray, path) -> None:
    """One column per realization, header r0,r1,..."""
    values = np.atleast_2d(values)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"r{i}" for i in range(values.shape[0])])
        for row in values.T:
            w.writerow([_fmt(v) for v in row])


ENSEMBLE_HEADER = re.compile(r"^r\d+$")


def is_ensemble_header(header: list[str]) -> bool:
    return bool(header) and all(ENSEMBLE_HEADER.match(h.strip()) for h in header)


def read_ensemble_csv(path) -> np.ndarray:
    """Inverse of ``write_ensemble_csv``; returns an (m, n) array."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or not is_ensemble_header(header):
            raise ValueError(f"{path}: not an ensemble CSV (expected header r0,r1,...)")
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path} line {reader.line_num}: expected {len(header)} "
                                 f"columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path} line {reader.line_num}: non-numeric value") from None
    if len(rows) < 2:
        raise ValueError(f"{path}: ensemble needs at least 2 samples per realization")
    return np.array(rows).T


def write_phases_csv(phases: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["realization", "theta_alpha", "theta_beta", "theta_gamma"])
        for i, (a, b, g) in enumerate(phases):
            w.writerow([i, _fmt(a), _fmt(b), _fmt(g)])


def read_phases_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["theta_alpha"]), float(r["theta_beta"]), float(r["theta_gamma"])]
                     for r in rows])


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    """Complex spectrum as index,real,imag."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "real", "imag"])
        for k, b in enumerate(spectrum.bins):
            w.writerow([k, _fmt(b.real), _fmt(b.imag)])


def read_spectrum_csv(path, dt: float = 1.0) -> Spectrum:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    bins = np.array([complex(float(r["real"]), float(r["imag"])) for r in rows])
    return Spectrum(bins, bins.size, dt=dt)


def write_power_csv(mean_power: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin", "mean_power"])
        for k, p in enumerate(mean_power):
            w.writerow([k, _fmt(p)])


def write_bispectrum_csv(mean: np.ndarray, domain: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ka", "kb", "re", "im"])
        for ka, kb in zip(*np.nonzero(domain)):
            v = mean[ka, kb]
            w.writerow([int(ka), int(kb), _fmt(v.real), _fmt(v.imag)])


def write_bicoherence_csv(b2: np.ndarray, valid: np.ndarray, domain: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ka", "kb", "b2", "valid"])
        for ka, kb in zip(*np.nonzero(domain)):
            w.writerow([int(ka), int(kb), _fmt(b2[ka, kb]), int(valid[ka, kb])])


def write_matrix_csv(matrix: np.ndarray, domain: np.ndarray, path) -> None:
    """Dense matrix layout: row = ka, column = kb, empty outside the domain.

    Rows and columns cover the principal-domain extents (ka >= 1, kb >= 1);
    the first column holds ka and the header holds kb.
    """
    rows = np.flatnonzero(domain.any(axis=1))
    cols = np.flatnonzero(domain.any(axis=0))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ka\\kb"] + [int(c) for c in cols])
        for r in rows:
            w.writerow([int(r)] + [_fmt(matrix[r, c]) if domain[r, c] else "" for c in cols])


def read_table(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_config(params: dict, path, comments: list[str] | None = None) -> None:
    lines = [f"# {c}" for c in (comments or [])]
    lines += [f"{k}={'' if v is None else v}" for k, v in params.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_config(path) -> dict[str, str]:
    """key=value lines; blank lines and ``#`` comments ignored."""
    out = {}
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{os.fspath(path)} line {i}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
