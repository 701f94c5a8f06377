"""Command-line interface.

    bispectral synth     --mode coupled --seed 42 --out runs/coupled
    bispectral analyze   --input runs/coupled/ensemble.csv --out runs/coupled/analysis
    bispectral peaks     --input runs/coupled/analysis --threshold 0.8
    bispectral surrogate --input runs/coupled/ensemble.csv --target 9,5
    bispectral report    --input INFY.csv --transform log_return

Every run writes ``config.txt`` (key=value) into its output directory;
``--config FILE`` loads the same format and explicit flags override it.
The output directory defaults to ``$BISPECTRAL_OUT`` or ``./out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bispec import (DEFAULT_POWER_FLOOR, DEFAULT_SURROGATES, DEFAULT_THRESHOLD,
                     BicoherenceMap, BispectrumEstimate, analyze_segments, coupling_index,
                     detect_peaks, in_domain, surrogate_test)
from .formats import (is_ensemble_header, read_config, read_ensemble_csv, read_table,
                      write_bicoherence_csv, write_bispectrum_csv, write_config,
                      write_ensemble_csv, write_heatmap, write_matrix_csv,
                      write_phases_csv, write_power_csv)
from .ingest import parse_ticks, segment, sessionize, transform
from .synth import SynthParams, generate

OUT_ENV = "BISPECTRAL_OUT"
ANALYZE_FILES = ("spectrum.csv", "bispectrum.csv", "bicoherence.csv",
                 "bicoherence.pgm", "report.txt")


class CLIError(Exception):
    exit_code = 1


class UsageError(CLIError):
    exit_code = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # single diagnostic line, usage exit status
        self.exit(2, f"{self.prog}: error: {message}\n")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _target(text):
    if text in (None, "", "None"):
        return None
    try:
        ka, kb = (int(p) for p in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"target must look like KA,KB, got {text!r}") from None
    return ka, kb


def _surrogates(text) -> int:
    n = int(text)
    if n < 19:
        raise argparse.ArgumentTypeError(f"--surrogates must be >= 19 (got {n})")
    return n


def _positive_int(text) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _add_common(p):
    p.add_argument("--out", default=None,
                   help=f"output directory (default ${OUT_ENV} or ./out)")
    p.add_argument("--config", default=None, help="key=value file supplying defaults")
    p.add_argument("--seed", type=int, default=42)


def _add_analysis(p):
    p.add_argument("--input", required=False, default=None,
                   help="ensemble CSV (header r0,r1,...) or minute-bar tick CSV")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--power-floor", type=float, default=DEFAULT_POWER_FLOOR)
    p.add_argument("--transform", default="raw",
                   choices=["raw", "demean", "log_return", "first_difference"])
    p.add_argument("--segment-length", type=int, default=256)
    p.add_argument("--overlap", type=float, default=0.0)
    p.add_argument("--window", default="rectangular", choices=["rectangular", "hann"])
    p.add_argument("--max-gap", type=_positive_int, default=60,
                   help="minutes; longer gaps start a new session")
    p.add_argument("--price-column", default="close", choices=["open", "high", "low", "close"])
    p.add_argument("--length-policy", default="error", choices=["error", "pad", "truncate"],
                   help="handling of non-power-of-two ensemble lengths")
    p.add_argument("--matrix-csv", type=_bool, nargs="?", const=True, default=False,
                   help="also write bicoherence_matrix.csv (row=ka, column=kb)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bispectral", description="Bispectral phase-coupling analysis")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a coupled or uncoupled three-cosine ensemble")
    _add_common(p)
    p.add_argument("--mode", default="coupled", choices=["coupled", "uncoupled"])
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--ka", type=int, default=5)
    p.add_argument("--kb", type=int, default=9)
    p.add_argument("--kg", type=int, default=None,
                   help="explicit third bin (default ka+kb)")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.05)

    p = sub.add_parser("analyze", help="spectra, bispectrum, bicoherence, heatmap, report")
    _add_common(p)
    _add_analysis(p)

    p = sub.add_parser("peaks", help="re-threshold an analyze output directory")
    _add_common(p)
    p.add_argument("--input", default=None, help="directory written by analyze")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    for name, text in (("surrogate", "phase-randomization significance of one cell"),
                       ("report", "analyze plus surrogate p-values for every peak")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        _add_analysis(p)
        p.add_argument("--surrogates", type=_surrogates, default=DEFAULT_SURROGATES)
        if name == "surrogate":
            p.add_argument("--target", type=_target, default=None,
                           help="KA,KB cell (default: strongest peak)")
    return parser


def _effective(args) -> dict:
    skip = {"command", "config", "out"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        if k == "target" and v is not None:
            v = f"{v[0]},{v[1]}"
        out[k] = v
    return out


def parse_args(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = read_config(args.config)
        except OSError as exc:
            parser.error(f"cannot read config {args.config}: {exc.strerror}")
        except ValueError as exc:
            parser.error(str(exc))
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        # an empty value means "unset" (e.g. kg= for the sum rule)
        conf = {k.replace("-", "_"): (v if v != "" else None) for k, v in conf.items()}
        unknown = sorted(set(conf) - known)
        if unknown:
            parser.error(f"unknown key(s) in {args.config}: {', '.join(unknown)}")
        conf.pop("config", None)
        subparser.set_defaults(**conf)
        args = parser.parse_args(argv)
    return args


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise CLIError(f"output directory {out} is not writable")
    return out


def _echo_config(args, out: Path) -> None:
    write_config(_effective(args), out / "config.txt",
                 comments=[f"bispectral {__version__}", f"command={args.command}"])


def cmd_synth(args) -> Path:
    out = _out_dir(args)
    try:
        params = SynthParams(
            n=args.n, m=args.m, k_alpha=args.ka, k_beta=args.kb,
            k_gamma_rule="sum" if args.kg is None else "explicit", k_gamma=args.kg,
            coupling="coupled" if args.mode == "coupled" else "independent",
            amplitude=args.amplitude, noise_amplitude=args.noise, seed=args.seed)
    except ValueError as exc:
        raise UsageError(f"invalid synth parameters: {exc}") from None
    ens = generate(params)
    write_ensemble_csv(ens.values, out / "ensemble.csv")
    write_phases_csv(ens.phases, out / "phases.csv")
    _echo_config(args, out)
    return out


def load_segments(args) -> tuple[np.ndarray, dict]:
    """Read ``args.input`` and return (m, n) segment values plus provenance."""
    if not args.input:
        raise CLIError("--input is required")
    path = Path(args.input)
    try:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
    except OSError as exc:
        raise CLIError(f"{path}: {exc.strerror}") from None
    if not first.strip():
        raise CLIError(f"{path}: empty file")
    header = [h.strip() for h in first.strip().split(",")]
    info = {"input": str(path)}
    try:
        if is_ensemble_header(header):
            values = read_ensemble_csv(path)
            info.update(source="ensemble", realizations=values.shape[0],
                        samples=values.shape[1])
            return values, info
        if "timestamp" not in (h.lower() for h in header):
            raise CLIError(f"{path}: unrecognized header {first.strip()!r} "
                           "(expected r0,r1,... or a tick CSV with a timestamp column)")
        ticks = parse_ticks(path, price_column=args.price_column)
        sessions = transform(sessionize(ticks, args.max_gap), args.transform)
        segs = segment(sessions, args.segment_length, args.overlap, args.window)
    except (ValueError, OSError) as exc:
        raise CLIError(f"{path}: {exc}") from None
    info.update(source="ticks", records=len(ticks), duplicates=ticks.duplicates,
                sessions=len(sessions), session_lengths=" ".join(map(str, sessions.lengths)),
                fill_count=sessions.fill_count, dropped_sessions=sessions.dropped_sessions,
                segments=len(segs), dropped_samples=segs.dropped)
    return np.stack([s.values for s in segs]), info


def _run_analysis(args, values):
    try:
        return analyze_segments(values, args.threshold, args.power_floor, args.length_policy)
    except ValueError as exc:
        raise CLIError(f"{args.input}: {exc}") from None


def _peak_rows(report, pvalues=None):
    rows = ["ka,kb,mean_abs_p,b2,biphase,p_value"]
    for i, pk in enumerate(report.peaks):
        p = "" if pvalues is None else repr(pvalues[i])
        rows.append(f"{pk.ka},{pk.kb},{pk.magnitude!r},{pk.b2!r},{pk.biphase!r},{p}")
    return rows


def _write_analysis(args, out: Path, bins, est, bmap, report, info, pvalues=None):
    write_power_csv(np.mean(np.abs(bins) ** 2, axis=0), out / "spectrum.csv")
    write_bispectrum_csv(est.mean, est.domain, out / "bispectrum.csv")
    write_bicoherence_csv(bmap.b2, bmap.valid, est.domain, out / "bicoherence.csv")
    write_heatmap(bmap.b2[1:, 1:], out / "bicoherence.pgm", mask=bmap.valid[1:, 1:])
    if args.matrix_csv:
        write_matrix_csv(bmap.b2, est.domain, out / "bicoherence_matrix.csv")
    ci = coupling_index(bmap) if bmap.valid.any() else float("nan")
    lines = ["# bispectral analysis report"]
    lines += [f"{k}={v}" for k, v in info.items()]
    lines += [f"segment_count={est.m}", f"segment_length={est.n}",
              f"valid_cells={int(bmap.valid.sum())}", f"coupling_index={ci!r}",
              f"threshold_b2={report.threshold_b2!r}",
              f"surrogates_used={report.surrogates_used}", f"peak_count={len(report)}"]
    lines += _peak_rows(report, pvalues)
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_analyze(args) -> Path:
    values, info = load_segments(args)
    bins, est, bmap, report = _run_analysis(args, values)
    out = _out_dir(args)
    _write_analysis(args, out, bins, est, bmap, report, info)
    _echo_config(args, out)
    return out


def _load_analysis_dir(path: Path) -> tuple[BispectrumEstimate, BicoherenceMap]:
    try:
        bis = read_table(path / "bispectrum.csv")
        bic = read_table(path / "bicoherence.csv")
    except OSError as exc:
        raise CLIError(f"{path}: not an analyze output directory ({exc.strerror})") from None
    if not bis or len(bis) != len(bic):
        raise CLIError(f"{path}: bispectrum.csv and bicoherence.csv disagree")
    ka = np.array([int(r["ka"]) for r in bis])
    kb = np.array([int(r["kb"]) for r in bis])
    n = 2 * int(np.max(ka + kb))
    shape = (n // 2, n // 4 + 1)
    acc = np.zeros(shape, dtype=complex)
    acc[ka, kb] = [complex(float(r["re"]), float(r["im"])) for r in bis]
    b2 = np.zeros(shape)
    valid = np.zeros(shape, dtype=bool)
    cka = np.array([int(r["ka"]) for r in bic])
    ckb = np.array([int(r["kb"]) for r in bic])
    b2[cka, ckb] = [float(r["b2"]) for r in bic]
    valid[cka, ckb] = [r["valid"] == "1" for r in bic]
    est = BispectrumEstimate(n=n, m=1, acc=acc, p_ab=np.zeros(shape), p_g=np.zeros(shape))
    return est, BicoherenceMap(b2, valid)


def cmd_peaks(args) -> Path:
    if not args.input:
        raise CLIError("--input is required")
    est, bmap = _load_analysis_dir(Path(args.input))
    try:
        report = detect_peaks(bmap, est, args.threshold)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    out = _out_dir(args)
    (out / "peaks.csv").write_text("\n".join(_peak_rows(report)) + "\n", encoding="utf-8")
    _echo_config(args, out)
    return out


def cmd_surrogate(args) -> Path:
    values, info = load_segments(args)
    bins, est, bmap, report = _run_analysis(args, values)
    target = args.target
    if target is None:
        if not report.peaks:
            raise CLIError("no peak above threshold to test; pass --target KA,KB")
        target = (report.peaks[0].ka, report.peaks[0].kb)
    ka, kb = target
    if not in_domain(est.n, ka, kb) or not bmap.valid[ka, kb]:
        raise CLIError(f"target ({ka}, {kb}) is not a valid principal-domain cell")
    res = surrogate_test(values, target, args.surrogates, args.seed, args.length_policy)
    s = res.surrogate_b2
    out = _out_dir(args)
    lines = ["# bispectral surrogate test",
             f"input={info['input']}", f"target={ka},{kb}", f"seed={args.seed}",
             f"n_surrogates={res.n_surrogates}", f"observed_b2={res.observed_b2!r}",
             f"surrogate_mean={float(np.mean(s))!r}",
             f"surrogate_median={float(np.median(s))!r}",
             f"surrogate_p95={float(np.quantile(s, 0.95))!r}",
             f"surrogate_max={float(np.max(s))!r}",
             f"count_ge_observed={int(np.sum(s >= res.observed_b2))}",
             f"p_value={res.p_value!r}"]
    (out / "surrogate.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _echo_config(args, out)
    return out


def cmd_report(args) -> Path:
    values, info = load_segments(args)
    bins, est, bmap, report = _run_analysis(args, values)
    pvalues = [surrogate_test(values, (pk.ka, pk.kb), args.surrogates, args.seed,
                              args.length_policy).p_value for pk in report.peaks]
    report = type(report)(tuple(
        type(pk)(pk.ka, pk.kb, pk.magnitude, pk.b2, pk.biphase, p)
        for pk, p in zip(report.peaks, pvalues)), report.threshold_b2, args.surrogates)
    out = _out_dir(args)
    _write_analysis(args, out, bins, est, bmap, report, info, pvalues)
    (out / "peaks.csv").write_text("\n".join(_peak_rows(report, pvalues)) + "\n",
                                   encoding="utf-8")
    _echo_config(args, out)
    return out


COMMANDS = {"synth": cmd_synth, "analyze": cmd_analyze, "peaks": cmd_peaks,
            "surrogate": cmd_surrogate, "report": cmd_report}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except CLIError as exc:
        print(f"bispectral: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"bispectral: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
