"""Check the phase law recorded in a synth run's phases.csv.

Prints the mean resultant length of th_g - th_a - th_b: 1.0 for a coupled
ensemble, about 1/sqrt(m) for an uncoupled one. Exits 1 when the recorded
phases contradict the mode given with --expect.

    python scripts/check_phases.py out/phases.csv --expect uncoupled
"""

import argparse
import sys

import numpy as np

from bispectral.formats import read_phases_csv


def resultant_length(phases):
    residual = phases[:, 2] - phases[:, 0] - phases[:, 1]
    return float(abs(np.mean(np.exp(1j * residual))))


def main(argv=None):
    ap = argparse.ArgumentParser(description="phase-law check for phases.csv")
    ap.add_argument("path")
    ap.add_argument("--expect", choices=["coupled", "uncoupled"], default=None)
    args = ap.parse_args(argv)
    phases = read_phases_csv(args.path)
    r = resultant_length(phases)
    # 3/sqrt(m) is a loose bound on the null resultant length
    bound = 3 / np.sqrt(len(phases))
    verdict = "coupled" if r > 1 - 1e-9 else ("uncoupled" if r < bound else "ambiguous")
    print(f"m={len(phases)} resultant_length={r:.6f} null_bound={bound:.4f} verdict={verdict}")
    if args.expect and verdict != args.expect:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
