#!/usr/bin/env python3
"""Export the probe-bandwidth SNR penalty table for plotting."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from osnrprobe.margin import DEFAULT_PROBE_BANDWIDTHS_HZ, margin_curve, save_margin_csv


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--baud-rate", type=float, default=56.8e9)
    parser.add_argument("--bwd-ghz", type=float, nargs="+",
                        default=[b / 1e9 for b in DEFAULT_PROBE_BANDWIDTHS_HZ])
    parser.add_argument("--out", default="data/margin_curves.csv")
    args = parser.parse_args(argv)

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rows = margin_curve(args.baud_rate, [b * 1e9 for b in args.bwd_ghz],
                        list(range(0, 31)))
    save_margin_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
