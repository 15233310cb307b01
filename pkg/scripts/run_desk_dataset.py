#!/usr/bin/env python3
"""Generate the desk-scale dataset and report the held-out OSNR fit quality.

Resumable: rerunning skips every (power, NF) unit already present in the
output CSV, so an interrupted run just picks up where it stopped.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from osnrprobe import estimator
from osnrprobe.experiment import PRESETS, ExperimentConfig, run_dataset


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="desk", choices=sorted(PRESETS))
    parser.add_argument("--config", help="JSON config overriding the preset")
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                             / "data" / "desk_dataset.csv"))
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--fft-workers", type=int, default=2)
    parser.add_argument("--seed", type=int, help="override the config seed")
    args = parser.parse_args(argv)

    cfg = (ExperimentConfig.from_json(args.config) if args.config
           else PRESETS[args.preset]())
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.tx.seed = args.seed

    rows = run_dataset(cfg, args.out, workers=args.workers,
                       fft_workers=args.fft_workers)

    dataset = estimator.Dataset(rows, cfg.osnr_cap_db)
    report, _ = estimator.cross_validate(dataset)
    print(f"cross-validated RMSE: {report.rmse_db:.3f} dB over {report.n_rows} rows "
          f"(bias {report.bias_db:+.3f} dB, max |err| {report.max_abs_error_db:.3f} dB)")
    for power, rmse in report.per_power_rmse_db.items():
        print(f"  launch {power:+g} dBm: RMSE {rmse:.3f} dB")


if __name__ == "__main__":
    main()
