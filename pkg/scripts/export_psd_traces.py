#!/usr/bin/env python3
"""Export received-spectrum CSVs for the probe set after a long noiseless link.

Produces one trace per boost value (default: 30 spans at 2 dBm, no ASE), the
raw material for received-spectra evolution plots.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from osnrprobe.experiment import PRESETS, ExperimentConfig
from osnrprobe.fiberlink import LinkConfig, simulate_link
from osnrprobe.spectrum import estimate_psd
from osnrprobe.waveform import (add_tx_noise_floor, apply_perturbation,
                                build_profile, generate_reference)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="desk", choices=sorted(PRESETS))
    parser.add_argument("--config", help="JSON config overriding the preset")
    parser.add_argument("--power-dbm", type=float, default=2.0)
    parser.add_argument("--spans", type=int, default=30)
    parser.add_argument("--nf-db", type=float, default=None,
                        help="amplifier noise figure; omit for noise-free")
    parser.add_argument("--deltas-db", type=float, nargs="+",
                        default=[-10.0, -5.0, 0.0, 5.0, 10.0])
    parser.add_argument("--out-dir", default="data/psd_traces")
    args = parser.parse_args(argv)

    cfg = (ExperimentConfig.from_json(args.config) if args.config
           else PRESETS[args.preset]())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    regions = cfg.region_set()
    ref = generate_reference(cfg.tx)
    for delta_db in args.deltas_db:
        tx = add_tx_noise_floor(
            apply_perturbation(ref, build_profile(ref, regions, delta_db)),
            cfg.tx, np.random.SeedSequence((cfg.seed, 0x0F1, 0, 0, int(delta_db))))
        link = LinkConfig(cfg.fiber, args.spans, args.power_dbm, args.nf_db,
                          ase_seed=cfg.seed)
        rx = simulate_link(tx, link, dtype=cfg.dtype)
        path = out_dir / f"rx_{args.spans}spans_{args.power_dbm:+g}dBm_delta{delta_db:+g}dB.csv"
        estimate_psd(rx).save_csv(path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
