"""SNR margin required when part of the symbol rate is spent on probing.

Giving up a slice of bandwidth while holding capacity constant forces the
remaining band to run at a higher SNR; the mapping follows from equating the
Shannon capacities of the full and reduced bands.
"""

import csv
import math
from dataclasses import dataclass
from typing import Sequence

DEFAULT_PROBE_BANDWIDTHS_HZ = (0.5e9, 1e9, 2e9, 4e9, 5.68e9)


@dataclass
class MarginQuery:
    snr_linear: float
    baud_rate: float
    probe_bandwidth: float

    def __post_init__(self):
        if self.snr_linear < 0:
            raise ValueError("snr_linear must be >= 0")
        if not 0 <= self.probe_bandwidth < self.baud_rate:
            raise ValueError("probe bandwidth must satisfy 0 <= bwd < baud rate")


def perturbed_snr(query: MarginQuery) -> float:
    """Linear SNR that keeps capacity unchanged on the reduced band:
    (1 + SNR)^(B / (B - bwd)) - 1."""
    exponent = query.baud_rate / (query.baud_rate - query.probe_bandwidth)
    return (1.0 + query.snr_linear) ** exponent - 1.0


def margin_curve(baud_rate: float,
                 probe_bandwidths: Sequence[float] = DEFAULT_PROBE_BANDWIDTHS_HZ,
                 snr_db_grid: Sequence[float] = tuple(range(0, 31))) -> list:
    """Penalty table (snr_db, bwd_pert_hz, penalty_db) for plotting.

    penalty_db is the dB difference between the capacity-equivalent SNR on
    the reduced band and the unperturbed SNR.
    """
    rows = []
    for bwd in probe_bandwidths:
        for snr_db in snr_db_grid:
            snr = 10.0 ** (snr_db / 10.0)
            snr_prime = perturbed_snr(MarginQuery(snr, baud_rate, bwd))
            if snr > 0:
                penalty = 10.0 * math.log10(snr_prime) - 10.0 * math.log10(snr)
            else:
                penalty = 0.0
            rows.append((float(snr_db), float(bwd), penalty))
    return rows


def save_margin_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr_db", "bwd_pert_hz", "penalty_db"])
        for snr_db, bwd, penalty in rows:
            writer.writerow([repr(snr_db), repr(bwd), repr(penalty)])
