"""Experiment configuration, presets, and the scenario-grid dataset runner.

A dataset run sweeps the (launch power, span count, noise figure) grid; for
every scenario the five probe spectra are synthesized, propagated, and
measured, producing one feature row. Scenarios sharing launch power, NF, and
probe differ only in span count, so each (power, NF, probe) triple is
simulated as a single chain up to the largest span count with measurements
harvested at every requested intermediate count; per-span ASE seeding makes
this bit-identical to simulating each span count separately.
"""

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from . import estimator
from .estimator import DELTA_GRID_DB, build_feature_row
from .field import SampledField
from .fiberlink import (FiberParams, LinkConfig, _amplify_inplace,
                        _span_inplace, analytic_osnr, span_seed)
from .spectrum import measure
from .waveform import (InfeasiblePerturbationError, RegionSet, TxConfig,
                       add_tx_noise_floor, apply_perturbation, build_profile,
                       default_regions, generate_reference)

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    """Everything a dataset run needs, JSON round-trippable."""

    tx: TxConfig = field(default_factory=TxConfig)
    fiber: FiberParams = field(default_factory=FiberParams)
    powers_dbm: tuple = (-2.0, 0.0, 2.0, 4.0, 6.0)
    spans: tuple = tuple(range(1, 31))
    nf_dbs: tuple = (4.5, 5.5, 6.5, 7.5)
    delta_a_grid_db: tuple = DELTA_GRID_DB
    regions: Optional[RegionSet] = None   # default probe geometry when None
    seed: int = 1234
    precision: str = "double"             # propagation dtype: "single" | "double"
    osnr_cap_db: float = 30.0

    def __post_init__(self):
        self.powers_dbm = tuple(float(p) for p in self.powers_dbm)
        self.spans = tuple(int(s) for s in self.spans)
        self.nf_dbs = tuple(float(v) for v in self.nf_dbs)
        self.delta_a_grid_db = tuple(float(d) for d in self.delta_a_grid_db)
        if not (self.powers_dbm and self.spans and self.nf_dbs and self.delta_a_grid_db):
            raise ValueError("all scenario grids must be non-empty")
        if min(self.spans) < 1:
            raise ValueError("span counts must be >= 1")
        if self.precision not in ("single", "double"):
            raise ValueError("precision must be 'single' or 'double'")

    @property
    def dtype(self):
        return np.complex64 if self.precision == "single" else np.complex128

    def region_set(self) -> RegionSet:
        return self.regions if self.regions is not None else default_regions(self.tx)

    def to_json(self, path=None) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tx": asdict(self.tx),
            "fiber": asdict(self.fiber),
            "powers_dbm": list(self.powers_dbm),
            "spans": list(self.spans),
            "nf_dbs": list(self.nf_dbs),
            "delta_a_grid_db": list(self.delta_a_grid_db),
            "regions": asdict(self.regions) if self.regions is not None else None,
            "seed": self.seed,
            "precision": self.precision,
            "osnr_cap_db": self.osnr_cap_db,
        }
        text = json.dumps(doc, indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "ExperimentConfig":
        text = Path(source).read_text() if os.path.exists(str(source)) else str(source)
        doc = json.loads(text)
        version = doc.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema_version {version!r}")
        doc["tx"] = TxConfig(**doc["tx"])
        doc["fiber"] = FiberParams(**doc["fiber"])
        if doc.get("regions") is not None:
            doc["regions"] = RegionSet(**doc["regions"])
        return cls(**doc)


def desk_preset() -> ExperimentConfig:
    """Reduced grid that a workstation can turn around: 2^14 symbols, 0.05 km
    steps, seven span counts, single-precision propagation."""
    return ExperimentConfig(
        tx=TxConfig(n_symbols=2**14, seed=1234),
        fiber=FiberParams(step_km=0.05),
        spans=(1, 5, 10, 15, 20, 25, 30),
        precision="single",
    )


def paper_preset() -> ExperimentConfig:
    """Full-scale grid: 2^17 symbols, 0.01 km steps, spans 1..30."""
    return ExperimentConfig(
        tx=TxConfig(n_symbols=2**17, seed=1234),
        fiber=FiberParams(step_km=0.01),
        spans=tuple(range(1, 31)),
        precision="double",
    )


PRESETS = {"desk": desk_preset, "paper": paper_preset}


def _nfl_seed(cfg: ExperimentConfig, ip: int, inf_: int, idelta: int):
    return np.random.SeedSequence((cfg.seed, 0x0F1, ip, inf_, idelta))


def _chain_ase_seed(cfg: ExperimentConfig, ip: int, inf_: int, idelta: int) -> int:
    return int(np.random.SeedSequence((cfg.seed, 0xACE, ip, inf_, idelta)).generate_state(1)[0])


def _scenario_key(power: float, nf: float, spans: int):
    return (repr(float(power)), repr(float(nf)), int(spans))


def _run_unit(cfg: ExperimentConfig, ip: int, inf_: int, fft_workers: int) -> list:
    """Simulate all probe chains for one (power, NF) pair; return rows."""
    power = cfg.powers_dbm[ip]
    nf = cfg.nf_dbs[inf_]
    regions = cfg.region_set()
    ref = generate_reference(cfg.tx)
    max_spans = max(cfg.spans)
    wanted = set(cfg.spans)
    reports = {spans: [] for spans in cfg.spans}
    for idelta, delta_db in enumerate(cfg.delta_a_grid_db):
        try:
            profile = build_profile(ref, regions, delta_db)
        except InfeasiblePerturbationError as exc:
            raise InfeasiblePerturbationError(
                f"scenario power={power:+g} dBm nf={nf:g} dB "
                f"delta_A={delta_db:+g} dB: {exc}") from exc
        tx = add_tx_noise_floor(apply_perturbation(ref, profile), cfg.tx,
                                _nfl_seed(cfg, ip, inf_, idelta))
        link = LinkConfig(cfg.fiber, max_spans, power, nf,
                          ase_seed=_chain_ase_seed(cfg, ip, inf_, idelta))
        mat = tx.as_matrix().astype(cfg.dtype)
        mat *= mat.real.dtype.type(math.sqrt(link.launch_power_w / tx.total_power()))
        amp = link.amp
        for k in range(max_spans):
            _span_inplace(mat, tx.sample_rate, link.center_freq, cfg.fiber, fft_workers)
            _amplify_inplace(mat, tx.sample_rate, amp,
                             np.random.default_rng(span_seed(link, k)))
            if (k + 1) in wanted:
                fld = SampledField(mat[0].astype(complex), mat[1].astype(complex),
                                   tx.sample_rate, link.center_freq)
                reports[k + 1].append(measure(
                    fld, regions, delta_db,
                    scenario=f"p{power:+g}dBm_nf{nf:g}dB_{k + 1}spans"))
    rows = []
    for spans in cfg.spans:
        truth = analytic_osnr(LinkConfig(cfg.fiber, spans, power, nf))
        rows.append(build_feature_row(reports[spans], truth, (power, spans, nf)))
    return rows


def run_dataset(cfg: ExperimentConfig, out_path, workers: int = 1,
                fft_workers: int = 2, log=print) -> list:
    """Run the scenario grid and persist feature rows as CSV.

    Resumable: rows already present in out_path are kept and their (power,
    NF) work units skipped, so interrupting and rerunning converges to the
    identical file an uninterrupted run would have produced.
    """
    out_path = Path(out_path)
    grid_keys = {_scenario_key(p, nf, s) for p in cfg.powers_dbm
                 for nf in cfg.nf_dbs for s in cfg.spans}
    rows_by_key = {}
    dropped = 0
    if out_path.exists():
        for row in estimator.load_rows(out_path):
            key = _scenario_key(row.launch_power_dbm, row.nf_db, row.n_spans)
            if key in grid_keys:
                rows_by_key[key] = row
            else:
                dropped += 1
        if rows_by_key:
            log(f"resuming: {len(rows_by_key)} rows already in {out_path}")
        if dropped:
            log(f"dropping {dropped} rows outside the configured grid")

    units = []
    for ip, power in enumerate(cfg.powers_dbm):
        for inf_, nf in enumerate(cfg.nf_dbs):
            have_all = all(_scenario_key(power, nf, s) in rows_by_key for s in cfg.spans)
            if not have_all:
                units.append((ip, inf_))

    def store(unit_rows=()):
        for row in unit_rows:
            rows_by_key[_scenario_key(row.launch_power_dbm, row.nf_db, row.n_spans)] = row
        out_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = out_path.with_suffix(out_path.suffix + ".tmp")
        estimator.save_rows(list(rows_by_key.values()), tmp)
        os.replace(tmp, out_path)

    if not units:
        if dropped:
            store()
        log("dataset already complete; no simulations to run")
        return list(rows_by_key.values())

    started = time.monotonic()
    if workers <= 1:
        for n, (ip, inf_) in enumerate(units, 1):
            t0 = time.monotonic()
            store(_run_unit(cfg, ip, inf_, fft_workers))
            log(f"[{n}/{len(units)}] power={cfg.powers_dbm[ip]:+g} dBm "
                f"nf={cfg.nf_dbs[inf_]:g} dB done in {time.monotonic() - t0:.1f}s")
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_unit, cfg, ip, inf_, fft_workers): (ip, inf_)
                       for ip, inf_ in units}
            for n, fut in enumerate(as_completed(futures), 1):
                ip, inf_ = futures[fut]
                store(fut.result())
                log(f"[{n}/{len(units)}] power={cfg.powers_dbm[ip]:+g} dBm "
                    f"nf={cfg.nf_dbs[inf_]:g} dB collected")
    log(f"dataset complete: {len(rows_by_key)} rows in {time.monotonic() - started:.0f}s")
    return list(rows_by_key.values())
