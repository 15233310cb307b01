"""Least-squares OSNR regression over APSD features.

Each scenario contributes one feature row: the reference-region APSD of the
strongest attenuation probe plus the notch APSDs of all five probes. OSNR in
dB is modeled as an affine function of those six numbers; coefficients come
from a least-squares fit against the analytic ground truth, restricted to
scenarios at or below the 30 dB cap where the notch still carries signal.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .spectrum import ApsdReport

DELTA_GRID_DB = (-10.0, -5.0, 0.0, 5.0, 10.0)
DEFAULT_OSNR_CAP_DB = 30.0

FEATURE_NAMES = (
    "intercept",
    "p_ref",
    "p_n[-10dB]",
    "p_n[-5dB]",
    "p_n[0dB]",
    "p_n[+5dB]",
    "p_n[+10dB]",
)

CSV_COLUMNS = (
    "power_dbm", "n_spans", "nf_db", "truth_osnr_db", "p_ref_db",
    "p_n_m10_db", "p_n_m5_db", "p_n_0_db", "p_n_p5_db", "p_n_p10_db",
)


class RankDeficientError(ValueError):
    """Design matrix lost a direction; carries the collinear feature names."""

    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(
            "design matrix is rank deficient; collinear columns: "
            + ", ".join(self.columns)
        )


@dataclass
class FeatureRow:
    """Regression inputs for one (launch power, span count, NF) scenario."""

    p_ref_db: float
    p_n_db: tuple          # five notch APSDs ordered by ascending boost
    truth_osnr_db: float
    launch_power_dbm: float
    n_spans: int
    nf_db: float

    def __post_init__(self):
        self.p_ref_db = float(self.p_ref_db)
        self.p_n_db = tuple(float(v) for v in self.p_n_db)
        self.truth_osnr_db = float(self.truth_osnr_db)
        self.launch_power_dbm = float(self.launch_power_dbm)
        self.n_spans = int(self.n_spans)
        self.nf_db = float(self.nf_db)
        if len(self.p_n_db) != len(DELTA_GRID_DB):
            raise ValueError(f"need {len(DELTA_GRID_DB)} notch APSDs, got {len(self.p_n_db)}")
        vals = (self.p_ref_db, *self.p_n_db, self.truth_osnr_db)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("feature row contains non-finite values")

    def features(self) -> np.ndarray:
        """Design-matrix row including the intercept column."""
        return np.array([1.0, self.p_ref_db, *self.p_n_db])


def build_feature_row(reports: Sequence[ApsdReport], truth_osnr_db: float,
                      meta) -> FeatureRow:
    """Assemble a row from the five probe measurements of one scenario.

    meta is (launch_power_dbm, n_spans, nf_db). The reference-region APSD is
    taken from the -10 dB probe alone; it barely varies across probes by
    construction, so one term carries all of its information.
    """
    by_delta = {}
    for rep in reports:
        if rep.delta_a_db in by_delta:
            raise ValueError(f"duplicate probe at boost {rep.delta_a_db:+g} dB")
        by_delta[rep.delta_a_db] = rep
    missing = [d for d in DELTA_GRID_DB if d not in by_delta]
    if missing or len(by_delta) != len(DELTA_GRID_DB):
        raise ValueError(
            f"probe grid incomplete: have {sorted(by_delta)}, need {list(DELTA_GRID_DB)}"
        )
    power, spans, nf = meta
    return FeatureRow(
        p_ref_db=by_delta[DELTA_GRID_DB[0]].p_ref_db,
        p_n_db=tuple(by_delta[d].p_n_db for d in DELTA_GRID_DB),
        truth_osnr_db=truth_osnr_db,
        launch_power_dbm=float(power),
        n_spans=int(spans),
        nf_db=float(nf),
    )


@dataclass
class FitCoefficients:
    """k0..k6 of the affine OSNR model (k0 in dB, the rest per-dB weights)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (7,) or not np.all(np.isfinite(self.values)):
            raise ValueError("need 7 finite coefficients")

    def as_dict(self) -> dict:
        return {f"k{i}": float(v) for i, v in enumerate(self.values)}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "FitCoefficients":
        raw = json.loads(Path(path).read_text())
        return cls(np.array([raw[f"k{i}"] for i in range(7)]))


@dataclass
class Dataset:
    """Feature rows plus an optional train/test split (index arrays into rows).

    Rows whose ground truth exceeds the OSNR cap take no part in fitting or
    scoring; at very high OSNR the notch bottoms out on the transmitter noise
    floor and carries no usable information.
    """

    rows: list
    osnr_cap_db: float = DEFAULT_OSNR_CAP_DB
    train_idx: Optional[np.ndarray] = None
    test_idx: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.train_idx is not None and self.test_idx is not None:
            if set(map(int, self.train_idx)) & set(map(int, self.test_idx)):
                raise ValueError("train and test splits overlap")

    def capped(self, idx=None) -> list:
        pool = self.rows if idx is None else [self.rows[i] for i in idx]
        return [r for r in pool if r.truth_osnr_db <= self.osnr_cap_db]

    def training_rows(self) -> list:
        return self.capped(self.train_idx)

    def test_rows(self) -> list:
        return self.capped(self.test_idx)

    def to_csv(self, path) -> None:
        save_rows(self.rows, path)

    @classmethod
    def from_csv(cls, path, osnr_cap_db: float = DEFAULT_OSNR_CAP_DB) -> "Dataset":
        return cls(load_rows(path), osnr_cap_db)


def save_rows(rows: Sequence[FeatureRow], path) -> None:
    """Write rows sorted by scenario key with full-precision decimals, so a
    rerun with the same config reproduces the file byte for byte."""
    ordered = sorted(rows, key=lambda r: (r.launch_power_dbm, r.nf_db, r.n_spans))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in ordered:
            writer.writerow([
                repr(r.launch_power_dbm), r.n_spans, repr(r.nf_db),
                repr(r.truth_osnr_db), repr(r.p_ref_db),
                *(repr(v) for v in r.p_n_db),
            ])


def load_rows(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"unexpected dataset columns in {path}")
        for rec in reader:
            rows.append(FeatureRow(
                p_ref_db=float(rec["p_ref_db"]),
                p_n_db=tuple(float(rec[c]) for c in CSV_COLUMNS[5:]),
                truth_osnr_db=float(rec["truth_osnr_db"]),
                launch_power_dbm=float(rec["power_dbm"]),
                n_spans=int(rec["n_spans"]),
                nf_db=float(rec["nf_db"]),
            ))
    return rows


def _design(rows: Sequence[FeatureRow]):
    x = np.array([r.features() for r in rows])
    y = np.array([r.truth_osnr_db for r in rows])
    return x, y


def fit_least_squares(data: Dataset) -> FitCoefficients:
    """Fit k0..k6 on the training rows by orthogonal decomposition.

    Rank deficiency (for example a linear-regime dataset where every notch
    APSD sits on the same floor) raises RankDeficientError naming the
    dependent columns instead of silently returning one of many minimizers.
    """
    rows = data.training_rows()
    if len(rows) < 7:
        raise ValueError(f"need >= 7 training rows under the cap, have {len(rows)}")
    x, y = _design(rows)
    # Column-pivoted QR exposes which columns collapsed onto the others.
    _, r, piv = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(x.shape) * np.finfo(float).eps * 1e3
    bad = diag < tol
    if bad.any():
        raise RankDeficientError([FEATURE_NAMES[piv[i]] for i in np.nonzero(bad)[0]])
    coeffs, *_ = np.linalg.lstsq(x, y, rcond=None)
    return FitCoefficients(coeffs)


def predict_osnr(coeffs: FitCoefficients, row: FeatureRow) -> float:
    """Affine model evaluation, dB in -> dB out."""
    return float(coeffs.values @ row.features())


@dataclass
class EvalReport:
    rmse_db: float
    bias_db: float
    max_abs_error_db: float
    n_rows: int
    per_power_rmse_db: dict
    records: list = field(repr=False, default_factory=list)

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["truth_osnr_db", "predicted_osnr_db",
                             "power_dbm", "n_spans", "nf_db"])
            for rec in self.records:
                writer.writerow([repr(rec[0]), repr(rec[1]), repr(rec[2]),
                                 rec[3], repr(rec[4])])

    def as_dict(self) -> dict:
        return {
            "rmse_db": self.rmse_db,
            "bias_db": self.bias_db,
            "max_abs_error_db": self.max_abs_error_db,
            "n_rows": self.n_rows,
            "per_power_rmse_db": self.per_power_rmse_db,
        }


def evaluate(data: Dataset, coeffs: FitCoefficients) -> EvalReport:
    """Score predictions on the test rows (all capped rows if no split)."""
    rows = data.test_rows()
    if not rows:
        raise ValueError("no test rows under the OSNR cap")
    errors = []
    records = []
    by_power = {}
    for r in rows:
        pred = predict_osnr(coeffs, r)
        err = pred - r.truth_osnr_db
        errors.append(err)
        records.append((r.truth_osnr_db, pred, r.launch_power_dbm, r.n_spans, r.nf_db))
        by_power.setdefault(r.launch_power_dbm, []).append(err)
    errors = np.array(errors)
    return EvalReport(
        rmse_db=float(np.sqrt(np.mean(errors**2))),
        bias_db=float(np.mean(errors)),
        max_abs_error_db=float(np.max(np.abs(errors))),
        n_rows=len(rows),
        per_power_rmse_db={p: float(np.sqrt(np.mean(np.array(e) ** 2)))
                           for p, e in sorted(by_power.items())},
        records=records,
    )


def kfold_by_spans(dataset: Dataset, n_folds: int = 5, seed: int = 0):
    """Scenario-level folds stratified by span count.

    Yields (train_idx, test_idx) pairs covering every row exactly once on
    the test side.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF01D)))
    by_spans = {}
    for i, row in enumerate(dataset.rows):
        by_spans.setdefault(row.n_spans, []).append(i)
    folds = [[] for _ in range(n_folds)]
    for spans in sorted(by_spans):
        idx = np.array(by_spans[spans])
        rng.shuffle(idx)
        for j, i in enumerate(idx):
            folds[j % n_folds].append(int(i))
    for k in range(n_folds):
        test = sorted(folds[k])
        train = sorted(i for j, f in enumerate(folds) if j != k for i in f)
        yield np.array(train), np.array(test)


def cross_validate(dataset: Dataset, n_folds: int = 5, seed: int = 0):
    """Held-out evaluation: fit on each fold's complement, score the fold,
    pool residuals. Returns (EvalReport, list of per-fold coefficients)."""
    all_records = []
    all_coeffs = []
    for train, test in kfold_by_spans(dataset, n_folds, seed):
        fold = Dataset(dataset.rows, dataset.osnr_cap_db, train, test)
        coeffs = fit_least_squares(fold)
        all_coeffs.append(coeffs)
        report = evaluate(fold, coeffs)
        all_records.extend(report.records)
    errors = np.array([pred - truth for truth, pred, *_ in all_records])
    by_power = {}
    for truth, pred, power, *_ in all_records:
        by_power.setdefault(power, []).append(pred - truth)
    pooled = EvalReport(
        rmse_db=float(np.sqrt(np.mean(errors**2))),
        bias_db=float(np.mean(errors)),
        max_abs_error_db=float(np.max(np.abs(errors))),
        n_rows=len(all_records),
        per_power_rmse_db={p: float(np.sqrt(np.mean(np.array(e) ** 2)))
                           for p, e in sorted(by_power.items())},
        records=all_records,
    )
    return pooled, all_coeffs
