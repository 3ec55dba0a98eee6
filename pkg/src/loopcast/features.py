"""Weekday selection and construction of the per-interval feature dataset.

The feature table has one row per aggregated window: raw month integer,
time-of-day mapped linearly onto [-1, 1), the window's occupancy sum, and
the volume sum as the prediction target. Weekend windows (Sunday/Saturday,
indices 1 and 7) are excluded before the table is built.
"""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import numpy as np

from .core import AggregatedRecord, FeatureDataset
from .timeutil import SECONDS_PER_DAY

WEEKDAY_RANGE = (2, 3, 4, 5, 6)  # Monday..Friday under the 1=Sunday indexing


class FeatureError(ValueError):
    pass


def weekday_index(d: dt.date) -> int:
    """Day-of-week as 1 (Sunday) through 7 (Saturday)."""
    return d.isoweekday() % 7 + 1


def filter_weekdays(records) -> list[AggregatedRecord]:
    """Keep records whose label date falls on Monday..Friday, order preserved."""
    cache: dict[dt.date, bool] = {}
    out = []
    for r in records:
        keep = cache.get(r.label_date)
        if keep is None:
            keep = weekday_index(r.label_date) in WEEKDAY_RANGE
            cache[r.label_date] = keep
        if keep:
            out.append(r)
    return out


def normalize_time(sec: float) -> float:
    """Map a second-of-day in [0, 86400) linearly onto [-1.0, 1.0)."""
    return 2.0 * (sec / SECONDS_PER_DAY) - 1.0


def build_cfd(records, interval_min: float, detector_id: int = 191) -> FeatureDataset:
    """Assemble the feature dataset from weekday-filtered aggregated records.

    Records must all belong to ``detector_id`` and be chronological; both
    are verified. Window provenance (label date/second) is carried into the
    dataset for leakage audits.
    """
    records = list(records)
    n = len(records)
    month = np.empty(n, dtype=np.int64)
    time_norm = np.empty(n, dtype=np.float64)
    occ = np.empty(n, dtype=np.float64)
    vol = np.empty(n, dtype=np.float64)
    dates = np.empty(n, dtype=np.int64)
    secs = np.empty(n, dtype=np.int64)
    prev_key = None
    for i, r in enumerate(records):
        if r.detector_id != detector_id:
            raise FeatureError(
                f"record {i} is from detector {r.detector_id}, expected {detector_id}"
            )
        key = (r.label_date.toordinal(), r.label_sec)
        if prev_key is not None and key <= prev_key:
            raise FeatureError(f"records not chronological at index {i}")
        prev_key = key
        month[i] = r.month
        time_norm[i] = normalize_time(r.label_sec)
        occ[i] = r.occupancy_sum
        vol[i] = r.volume_sum
        dates[i], secs[i] = key
    return FeatureDataset(
        interval_min=float(interval_min),
        detector_id=detector_id,
        month=month, time_norm=time_norm, occ=occ, vol=vol,
        label_dates=dates, label_secs=secs,
    )


def write_cfd(ds: FeatureDataset, dest) -> Path:
    """Write the dataset as ``month,time_norm,occ,vol`` plus a JSON sidecar.

    The sidecar (``<dest stem>.meta.json``) records the interval, row count,
    detector, and date range.
    """
    dest = Path(dest)
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write("month,time_norm,occ,vol\n")
        for i in range(len(ds)):
            fh.write(f"{int(ds.month[i])},{ds.time_norm[i]!r},{ds.occ[i]!r},{ds.vol[i]!r}\n")
    meta = {
        "interval_min": ds.interval_min,
        "rows": len(ds),
        "detector_id": ds.detector_id,
    }
    if len(ds) and ds.label_dates is not None:
        meta["start_date"] = dt.date.fromordinal(int(ds.label_dates[0])).isoformat()
        meta["end_date"] = dt.date.fromordinal(int(ds.label_dates[-1])).isoformat()
    sidecar = dest.with_suffix(".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return sidecar


def read_cfd(source, interval_min: float | None = None,
             detector_id: int | None = None) -> FeatureDataset:
    """Load a CFD CSV written by :func:`write_cfd`.

    Interval and detector come from the sidecar when present; explicit
    arguments override. Provenance columns are not recoverable from the CSV.
    """
    src = Path(source)
    sidecar = src.with_suffix(".meta.json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        if interval_min is None:
            interval_min = meta.get("interval_min")
        if detector_id is None:
            detector_id = meta.get("detector_id")
    if interval_min is None:
        raise FeatureError(f"interval unknown: no sidecar next to {src} and none given")
    rows = np.loadtxt(src, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2)
    if rows.size == 0:
        rows = rows.reshape(0, 4)
    if rows.shape[1] != 4:
        raise FeatureError(f"{src}: expected 4 columns month,time_norm,occ,vol")
    return FeatureDataset(
        interval_min=float(interval_min),
        detector_id=int(detector_id) if detector_id is not None else 191,
        month=rows[:, 0].astype(np.int64),
        time_norm=rows[:, 1], occ=rows[:, 2], vol=rows[:, 3],
    )
