"""Time-unit adjustment: re-aggregate the 30 s series to coarser intervals.

Windows are consecutive, non-overlapping runs of ``T / 0.5 min`` slots
anchored at midnight of each date (every supported window size divides the
2,880 slots of a day, so windows never span midnight). Volume and
occupancy are summed over the window; the date/time label and month come
from the window's first slot. A trailing partial window is dropped, never
emitted short.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import AggregatedRecord, DetectorSeries
from .timeutil import SLOT_SECONDS, format_hms, slot_date, slot_start_sec

SUPPORTED_INTERVALS_MIN = (0.5, 1.0, 2.0, 5.0, 10.0, 15.0)


class ResampleError(ValueError):
    pass


@dataclass(frozen=True)
class ResampleResult:
    """Aggregated records plus the size of the dropped partial tail."""

    interval_min: float
    records: list[AggregatedRecord]
    dropped_slots: int

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def window_slots(interval_min: float) -> int:
    """Number of 30 s slots per window at the given interval."""
    if not any(interval_min == t for t in SUPPORTED_INTERVALS_MIN):
        raise ResampleError(
            f"unsupported interval {interval_min} min; "
            f"supported: {', '.join(str(t) for t in SUPPORTED_INTERVALS_MIN)}"
        )
    return round(interval_min * 60 / SLOT_SECONDS)


def resample(series: DetectorSeries, interval_min: float) -> ResampleResult:
    """Aggregate a complete 30 s series into interval windows.

    The series must be hole-free (run :func:`loopcast.ingest.interpolate_linear`
    first) and must start on an interval boundary; midnight-aligned series
    satisfy every supported interval.
    """
    win = window_slots(float(interval_min))
    if len(series) == 0:
        return ResampleResult(float(interval_min), [], 0)
    if not series.is_contiguous:
        raise ResampleError(
            f"detector {series.detector_id}: series has holes; interpolate before resampling"
        )
    first = int(series.slots[0])
    if first % win != 0:
        need = format_hms(_aligned_sec(first, win))
        raise ResampleError(
            f"series starts at {format_hms(slot_start_sec(first))} which is not aligned "
            f"to the {interval_min} min grid; required alignment: {need}"
        )
    n = len(series)
    n_windows, dropped = divmod(n, win)
    vol = series.volume[: n_windows * win].reshape(n_windows, win).sum(axis=1)
    occ = series.occupancy[: n_windows * win].reshape(n_windows, win).sum(axis=1)
    label_slots = series.slots[: n_windows * win : win]

    date_cache: dict[int, object] = {}
    records: list[AggregatedRecord] = []
    for i in range(n_windows):
        slot = int(label_slots[i])
        ordinal = slot // (86400 // SLOT_SECONDS)
        date = date_cache.get(ordinal)
        if date is None:
            date = slot_date(slot)
            date_cache[ordinal] = date
        records.append(AggregatedRecord(
            interval_min=float(interval_min),
            detector_id=series.detector_id,
            label_date=date,
            label_sec=slot_start_sec(slot),
            month=date.month,
            volume_sum=float(vol[i]),
            occupancy_sum=float(occ[i]),
        ))
    return ResampleResult(float(interval_min), records, dropped)


def _aligned_sec(slot: int, win: int) -> int:
    # next window boundary at or before the slot, as a second-of-day
    return slot_start_sec(slot - slot % win)


def write_aggregated_csv(result, dest) -> None:
    """Dump records as ``date,time,month,volume_sum,occupancy_sum``."""
    records = result.records if isinstance(result, ResampleResult) else list(result)
    fh, own = (open(dest, "w", encoding="utf-8", newline=""), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    try:
        w = csv.writer(fh)
        w.writerow(["date", "time", "month", "volume_sum", "occupancy_sum"])
        for r in records:
            w.writerow([r.label_date.isoformat(), format_hms(r.label_sec),
                        r.month, repr(r.volume_sum), repr(r.occupancy_sum)])
    finally:
        if own:
            fh.close()
