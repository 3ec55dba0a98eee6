"""Domain types shared by every pipeline stage.

Everything here is an immutable value: dataclasses are frozen and numpy
arrays are flagged read-only on construction, so instances are safe to
share between threads.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .timeutil import (
    SLOT_SECONDS,
    SLOTS_PER_DAY,
    SECONDS_PER_DAY,
    slot_date,
    slot_start_sec,
)

# The 30 Hz sensor yields at most 900 samples per 30 s window.
MAX_OCCUPANCY = 900


@dataclass(frozen=True, slots=True)
class RawSample:
    """One 30-second detector record.

    ``time_end`` is the end of the measurement window in seconds since
    midnight: a multiple of 30 in ``{30, ..., 86400}``. Per-lane volume and
    occupancy counts are kept in lane order. ``off_count``/``psg_count``
    are carried through from the source file but never used as features.
    ``source_line`` is parse provenance and does not affect equality.
    """

    date: dt.date
    time_end: int
    detector_id: int
    lane_volumes: tuple[int, ...]
    lane_occupancies: tuple[int, ...]
    off_count: int | None = None
    psg_count: int | None = None
    source_line: int | None = field(default=None, compare=False)


def validate_sample(s: RawSample) -> list[str]:
    """Return every violated :class:`RawSample` invariant (empty list = valid).

    Violations are data, not failures: the input is never mutated and no
    exception is raised.
    """
    violations: list[str] = []
    nv, no = len(s.lane_volumes), len(s.lane_occupancies)
    if nv != no:
        violations.append(f"lane list length mismatch: {nv} volumes vs {no} occupancies")
    if nv == 0 or no == 0:
        violations.append("at least one lane required")
    for i, v in enumerate(s.lane_volumes):
        if not isinstance(v, int) or v < 0:
            violations.append(f"lane {i + 1} volume {v!r} is not a non-negative integer")
    for i, o in enumerate(s.lane_occupancies):
        if not isinstance(o, int) or o < 0:
            violations.append(f"lane {i + 1} occupancy {o!r} is not a non-negative integer")
        elif o > MAX_OCCUPANCY:
            violations.append(f"lane {i + 1} occupancy exceeds 900 (got {o})")
    if s.time_end % SLOT_SECONDS != 0 or not (SLOT_SECONDS <= s.time_end <= SECONDS_PER_DAY):
        violations.append(
            f"time_end {s.time_end} not a multiple of 30 in [30, 86400]"
        )
    for name, c in (("off_count", s.off_count), ("psg_count", s.psg_count)):
        if c is not None and (not isinstance(c, int) or c < 0):
            violations.append(f"{name} {c!r} is not a non-negative integer")
    return violations


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DetectorSeries:
    """Lane-aggregated 30 s series for a single detector.

    ``slots`` hold global slot indices (see :mod:`loopcast.timeutil`),
    strictly increasing. Before gap repair the slots may be sparse; after
    :func:`loopcast.ingest.interpolate_linear` they are contiguous over the
    full-day domain and ``gaps_filled`` records how many entries were
    interpolated (``boundary_filled`` of which by nearest-value extension).
    """

    detector_id: int
    slots: np.ndarray
    volume: np.ndarray
    occupancy: np.ndarray
    gaps_filled: int = 0
    boundary_filled: int = 0

    def __post_init__(self) -> None:
        slots = _freeze(np.asarray(self.slots, dtype=np.int64))
        volume = _freeze(np.asarray(self.volume, dtype=np.float64))
        occupancy = _freeze(np.asarray(self.occupancy, dtype=np.float64))
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "volume", volume)
        object.__setattr__(self, "occupancy", occupancy)
        if not (len(slots) == len(volume) == len(occupancy)):
            raise ValueError("slots, volume, occupancy must have equal length")
        if len(slots) > 1 and not np.all(np.diff(slots) > 0):
            raise ValueError("slot indices must be strictly increasing")
        if np.any(volume < 0) or np.any(occupancy < 0):
            raise ValueError("volume and occupancy totals must be non-negative")

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def is_contiguous(self) -> bool:
        """True when the series has constant 30 s cadence (no holes)."""
        return len(self.slots) == 0 or bool(np.all(np.diff(self.slots) == 1))

    @property
    def first_date(self) -> dt.date:
        return slot_date(int(self.slots[0]))

    @property
    def last_date(self) -> dt.date:
        return slot_date(int(self.slots[-1]))

    def domain(self) -> tuple[int, int]:
        """Full-day slot range ``[start, end)`` spanned by the series.

        The domain always covers whole calendar days (midnight to midnight),
        which is what gap accounting and midnight-anchored resampling assume.
        """
        if len(self.slots) == 0:
            raise ValueError("empty series has no domain")
        start = self.first_date.toordinal() * SLOTS_PER_DAY
        end = (self.last_date.toordinal() + 1) * SLOTS_PER_DAY
        return start, end

    def samples(self):
        """Yield ``(date, start_sec, volume, occupancy)`` per present slot."""
        for slot, v, o in zip(self.slots, self.volume, self.occupancy):
            s = int(slot)
            yield slot_date(s), slot_start_sec(s), float(v), float(o)


@dataclass(frozen=True, slots=True)
class AggregatedRecord:
    """One window of the re-aggregated series at interval ``interval_min``.

    ``label_date``/``label_sec`` come from the window's first constituent
    30 s slot (``label_sec`` is the slot's start second-of-day), and
    ``month`` is the month of ``label_date``. Sums are over all slots in
    the window.
    """

    interval_min: float
    detector_id: int
    label_date: dt.date
    label_sec: int
    month: int
    volume_sum: float
    occupancy_sum: float


@dataclass(frozen=True, slots=True)
class FeatureRow:
    """One modeling row: (month, normalized time, occupancy) -> volume."""

    month: int
    time_norm: float
    occ: float
    vol: float


@dataclass(frozen=True)
class FeatureDataset:
    """Column-oriented feature table for one collection interval.

    Rows are chronological. ``label_dates`` (proleptic ordinals) and
    ``label_secs`` carry window provenance so order-based splits can be
    audited for temporal leakage; they are ``None`` for datasets loaded
    from a bare CSV.
    """

    interval_min: float
    detector_id: int
    month: np.ndarray
    time_norm: np.ndarray
    occ: np.ndarray
    vol: np.ndarray
    label_dates: np.ndarray | None = None
    label_secs: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "month", _freeze(np.asarray(self.month, dtype=np.int64)))
        for name in ("time_norm", "occ", "vol"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=np.float64)))
        for name in ("label_dates", "label_secs"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _freeze(np.asarray(val, dtype=np.int64)))
        n = len(self.month)
        cols = [self.time_norm, self.occ, self.vol]
        cols += [c for c in (self.label_dates, self.label_secs) if c is not None]
        if any(len(c) != n for c in cols):
            raise ValueError("feature columns must have equal length")

    def __len__(self) -> int:
        return len(self.month)

    def row(self, i: int) -> FeatureRow:
        return FeatureRow(
            month=int(self.month[i]),
            time_norm=float(self.time_norm[i]),
            occ=float(self.occ[i]),
            vol=float(self.vol[i]),
        )

    def rows(self):
        for i in range(len(self)):
            yield self.row(i)

    def features(self) -> np.ndarray:
        """Design matrix with columns (month, time_norm, occ)."""
        return np.column_stack([
            self.month.astype(np.float64),
            self.time_norm,
            self.occ,
        ])

    def target(self) -> np.ndarray:
        return self.vol

    def slice(self, start: int, stop: int) -> "FeatureDataset":
        """Contiguous row slice as a new dataset (order preserved)."""
        return FeatureDataset(
            interval_min=self.interval_min,
            detector_id=self.detector_id,
            month=self.month[start:stop],
            time_norm=self.time_norm[start:stop],
            occ=self.occ[start:stop],
            vol=self.vol[start:stop],
            label_dates=None if self.label_dates is None else self.label_dates[start:stop],
            label_secs=None if self.label_secs is None else self.label_secs[start:stop],
        )


FEATURE_NAMES = ("month", "time_norm", "occ")
TARGET_NAME = "vol"
