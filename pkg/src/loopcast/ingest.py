"""Raw detector CSV parsing, pivoting, gap detection, and linear repair.

Input format (UTF-8, comma-separated, header first): ``Date`` (YYYY-MM-DD),
``Time`` (HH:MM:SS), ``ID`` (integer), ``Lane1_Vol..LaneK_Vol``,
``Lane1_Occ..LaneK_Occ``, optional ``OffX_cnt``/``PsgX_cnt``. Unrecognized
extra columns are ignored. An empty volume or occupancy cell marks the
whole slot as missing.

Time labels: the canonical writer emits window START labels
(00:00:00..23:59:30). Files labeled by window END can be parsed with
``time_labeling="end"`` (a 00:00:00 end label is read as midnight-end of
the same date). ``"auto"`` assumes start labels unless a 24:00:00 label
appears; an end-labeled file that wraps midnight to 00:00:00 cannot be
auto-detected and must be declared explicitly.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DetectorSeries, RawSample
from .timeutil import (
    SECONDS_PER_DAY,
    SLOT_SECONDS,
    SLOTS_PER_DAY,
    format_hms,
    parse_date,
    parse_hms,
    slot_date,
    slot_index,
    slot_start_sec,
)

DEFAULT_ERROR_BUDGET = 100

_LANE_VOL = re.compile(r"^Lane(\d+)_Vol$")
_LANE_OCC = re.compile(r"^Lane(\d+)_Occ$")
_OFF_CNT = re.compile(r"^Off(\d+)_cnt$")
_PSG_CNT = re.compile(r"^Psg(\d+)_cnt$")


class ParseError(ValueError):
    """Fatal input problem: bad header, or row errors beyond the budget."""


class DuplicateTimestampError(ValueError):
    """Two rows map to the same (detector, slot)."""


class SeriesError(ValueError):
    """A series cannot be repaired or used (e.g. fewer than 2 samples)."""


@dataclass(frozen=True, slots=True)
class ParseIssue:
    line: int
    message: str


@dataclass(frozen=True, slots=True)
class GapDescriptor:
    """Maximal run of consecutive missing 30 s slots."""

    detector_id: int
    start_date: dt.date
    start_sec: int
    length: int


@dataclass
class ParseResult:
    """Samples plus missing-slot and error accounting from one file.

    ``missing_slots`` lists ``(detector_id, date, time_end)`` for rows that
    were present but had an empty volume/occupancy cell (wholly-missing
    slots; absent rows surface later as pivot holes). ``empty_cells`` /
    ``total_cells`` support the cell-level missing rate; the slot-level
    rate comes from :func:`detect_gaps`.
    """

    samples: list[RawSample] = field(default_factory=list)
    missing_slots: list[tuple[int, dt.date, int]] = field(default_factory=list)
    issues: list[ParseIssue] = field(default_factory=list)
    lane_count: int = 0
    labeling: str = "start"
    data_rows: int = 0
    empty_cells: int = 0
    total_cells: int = 0

    @property
    def cell_missing_fraction(self) -> float:
        return self.empty_cells / self.total_cells if self.total_cells else 0.0


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def _parse_header(header: list[str]) -> tuple[dict, int]:
    cols = {name.strip(): i for i, name in enumerate(header)}
    missing = [c for c in ("Date", "Time", "ID") if c not in cols]

    def lane_cols(pattern):
        found = {}
        for name, i in cols.items():
            m = pattern.match(name)
            if m:
                found[int(m.group(1))] = i
        return found

    vol_cols = lane_cols(_LANE_VOL)
    occ_cols = lane_cols(_LANE_OCC)
    if not vol_cols:
        missing.append("Lane1_Vol")
    if not occ_cols:
        missing.append("Lane1_Occ")
    if missing:
        raise ParseError(f"header missing required columns: {', '.join(missing)}")
    k = max(vol_cols)
    expect = set(range(1, k + 1))
    if set(vol_cols) != expect or set(occ_cols) != expect:
        raise ParseError(
            "lane columns must be contiguous Lane1..LaneK with matching _Vol and _Occ"
        )
    layout = {
        "date": cols["Date"],
        "time": cols["Time"],
        "id": cols["ID"],
        "vol": [vol_cols[x] for x in range(1, k + 1)],
        "occ": [occ_cols[x] for x in range(1, k + 1)],
        "off": [i for _, i in sorted(lane_cols(_OFF_CNT).items())],
        "psg": [i for _, i in sorted(lane_cols(_PSG_CNT).items())],
    }
    return layout, k


def parse_raw_csv(source, time_labeling: str = "auto",
                  error_budget: int = DEFAULT_ERROR_BUDGET) -> ParseResult:
    """Parse a raw detector CSV into :class:`RawSample` values.

    Rows with an empty volume/occupancy cell are recorded in
    ``missing_slots`` instead of producing a sample. Unparseable cells are
    collected as row-level issues; more than ``error_budget`` of them is
    fatal.
    """
    if time_labeling not in ("auto", "start", "end"):
        raise ValueError(f"time_labeling must be auto|start|end, got {time_labeling!r}")
    fh, own = _open_text(source)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty input: no header row") from None
        layout, k = _parse_header(header)

        result = ParseResult(lane_count=k)
        # (date, raw_sec, det, vols, occs, off, psg, line)
        rows: list[tuple] = []
        saw_midnight_end = False
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            result.data_rows += 1
            if len(result.issues) > error_budget:
                break
            try:
                date = parse_date(row[layout["date"]])
                sec = parse_hms(row[layout["time"]])
                det = int(row[layout["id"]])
            except (ValueError, IndexError) as exc:
                result.issues.append(ParseIssue(line_no, str(exc)))
                continue
            cells = [row[i].strip() if i < len(row) else "" for i in layout["vol"]]
            cells += [row[i].strip() if i < len(row) else "" for i in layout["occ"]]
            result.total_cells += 2 * k
            n_empty = sum(1 for c in cells if not c)
            if n_empty:
                result.empty_cells += n_empty
                rows.append((date, sec, det, None, None, None, None, line_no))
                continue
            try:
                vols = tuple(int(c) for c in cells[:k])
                occs = tuple(int(c) for c in cells[k:])
                off = _optional_count(row, layout["off"])
                psg = _optional_count(row, layout["psg"])
            except ValueError as exc:
                result.issues.append(ParseIssue(line_no, str(exc)))
                continue
            if sec == SECONDS_PER_DAY:
                saw_midnight_end = True
            rows.append((date, sec, det, vols, occs, off, psg, line_no))
        if len(result.issues) > error_budget:
            raise ParseError(
                f"row error budget exceeded ({len(result.issues)} > {error_budget}); "
                f"first issue at line {result.issues[0].line}: {result.issues[0].message}"
            )

        labeling = time_labeling
        if labeling == "auto":
            labeling = "end" if saw_midnight_end else "start"
        result.labeling = labeling
        for date, sec, det, vols, occs, off, psg, line_no in rows:
            if labeling == "start":
                time_end = sec + SLOT_SECONDS
            else:
                time_end = sec if sec > 0 else SECONDS_PER_DAY
            if time_end % SLOT_SECONDS != 0 or not (SLOT_SECONDS <= time_end <= SECONDS_PER_DAY):
                result.issues.append(
                    ParseIssue(line_no, f"time not on the 30 s grid (parsed {sec} s)")
                )
                continue
            if vols is None:
                result.missing_slots.append((det, date, time_end))
            else:
                result.samples.append(RawSample(
                    date=date, time_end=time_end, detector_id=det,
                    lane_volumes=vols, lane_occupancies=occs,
                    off_count=off, psg_count=psg, source_line=line_no,
                ))
        if len(result.issues) > error_budget:
            raise ParseError(f"row error budget exceeded ({len(result.issues)} > {error_budget})")
        return result
    finally:
        if own:
            fh.close()


def _optional_count(row: list[str], indices: list[int]) -> int | None:
    if not indices:
        return None
    total = 0
    seen = False
    for i in indices:
        cell = row[i].strip() if i < len(row) else ""
        if cell:
            total += int(cell)
            seen = True
    return total if seen else None


def write_raw_csv(samples, dest, lane_count: int | None = None) -> None:
    """Write samples in the canonical input format (window START labels).

    Samples must share one lane count; ``Off1_cnt``/``Psg1_cnt`` columns are
    emitted only when any sample carries them.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("nothing to write")
    k = lane_count or len(samples[0].lane_volumes)
    if any(len(s.lane_volumes) != k or len(s.lane_occupancies) != k for s in samples):
        raise ValueError("samples must share a single lane count")
    has_off = any(s.off_count is not None for s in samples)
    has_psg = any(s.psg_count is not None for s in samples)

    fh, own = (open(dest, "w", encoding="utf-8", newline=""), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    try:
        w = csv.writer(fh)
        header = ["Date", "Time", "ID"]
        header += [f"Lane{x}_Vol" for x in range(1, k + 1)]
        header += [f"Lane{x}_Occ" for x in range(1, k + 1)]
        if has_off:
            header.append("Off1_cnt")
        if has_psg:
            header.append("Psg1_cnt")
        w.writerow(header)
        for s in samples:
            row = [s.date.isoformat(), format_hms(s.time_end - SLOT_SECONDS), s.detector_id]
            row += list(s.lane_volumes) + list(s.lane_occupancies)
            if has_off:
                row.append("" if s.off_count is None else s.off_count)
            if has_psg:
                row.append("" if s.psg_count is None else s.psg_count)
            w.writerow(row)
    finally:
        if own:
            fh.close()


def aggregate_lanes(s: RawSample) -> tuple[int, int]:
    """Sum per-lane volumes and occupancies into single totals."""
    return sum(s.lane_volumes), sum(s.lane_occupancies)


def pivot_by_detector(samples) -> dict[int, DetectorSeries]:
    """Group samples by detector into time-sorted, lane-aggregated series.

    Missing slots stay as holes for :func:`detect_gaps` /
    :func:`interpolate_linear`. A duplicated (detector, timestamp) key is
    fatal.
    """
    by_det: dict[int, list[RawSample]] = {}
    for s in samples:
        by_det.setdefault(s.detector_id, []).append(s)

    out: dict[int, DetectorSeries] = {}
    for det in sorted(by_det):
        group = sorted(by_det[det], key=lambda s: (s.date, s.time_end))
        slots = np.empty(len(group), dtype=np.int64)
        vol = np.empty(len(group), dtype=np.float64)
        occ = np.empty(len(group), dtype=np.float64)
        prev_slot = -1
        prev_line = None
        for i, s in enumerate(group):
            slot = slot_index(s.date, s.time_end - SLOT_SECONDS)
            if slot == prev_slot:
                a = "unknown line" if prev_line is None else f"line {prev_line}"
                b = "unknown line" if s.source_line is None else f"line {s.source_line}"
                raise DuplicateTimestampError(
                    f"detector {det}: duplicate timestamp "
                    f"{s.date} {format_hms(s.time_end - SLOT_SECONDS)} ({a} and {b})"
                )
            v, o = aggregate_lanes(s)
            slots[i], vol[i], occ[i] = slot, v, o
            prev_slot, prev_line = slot, s.source_line
        out[det] = DetectorSeries(detector_id=det, slots=slots, volume=vol, occupancy=occ)
    return out


@dataclass(frozen=True)
class GapScan:
    """Missing-slot accounting for one series over its full-day domain."""

    detector_id: int
    gaps: list[GapDescriptor]
    leading_missing: int
    trailing_missing: int
    total_slots: int

    @property
    def interior_missing(self) -> int:
        return sum(g.length for g in self.gaps)

    @property
    def missing_slots(self) -> int:
        return self.interior_missing + self.leading_missing + self.trailing_missing

    @property
    def missing_fraction(self) -> float:
        return self.missing_slots / self.total_slots if self.total_slots else 0.0


def detect_gaps(series: DetectorSeries) -> GapScan:
    """Find maximal runs of missing slots between first and last sample.

    Slots outside the present range but inside the full-day domain are
    counted as leading/trailing misses (they get nearest-value extension
    rather than interpolation).
    """
    if len(series) == 0:
        raise SeriesError(f"detector {series.detector_id}: empty series")
    dom_start, dom_end = series.domain()
    slots = series.slots
    gaps: list[GapDescriptor] = []
    diffs = np.diff(slots)
    for i in np.nonzero(diffs > 1)[0]:
        start = int(slots[i]) + 1
        gaps.append(GapDescriptor(
            detector_id=series.detector_id,
            start_date=slot_date(start),
            start_sec=slot_start_sec(start),
            length=int(diffs[i]) - 1,
        ))
    return GapScan(
        detector_id=series.detector_id,
        gaps=gaps,
        leading_missing=int(slots[0]) - dom_start,
        trailing_missing=dom_end - 1 - int(slots[-1]),
        total_slots=dom_end - dom_start,
    )


def interpolate_linear(series: DetectorSeries) -> DetectorSeries:
    """Fill every hole in the series' full-day domain.

    Interior gaps get the straight line between the nearest present
    neighbors, applied independently to volume and occupancy; leading and
    trailing gaps copy the nearest present value. Present samples are
    returned bit-for-bit unchanged.
    """
    if len(series) < 2:
        raise SeriesError(
            f"detector {series.detector_id}: need at least 2 present samples "
            f"to repair, got {len(series)}"
        )
    dom_start, dom_end = series.domain()
    grid = np.arange(dom_start, dom_end, dtype=np.int64)
    vol = np.interp(grid, series.slots, series.volume)
    occ = np.interp(grid, series.slots, series.occupancy)
    present = series.slots - dom_start
    vol[present] = series.volume
    occ[present] = series.occupancy
    filled = len(grid) - len(series)
    boundary = (int(series.slots[0]) - dom_start) + (dom_end - 1 - int(series.slots[-1]))
    return DetectorSeries(
        detector_id=series.detector_id,
        slots=grid,
        volume=vol,
        occupancy=occ,
        gaps_filled=filled,
        boundary_filled=boundary,
    )


def write_gap_report(scans, dest) -> None:
    """Write interior gap descriptors as ``detector_id,start_date,start_time,length_slots``."""
    fh, own = (open(dest, "w", encoding="utf-8", newline=""), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    try:
        w = csv.writer(fh)
        w.writerow(["detector_id", "start_date", "start_time", "length_slots"])
        for scan in scans:
            for g in scan.gaps:
                w.writerow([g.detector_id, g.start_date.isoformat(),
                            format_hms(g.start_sec), g.length])
    finally:
        if own:
            fh.close()
