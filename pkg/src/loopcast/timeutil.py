"""Calendar and 30-second slot arithmetic shared across the pipeline.

A "slot" is one 30-second measurement window. Slots are addressed globally
by ``date.toordinal() * SLOTS_PER_DAY + second_of_day // 30``, which makes
windows, gaps, and cadence checks plain integer arithmetic even when a
series spans month boundaries.
"""

from __future__ import annotations

import datetime as dt

SLOT_SECONDS = 30
SECONDS_PER_DAY = 86400
SLOTS_PER_DAY = SECONDS_PER_DAY // SLOT_SECONDS  # 2880


def slot_index(date: dt.date, start_sec: int) -> int:
    """Global slot number of the window starting at ``start_sec`` on ``date``."""
    return date.toordinal() * SLOTS_PER_DAY + start_sec // SLOT_SECONDS


def slot_date(slot: int) -> dt.date:
    return dt.date.fromordinal(slot // SLOTS_PER_DAY)


def slot_start_sec(slot: int) -> int:
    """Second-of-day at which the slot's window starts."""
    return (slot % SLOTS_PER_DAY) * SLOT_SECONDS


def parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def parse_hms(text: str) -> int:
    """Parse ``HH:MM:SS`` into seconds since midnight.

    ``24:00:00`` is accepted (86400): end-labeled files use it for the last
    window of a day.
    """
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"bad time {text!r}, expected HH:MM:SS")
    h, m, s = (int(p) for p in parts)
    sec = h * 3600 + m * 60 + s
    if not (0 <= sec <= SECONDS_PER_DAY) or m > 59 or s > 59:
        raise ValueError(f"time {text!r} out of range")
    return sec


def format_hms(sec: int) -> str:
    if not (0 <= sec <= SECONDS_PER_DAY):
        raise ValueError(f"second-of-day {sec} out of range")
    return f"{sec // 3600:02d}:{sec % 3600 // 60:02d}:{sec % 60:02d}"
