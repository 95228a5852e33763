"""Interventions driven by observed positives, never by hidden states.

Quarantine confines each newly positive agent and its fixed contacts for a
fixed number of days starting the day after the test.  Lockdowns confine
everyone once the trend detector fires: the detector smooths the daily
positive counts with a trailing window, takes the slope of the chord between
now and ``chord_days`` ago, and fires when that slope exceeds the threshold.
An indefinite lockdown never lifts; a fixed-duration one lifts after its set
length and re-arms the detector (which is never evaluated while a lockdown
is active).

Everything here consumes the recorded testing history only — the interface
cannot see ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .city import Roster
    from .testing import TestingHistory


@dataclass(frozen=True)
class TriggerParams:
    """Trend-detector and confinement-duration parameters."""

    slope_threshold: float = 0.5
    chord_days: int = 10
    smoothing_window: int = 8
    quarantine_days: int = 10
    lockdown_days: int | None = 14   # ignored in indefinite mode

    def __post_init__(self):
        if self.chord_days < 1:
            raise ValueError("chord_days must be >= 1")
        if self.smoothing_window < 1:
            raise ValueError("smoothing_window must be >= 1")
        if self.quarantine_days < 0:
            raise ValueError("quarantine_days must be >= 0")
        if self.lockdown_days is not None and self.lockdown_days < 1:
            raise ValueError("lockdown_days must be >= 1 when set")


@dataclass
class RestrictionView:
    """Who may interact on a given day.

    An agent is restricted iff a global lockdown is active or the day is
    before its quarantined-until mark.
    """

    day: int
    lockdown: bool
    quarantined_until: np.ndarray  # int64[n]; 0 = never quarantined

    def restricted_mask(self, n: int | None = None) -> np.ndarray:
        if self.lockdown:
            return np.ones(len(self.quarantined_until), dtype=bool)
        return self.day < self.quarantined_until

    def active_mask(self, n: int | None = None) -> np.ndarray:
        return ~self.restricted_mask(n)

    def is_restricted(self, agent: int) -> bool:
        return self.lockdown or self.day < int(self.quarantined_until[agent])

    @property
    def quarantined_count(self) -> int:
        return int(np.count_nonzero(self.day < self.quarantined_until))


def smoothed_positives(history: "TestingHistory", t: int, window: int) -> float:
    """Trailing mean of daily positive counts over the last ``window`` days.

    Early days use a partial window (mean over days 1..t).
    """
    if t < 1:
        raise ValueError("day must be >= 1")
    first = max(1, t - window + 1)
    total = sum(history.daily_positive_count(d) for d in range(first, t + 1))
    return total / (t - first + 1)


def chord_slope(history: "TestingHistory", t: int, params: TriggerParams) -> float:
    """Slope of the chord of the smoothed positives over ``chord_days``.

    Defined as 0 during warm-up (t <= chord_days), where the chord would
    reach before day 1.
    """
    chord = params.chord_days
    if t <= chord:
        return 0.0
    now = smoothed_positives(history, t, params.smoothing_window)
    then = smoothed_positives(history, t - chord, params.smoothing_window)
    return (now - then) / chord


@dataclass
class LockdownController:
    """Schedules global lockdowns from the trend detector.

    ``update`` runs once per day after testing; a firing on day t confines
    everyone from day t+1.  Fixed mode lifts after ``lockdown_days`` days of
    confinement and re-arms; episodes never overlap because the detector is
    suppressed while any lockdown is active.
    """

    mode: str                      # "indefinite" | "fixed"
    params: TriggerParams
    episodes: list[tuple[int, int | None]] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ("indefinite", "fixed"):
            raise ValueError(f"unknown lockdown mode {self.mode!r}")
        if self.mode == "fixed" and self.params.lockdown_days is None:
            raise ValueError("fixed-duration lockdown needs lockdown_days")

    def is_locked(self, day: int) -> bool:
        if not self.episodes:
            return False
        start, end = self.episodes[-1]
        return day >= start and (end is None or day < end)

    def update(self, history: "TestingHistory", day: int) -> None:
        if self.is_locked(day):
            return
        if self.mode == "indefinite" and self.episodes:
            return
        if chord_slope(history, day, self.params) > self.params.slope_threshold:
            start = day + 1
            end = None if self.mode == "indefinite" else start + self.params.lockdown_days
            self.episodes.append((start, end))


def quarantine_update(
    quarantined_until: np.ndarray,
    new_positives: np.ndarray,
    roster: "Roster",
    day: int,
    quarantine_days: int,
) -> None:
    """Confine each new positive and all its fixed contacts, in place.

    The mark extends to day + 1 + quarantine_days (restricted on days
    day+1 .. day+quarantine_days) and never shrinks.
    """
    if len(new_positives) == 0:
        return
    groups = [np.asarray(new_positives, dtype=np.int64)]
    groups.extend(roster.fixed_contacts(int(a)) for a in new_positives)
    affected = np.unique(np.concatenate(groups)).astype(np.int64)
    until = day + 1 + quarantine_days
    np.maximum.at(quarantined_until, affected, until)
