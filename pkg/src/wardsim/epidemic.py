"""Per-day disease dynamics.

COVID follows S -> E -> I -> R with R absorbing; E -> I and I -> R are
per-day Bernoulli steps at rates 1/mean-dwell-time (geometric dwell times).
The flu confounder is an independent two-state chain (S <-> ill) that only
exists to pollute the symptomatic pool.  Infection happens through contact
events: when an infectious and a susceptible agent meet, the susceptible one
is exposed with a fixed per-meeting probability, each meeting an independent
trial.

The day is synchronous: every infection trial reads day-start states, so an
agent infected today cannot infect today.  New exposures are committed to E
before the day's local step, which gives the new E its first E -> I draw the
same day; the mean exposure-to-infectious latency is then exactly the mean
E dwell, and a dwell of 1 collapses E to a pass-through (the agent is
infectious the morning after exposure).

Contact channels: every agent draws a few random partners from its
neighbourhood each day, meets its fixed neighbourhood circle, and, if it
commutes, draws random partners at its visit place and meets its fixed
workplace circle.  Random daily partners are untraceable by policies; the
fixed circles are what tracing and quarantine see.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import TYPE_CHECKING, Iterable

import numpy as np

from . import kernels, rng
from .rng import Key, Stream

if TYPE_CHECKING:  # pragma: no cover
    from .city import Roster


class CovidState(IntEnum):
    SUSCEPTIBLE = 0
    EXPOSED = 1
    INFECTIOUS = 2
    RECOVERED = 3


class FluState(IntEnum):
    SUSCEPTIBLE = 0
    ILL = 1


# Channel names (public event field) and the words used in draw/trial keys.
CH_NR = 0
CH_NF = 1
CH_WR = 2
CH_WF = 3
CHANNEL_NAMES = {
    CH_NR: "neighborhood-random",
    CH_NF: "neighborhood-fixed",
    CH_WR: "workplace-random",
    CH_WF: "workplace-fixed",
}


@dataclass(frozen=True)
class SimParams:
    """All rate and count parameters of the dynamics plus run horizon/budget."""

    infection_prob: float = 0.1
    covid_incubation_days: float = 1.0     # mean E -> I dwell; 1 skips E
    covid_recovery_days: float = 8.0       # mean I -> R dwell
    flu_onset_days: float = 50.0           # mean flu S -> ill dwell
    flu_recovery_days: float = 8.0         # mean flu ill -> S dwell
    neighborhood_random_meetings: int = 1
    neighborhood_fixed_contacts: int = 5
    workplace_random_meetings: int = 2
    workplace_fixed_contacts: int = 10
    days: int = 100
    daily_test_budget: int = 50
    false_negative_rate: float = 0.0

    def __post_init__(self):
        for name in (
            "covid_incubation_days",
            "covid_recovery_days",
            "flu_onset_days",
            "flu_recovery_days",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1 day")
        for name in ("infection_prob", "false_negative_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in (
            "neighborhood_random_meetings",
            "neighborhood_fixed_contacts",
            "workplace_random_meetings",
            "workplace_fixed_contacts",
            "days",
            "daily_test_budget",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class ContactEvent:
    """An unordered meeting between two agents on one day."""

    a: int
    b: int
    channel: str
    day: int

    def pair(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass(frozen=True)
class DayKeys:
    """All per-day key-chain prefixes, derived once from (run key, day)."""

    day: int
    draw_nr: int
    draw_wr: int
    trial_nr: int
    trial_nf: int
    trial_wr: int
    trial_wf: int
    covid_ei: int
    covid_ir: int
    flu_onset: int
    flu_recovery: int
    reporting: int
    test_result: int
    selection: int

    def trial_prefixes(self) -> dict[str, int]:
        return {
            CHANNEL_NAMES[CH_NR]: self.trial_nr,
            CHANNEL_NAMES[CH_NF]: self.trial_nf,
            CHANNEL_NAMES[CH_WR]: self.trial_wr,
            CHANNEL_NAMES[CH_WF]: self.trial_wf,
        }


def day_keys(run_key: Key, day: int) -> DayKeys:
    dk = run_key.child(rng.DAY, day)
    return DayKeys(
        day=day,
        draw_nr=dk.child(rng.CONTACT_DRAW, CH_NR).state,
        draw_wr=dk.child(rng.CONTACT_DRAW, CH_WR).state,
        trial_nr=dk.child(rng.TRANSMIT, CH_NR).state,
        trial_nf=dk.child(rng.TRANSMIT, CH_NF).state,
        trial_wr=dk.child(rng.TRANSMIT, CH_WR).state,
        trial_wf=dk.child(rng.TRANSMIT, CH_WF).state,
        covid_ei=dk.child(rng.COVID_PROGRESS, 1).state,
        covid_ir=dk.child(rng.COVID_PROGRESS, 2).state,
        flu_onset=dk.child(rng.FLU_PROGRESS, 1).state,
        flu_recovery=dk.child(rng.FLU_PROGRESS, 2).state,
        reporting=dk.child(rng.REPORTING).state,
        test_result=dk.child(rng.TEST_RESULT).state,
        selection=dk.child(rng.SELECTION).state,
    )


# ---------------------------------------------------------------------------
# Single-agent reference steps
# ---------------------------------------------------------------------------


def covid_local_step(state: CovidState, params: SimParams, stream: Stream) -> CovidState:
    """One day of local COVID evolution for one agent.

    E -> I with probability 1/mean incubation, I -> R with probability
    1/mean recovery; S only moves via infection and R is absorbing.
    """
    if state == CovidState.EXPOSED:
        if stream.uniform() < 1.0 / params.covid_incubation_days:
            return CovidState.INFECTIOUS
    elif state == CovidState.INFECTIOUS:
        if stream.uniform() < 1.0 / params.covid_recovery_days:
            return CovidState.RECOVERED
    return state


def flu_step(state: FluState, params: SimParams, stream: Stream) -> FluState:
    """One day of flu evolution; depends on the flu state alone."""
    if state == FluState.SUSCEPTIBLE:
        if stream.uniform() < 1.0 / params.flu_onset_days:
            return FluState.ILL
    else:
        if stream.uniform() < 1.0 / params.flu_recovery_days:
            return FluState.SUSCEPTIBLE
    return state


# ---------------------------------------------------------------------------
# Contacts and transmission
# ---------------------------------------------------------------------------


def _active_mask(roster: "Roster", restrictions) -> np.ndarray:
    if restrictions is None:
        return np.ones(roster.n, dtype=bool)
    return restrictions.active_mask(roster.n)


def generate_contacts(
    roster: "Roster", params: SimParams, keys: DayKeys, restrictions=None
) -> list[ContactEvent]:
    """The day's contact events under current restrictions.

    Unordered pairs, deduplicated per channel; no event touches a restricted
    agent.  This materialised view exists for inspection and tests — the
    engine computes exposures directly from the same draw keys without
    building the list.
    """
    arrays = contact_event_arrays(roster, params, keys, restrictions)
    events: list[ContactEvent] = []
    for channel, (lo, hi) in arrays.items():
        events.extend(
            ContactEvent(int(a), int(b), channel, keys.day) for a, b in zip(lo, hi)
        )
    return events


def contact_event_arrays(
    roster: "Roster", params: SimParams, keys: DayKeys, restrictions=None
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Array form of ``generate_contacts``: channel -> canonical (lo, hi) pairs."""
    active = _active_mask(roster, restrictions)
    return kernels.contact_event_arrays(
        roster.n,
        active,
        roster.home,
        roster.visit_slot,
        roster.nbhd_indptr,
        roster.nbhd_agents,
        roster.slot_indptr,
        roster.slot_agents,
        roster.nf_edge_u,
        roster.nf_edge_v,
        roster.wf_edge_u,
        roster.wf_edge_v,
        params.neighborhood_random_meetings,
        params.workplace_random_meetings,
        keys.draw_nr,
        keys.draw_wr,
    )


def own_draw_events(
    roster: "Roster", params: SimParams, keys: DayKeys, agent: int
) -> list[ContactEvent]:
    """Events originating from one agent's own draws and own-sampled circles.

    Excludes events where the agent was drawn by someone else or appears only
    through a contact list sampled by another agent; used to check the
    per-agent event-count bound implied by the meeting parameters.
    """
    events: list[ContactEvent] = []
    home = int(roster.home[agent])
    lo, hi = roster.nbhd_indptr[home], roster.nbhd_indptr[home + 1]
    nbhd = roster.nbhd_agents[lo:hi]
    k_nr = params.neighborhood_random_meetings
    if len(nbhd) and k_nr:
        u = rng.uniforms2(keys.draw_nr, np.full(k_nr, agent), np.arange(k_nr))
        idx = np.minimum((u * len(nbhd)).astype(np.int64), len(nbhd) - 1)
        for j in nbhd[idx]:
            if int(j) != agent:
                events.append(ContactEvent(agent, int(j), CHANNEL_NAMES[CH_NR], keys.day))
    for j in roster.own_neighborhood_sample(agent):
        events.append(ContactEvent(agent, int(j), CHANNEL_NAMES[CH_NF], keys.day))
    slot = int(roster.visit_slot[agent])
    if slot >= 0:
        lo, hi = roster.slot_indptr[slot], roster.slot_indptr[slot + 1]
        group = roster.slot_agents[lo:hi]
        k_wr = params.workplace_random_meetings
        if len(group) and k_wr:
            u = rng.uniforms2(keys.draw_wr, np.full(k_wr, agent), np.arange(k_wr))
            idx = np.minimum((u * len(group)).astype(np.int64), len(group) - 1)
            for j in group[idx]:
                if int(j) != agent:
                    events.append(
                        ContactEvent(agent, int(j), CHANNEL_NAMES[CH_WR], keys.day)
                    )
        for j in roster.own_workplace_sample(agent):
            events.append(ContactEvent(agent, int(j), CHANNEL_NAMES[CH_WF], keys.day))
    # within-channel duplicates collapse, mirror that here
    seen = set()
    unique = []
    for ev in events:
        key = (ev.pair(), ev.channel)
        if key not in seen:
            seen.add(key)
            unique.append(ev)
    return unique


def transmit(
    covid: np.ndarray, contacts: Iterable[ContactEvent], p: float, keys: DayKeys
) -> np.ndarray:
    """Infection trials over explicit contact events.

    Returns the sorted ids of newly exposed agents.  Every event with one
    infectious and one susceptible endpoint exposes the susceptible one with
    probability p, independently per event; all trials read the states passed
    in, so exposure is synchronous by construction.
    """
    by_channel: dict[str, tuple[list[int], list[int]]] = {}
    for ev in contacts:
        lo, hi = ev.pair()
        by_channel.setdefault(ev.channel, ([], []))[0].append(lo)
        by_channel[ev.channel][1].append(hi)
    events = {
        ch: (np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64))
        for ch, (lo, hi) in by_channel.items()
    }
    exposed = kernels.exposures_from_events(covid, events, p, keys.trial_prefixes())
    return np.nonzero(exposed)[0]


def day_new_exposures(
    covid: np.ndarray, roster: "Roster", params: SimParams, keys: DayKeys, active: np.ndarray
) -> np.ndarray:
    """Fused contact generation + transmission on the selected backend."""
    return kernels.day_new_exposures(
        covid,
        active,
        roster.home,
        roster.visit_slot,
        roster.nbhd_indptr,
        roster.nbhd_agents,
        roster.slot_indptr,
        roster.slot_agents,
        roster.nf_edge_u,
        roster.nf_edge_v,
        roster.wf_edge_u,
        roster.wf_edge_v,
        params.neighborhood_random_meetings,
        params.workplace_random_meetings,
        params.infection_prob,
        keys.draw_nr,
        keys.draw_wr,
        keys.trial_nr,
        keys.trial_nf,
        keys.trial_wr,
        keys.trial_wf,
    )


# ---------------------------------------------------------------------------
# Whole-day advance
# ---------------------------------------------------------------------------


@dataclass
class DayDelta:
    """What one simulated day changed (counts taken as described per field)."""

    day: int
    active_start: int                 # infectious agents at day start
    locality_active_start: np.ndarray
    newly_exposed: np.ndarray         # agent ids infected today
    covid_counts: tuple[int, int, int, int]  # S, E, I, R at day end
    flu_ill: int                      # at day end

    @property
    def new_infections(self) -> int:
        return len(self.newly_exposed)


def progress_states(
    covid: np.ndarray,
    flu: np.ndarray,
    newly_exposed: np.ndarray,
    params: SimParams,
    keys: DayKeys,
) -> None:
    """Apply exposures and one local step to both diseases, in place."""
    start_i = np.nonzero(covid == CovidState.INFECTIOUS)[0]
    covid[newly_exposed] = CovidState.EXPOSED
    e_ids = np.nonzero(covid == CovidState.EXPOSED)[0]
    if len(e_ids):
        hit = rng.uniforms(keys.covid_ei, e_ids) < 1.0 / params.covid_incubation_days
        covid[e_ids[hit]] = CovidState.INFECTIOUS
    if len(start_i):
        hit = rng.uniforms(keys.covid_ir, start_i) < 1.0 / params.covid_recovery_days
        covid[start_i[hit]] = CovidState.RECOVERED

    flu_s = np.nonzero(flu == FluState.SUSCEPTIBLE)[0]
    flu_i = np.nonzero(flu == FluState.ILL)[0]
    if len(flu_s):
        hit = rng.uniforms(keys.flu_onset, flu_s) < 1.0 / params.flu_onset_days
        flu[flu_s[hit]] = FluState.ILL
    if len(flu_i):
        hit = rng.uniforms(keys.flu_recovery, flu_i) < 1.0 / params.flu_recovery_days
        flu[flu_i[hit]] = FluState.SUSCEPTIBLE


def advance_day(
    covid: np.ndarray,
    flu: np.ndarray,
    roster: "Roster",
    n_localities: int,
    params: SimParams,
    keys: DayKeys,
    active: np.ndarray,
) -> DayDelta:
    """Run one full day: contacts, transmission, then local steps (in place)."""
    start_inf = covid == CovidState.INFECTIOUS
    loc_active = np.bincount(
        roster.home[start_inf], minlength=n_localities
    ).astype(np.int64)

    exposed_mask = day_new_exposures(covid, roster, params, keys, active)
    newly = np.nonzero(exposed_mask & (covid == CovidState.SUSCEPTIBLE))[0]
    progress_states(covid, flu, newly, params, keys)

    counts = np.bincount(covid, minlength=4)
    return DayDelta(
        day=keys.day,
        active_start=int(start_inf.sum()),
        locality_active_start=loc_active,
        newly_exposed=newly,
        covid_counts=(int(counts[0]), int(counts[1]), int(counts[2]), int(counts[3])),
        flu_ill=int((flu == FluState.ILL).sum()),
    )
