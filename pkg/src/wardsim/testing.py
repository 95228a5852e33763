"""Budgeted test selection and the testing history.

A policy runs once per day: build the pool of agents who report symptoms
today (COVID-infectious or flu-ill, passed the per-locality reporting draw,
never previously positive), select at most the daily budget from it, apply
the noisy individual test to each selected agent, and record the outcomes.

Selection rules see only observable attributes — symptom membership, homes,
visit places, and past test results — never the underlying disease states.
Three rules are provided: uniform random sampling (RST), priority testing of
symptomatic fixed contacts of recent positives (CT), and sampling weighted
by exponentially amplified per-location positive-case scores (LBT).

The individual test has zero false-positive probability and a configurable
false-negative rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from . import rng
from .epidemic import CovidState, DayKeys, FluState
from .rng import Stream, sample_without_replacement, weighted_sample_without_replacement

if TYPE_CHECKING:  # pragma: no cover
    from .city import Roster

CT_LOOKBACK_DAYS = 2  # positives from the last this-many days seed tracing


@dataclass(frozen=True)
class LbtParams:
    """Location-based testing score parameters.

    A positive recorded on day tau adds ``locality_case_weight`` to its home
    locality's score and ``visit_case_weight`` to its visit place's score;
    both contributions grow by (1 + daily_amplification) per elapsed day, so
    older cases weigh more (they had longer to spread).  An agent's risk
    score blends its visit-place score with ``locality_blend`` times its
    home-locality score.  ``baseline_weight`` keeps zero-score agents
    sampleable.
    """

    locality_case_weight: float = 1.0
    visit_case_weight: float = 1.0
    locality_blend: float = 1.0
    daily_amplification: float = 0.1
    baseline_weight: float = 1e-6

    def __post_init__(self):
        if self.locality_case_weight < 0 or self.visit_case_weight < 0:
            raise ValueError("case weights must be >= 0")
        if self.locality_blend < 0:
            raise ValueError("locality_blend must be >= 0")
        if self.daily_amplification < 0:
            raise ValueError("daily_amplification must be >= 0")
        if self.baseline_weight <= 0:
            raise ValueError("baseline_weight must be > 0")


class TestingHistory:
    """Day-indexed record of test outcomes (+1 positive, -1 negative).

    Conceptually an n x horizon matrix defaulting to 0 with at most one entry
    per (agent, day); stored as per-day arrays with fast positive lookups.
    """

    def __init__(self, n: int, horizon: int):
        self.n = n
        self.horizon = horizon
        self._agents: dict[int, np.ndarray] = {}
        self._results: dict[int, np.ndarray] = {}
        self.ever_positive = np.zeros(n, dtype=bool)
        self._positive_count = np.zeros(horizon + 1, dtype=np.int64)
        self._test_count = np.zeros(horizon + 1, dtype=np.int64)

    def record_day(self, day: int, agents: np.ndarray, results: np.ndarray) -> None:
        if not 1 <= day <= self.horizon:
            raise ValueError(f"day {day} outside 1..{self.horizon}")
        if day in self._agents:
            raise ValueError(f"day {day} already recorded")
        agents = np.asarray(agents, dtype=np.int64)
        results = np.asarray(results, dtype=np.int8)
        if len(np.unique(agents)) != len(agents):
            raise ValueError("an agent can be tested at most once per day")
        self._agents[day] = agents
        self._results[day] = results
        positives = agents[results == 1]
        self.ever_positive[positives] = True
        self._positive_count[day] = len(positives)
        self._test_count[day] = len(agents)

    def tested_on(self, day: int) -> tuple[np.ndarray, np.ndarray]:
        empty = np.empty(0, dtype=np.int64)
        if day not in self._agents:
            return empty, empty.astype(np.int8)
        return self._agents[day], self._results[day]

    def positives_on(self, day: int) -> np.ndarray:
        agents, results = self.tested_on(day)
        return agents[results == 1]

    def daily_positive_count(self, day: int) -> int:
        if not 1 <= day <= self.horizon:
            return 0
        return int(self._positive_count[day])

    def daily_test_count(self, day: int) -> int:
        if not 1 <= day <= self.horizon:
            return 0
        return int(self._test_count[day])

    def result(self, agent: int, day: int) -> int:
        agents, results = self.tested_on(day)
        pos = np.nonzero(agents == agent)[0]
        return int(results[pos[0]]) if len(pos) else 0

    def to_matrix(self) -> np.ndarray:
        """Dense n x horizon view (column t-1 holds day t); small runs only."""
        m = np.zeros((self.n, self.horizon), dtype=np.int8)
        for day, agents in self._agents.items():
            m[agents, day - 1] = self._results[day]
        return m


def test_individual(covid_state: CovidState, fn_rate: float, stream: Stream) -> int:
    """Apply one test: +1 only for an infectious agent passing the 1-r draw."""
    if covid_state == CovidState.INFECTIOUS and stream.uniform() < 1.0 - fn_rate:
        return 1
    return -1


def run_tests(covid: np.ndarray, agents: np.ndarray, fn_rate: float, keys: DayKeys) -> np.ndarray:
    """Vectorised tests, one keyed draw per (day, agent)."""
    if len(agents) == 0:
        return np.empty(0, dtype=np.int8)
    u = rng.uniforms(keys.test_result, agents)
    positive = (covid[agents] == CovidState.INFECTIOUS) & (u < 1.0 - fn_rate)
    return np.where(positive, 1, -1).astype(np.int8)


def build_pool(
    covid: np.ndarray,
    flu: np.ndarray,
    home: np.ndarray,
    reporting: np.ndarray,
    history: TestingHistory,
    keys: DayKeys,
) -> np.ndarray:
    """Agents reporting symptoms today, sorted by id.

    ``reporting`` is the per-locality reporting probability vector; the draw
    is an independent per-agent per-day Bernoulli.  Agents with a prior
    positive are excluded — once detected, they are out of the testing game.
    """
    symptomatic = np.nonzero(
        (covid == CovidState.INFECTIOUS) | (flu == FluState.ILL)
    )[0]
    if len(symptomatic) == 0:
        return symptomatic
    u = rng.uniforms(keys.reporting, symptomatic)
    reported = u < reporting[home[symptomatic]]
    pool = symptomatic[reported]
    return pool[~history.ever_positive[pool]]


def select_rst(pool: np.ndarray, budget: int, stream: Stream) -> np.ndarray:
    """Uniform subset of min(budget, |pool|) without replacement."""
    return sample_without_replacement(pool, budget, stream)


def traced_contacts(history: TestingHistory, roster: "Roster", day: int) -> np.ndarray:
    """Fixed contacts (both circles) of agents positive in the recent past."""
    seeds: list[np.ndarray] = []
    for back in range(1, CT_LOOKBACK_DAYS + 1):
        if day - back >= 1:
            seeds.append(history.positives_on(day - back))
    if not seeds:
        return np.empty(0, dtype=np.int64)
    recent = np.concatenate(seeds)
    if len(recent) == 0:
        return np.empty(0, dtype=np.int64)
    lists = [roster.fixed_contacts(int(a)) for a in recent]
    return np.unique(np.concatenate(lists)).astype(np.int64)


def select_ct(
    pool: np.ndarray,
    history: TestingHistory,
    roster: "Roster",
    budget: int,
    day: int,
    stream: Stream,
) -> np.ndarray:
    """Traced symptomatic contacts first; top up uniformly from the rest.

    The traced set C is the pool members who are fixed contacts of agents
    positive on day-1 or day-2.  With more traced contacts than budget, all
    tests go to a uniform subset of C; otherwise C is taken whole and the
    remainder of the budget is sampled uniformly from pool minus C.
    """
    contacts = traced_contacts(history, roster, day)
    c = np.intersect1d(contacts, pool)
    if len(c) >= budget:
        return sample_without_replacement(c, budget, stream)
    rest = np.setdiff1d(pool, c)
    extra = sample_without_replacement(rest, budget - len(c), stream)
    return np.concatenate([c, extra]).astype(pool.dtype, copy=False)


@dataclass
class ScoreTables:
    """Running per-locality and per-visit-place positive-case scores.

    After advancing to day t the tables equal the amplified sums over all
    positives recorded strictly before t: a case from day tau contributes its
    weight times (1 + amplification)^(t-1-tau).
    """

    locality: np.ndarray
    visit: np.ndarray
    day: int = 1

    @classmethod
    def zeros(cls, n_localities: int, n_destinations: int) -> "ScoreTables":
        return cls(np.zeros(n_localities), np.zeros(n_destinations), day=1)

    def advance_to(
        self,
        day: int,
        history: TestingHistory,
        home: np.ndarray,
        visit_slot: np.ndarray,
        params: LbtParams,
    ) -> None:
        """Incrementally fold in days [self.day, day); O(1) days per call."""
        if day < self.day:
            raise ValueError("score tables cannot rewind")
        growth = 1.0 + params.daily_amplification
        while self.day < day:
            positives = history.positives_on(self.day)
            self.locality *= growth
            self.visit *= growth
            if len(positives):
                self.locality += params.locality_case_weight * np.bincount(
                    home[positives], minlength=len(self.locality)
                )
                slots = visit_slot[positives]
                slots = slots[slots >= 0]
                if len(slots):
                    self.visit += params.visit_case_weight * np.bincount(
                        slots, minlength=len(self.visit)
                    )
            self.day += 1


def update_scores(
    tables: ScoreTables,
    history: TestingHistory,
    day: int,
    home: np.ndarray,
    visit_slot: np.ndarray,
    params: LbtParams,
) -> ScoreTables:
    """Bring tables current for selecting on ``day`` (folds in day-1)."""
    tables.advance_to(day, history, home, visit_slot, params)
    return tables


def get_score(
    agent: int,
    tables: ScoreTables,
    home: np.ndarray,
    visit_slot: np.ndarray,
    params: LbtParams,
) -> float:
    """Risk score: visit-place score plus blended home-locality score."""
    slot = int(visit_slot[agent])
    visit_score = float(tables.visit[slot]) if slot >= 0 else 0.0
    return visit_score + params.locality_blend * float(tables.locality[home[agent]])


def scores_for(
    agents: np.ndarray,
    tables: ScoreTables,
    home: np.ndarray,
    visit_slot: np.ndarray,
    params: LbtParams,
) -> np.ndarray:
    slots = visit_slot[agents]
    visit_score = np.where(slots >= 0, tables.visit[np.maximum(slots, 0)], 0.0)
    return visit_score + params.locality_blend * tables.locality[home[agents]]


def select_lbt(
    pool: np.ndarray,
    tables: ScoreTables,
    budget: int,
    params: LbtParams,
    home: np.ndarray,
    visit_slot: np.ndarray,
    stream: Stream,
) -> np.ndarray:
    """Score-weighted sampling without replacement (plus the baseline floor)."""
    if len(pool) == 0 or budget <= 0:
        return pool[:0]
    weights = scores_for(pool, tables, home, visit_slot, params) + params.baseline_weight
    return weighted_sample_without_replacement(pool, weights, budget, stream)


@dataclass
class DayTesting:
    """Outcome of one day's testing step."""

    pool: np.ndarray
    tested: np.ndarray      # sorted
    results: np.ndarray     # aligned with tested
    positives: np.ndarray = field(init=False)

    def __post_init__(self):
        self.positives = self.tested[self.results == 1]


def run_policy(
    policy: str,
    *,
    covid: np.ndarray,
    flu: np.ndarray,
    home: np.ndarray,
    visit_slot: np.ndarray,
    roster: "Roster",
    reporting: np.ndarray,
    history: TestingHistory,
    tables: ScoreTables | None,
    budget: int,
    fn_rate: float,
    lbt_params: LbtParams,
    keys: DayKeys,
) -> DayTesting:
    """One full testing step: pool, selection, tests, history record.

    ``policy`` is one of "rst", "ct", "lbt", "none".  The selection stream is
    keyed by the day alone, so policies that fall back to uniform sampling
    coincide draw-for-draw with RST.
    """
    pool = build_pool(covid, flu, home, reporting, history, keys)
    stream = Stream(keys.selection)
    if policy == "none" or budget <= 0:
        selected = pool[:0]
    elif policy == "rst":
        selected = select_rst(pool, budget, stream)
    elif policy == "ct":
        selected = select_ct(pool, history, roster, budget, keys.day, stream)
    elif policy == "lbt":
        if tables is None:
            raise ValueError("lbt needs score tables")
        update_scores(tables, history, keys.day, home, visit_slot, lbt_params)
        selected = select_lbt(pool, tables, budget, lbt_params, home, visit_slot, stream)
    else:
        raise ValueError(f"unknown policy {policy!r}")

    selected = np.sort(np.asarray(selected, dtype=np.int64))
    results = run_tests(covid, selected, fn_rate, keys)
    history.record_day(keys.day, selected, results)
    return DayTesting(pool=pool, tested=selected, results=results)
