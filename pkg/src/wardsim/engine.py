"""Run orchestration: configs, seeding, the daily loop, and batches.

Each simulated day runs test -> intervene -> evolve: the policy tests up to
its budget against day-start states, interventions update from the recorded
history (taking effect the next day), and the epidemic advances under the
restrictions already in force.  Everything is a pure function of
(config, master seed); batch member k runs under a child key derived from
(master seed, k), so paired-seed comparisons across configs line up and
parallel execution cannot change results.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import intervention as iv
from . import rng, testing
from .city import CityModel, Roster, build_roster, generate_grid_city, load_city
from .epidemic import CovidState, DayKeys, FluState, SimParams, advance_day, day_keys
from .rng import Key
from .testing import LbtParams, ScoreTables, TestingHistory

log = logging.getLogger(__name__)

POLICIES = ("rst", "ct", "lbt", "none")
INTERVENTIONS = ("none", "quarantine", "lockdown-indefinite", "lockdown-fixed")

# Canonical column order for outputs; report.py mirrors it.
SERIES = (
    "ground_truth_active",
    "new_infections",
    "cumulative",
    "positives",
    "tests",
    "symptomatic_reported",
    "lockdown",
    "quarantined",
)


class ConfigError(ValueError):
    """Raised for malformed run configurations, before any simulation."""


def _one_of(section: dict, allowed: tuple[str, ...], what: str) -> str:
    if not isinstance(section, dict) or len(section) != 1:
        raise ConfigError(f"{what} must be an object with exactly one of {allowed}")
    (kind,) = section.keys()
    if kind not in allowed:
        raise ConfigError(f"unknown {what} scheme {kind!r} (allowed: {allowed})")
    return kind


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; JSON schema documented in the README."""

    city: dict = field(default_factory=lambda: {"grid": {"rows": 3, "cols": 3}})
    n: int = 1000
    params: SimParams = field(default_factory=SimParams)
    policy: str = "rst"
    lbt: LbtParams = field(default_factory=LbtParams)
    intervention: str = "none"
    trigger: iv.TriggerParams = field(default_factory=iv.TriggerParams)
    seeding: dict = field(default_factory=lambda: {"clustered": {"locality": 0, "count": 10}})
    reporting: dict = field(default_factory=lambda: {"uniform": {"prob": 1.0}})
    master_seed: int = 0
    runs: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {
            "city", "n", "params", "policy", "lbt", "intervention", "trigger",
            "seeding", "reporting", "master_seed", "runs",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            params = SimParams(**raw.get("params", {}))
            lbt = LbtParams(**raw.get("lbt", {}))
            trigger = iv.TriggerParams(**raw.get("trigger", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg = cls(
            city=raw.get("city", {"grid": {"rows": 3, "cols": 3}}),
            n=int(raw.get("n", 1000)),
            params=params,
            policy=raw.get("policy", "rst"),
            lbt=lbt,
            intervention=raw.get("intervention", "none"),
            trigger=trigger,
            seeding=raw.get("seeding", {"clustered": {"locality": 0, "count": 10}}),
            reporting=raw.get("reporting", {"uniform": {"prob": 1.0}}),
            master_seed=int(raw.get("master_seed", 0)),
            runs=int(raw.get("runs", 1)),
        )
        cfg.validate()
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return {
            "city": self.city,
            "n": self.n,
            "params": asdict(self.params),
            "policy": self.policy,
            "lbt": asdict(self.lbt),
            "intervention": self.intervention,
            "trigger": asdict(self.trigger),
            "seeding": self.seeding,
            "reporting": self.reporting,
            "master_seed": self.master_seed,
            "runs": self.runs,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def validate(self) -> None:
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}")
        if self.intervention not in INTERVENTIONS:
            raise ConfigError(f"intervention must be one of {INTERVENTIONS}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.params.days < 1:
            raise ConfigError("params.days must be >= 1")
        _one_of(self.city, ("file", "grid"), "city")
        kind = _one_of(self.seeding, ("clustered", "uniform"), "seeding")
        spec = self.seeding[kind]
        if kind == "clustered":
            if spec.get("count", -1) < 0 or "locality" not in spec:
                raise ConfigError("clustered seeding needs locality and count >= 0")
        else:
            if spec.get("trials", -1) < 0 or not 0 <= spec.get("prob", -1) <= 1:
                raise ConfigError("uniform seeding needs trials >= 0 and prob in [0, 1]")
        kind = _one_of(self.reporting, ("uniform", "nonuniform"), "reporting")
        spec = self.reporting[kind]
        if kind == "uniform":
            if not 0 <= spec.get("prob", -1) <= 1:
                raise ConfigError("uniform reporting needs prob in [0, 1]")
        else:
            ok = (
                0 <= spec.get("fraction", -1) <= 1
                and 0 <= spec.get("low", -1) <= 1
                and 0 <= spec.get("high", -1) <= 1
                and "seed" in spec
            )
            if not ok:
                raise ConfigError(
                    "nonuniform reporting needs fraction, low, high in [0, 1] and a seed"
                )
        if self.intervention == "lockdown-fixed" and self.trigger.lockdown_days is None:
            raise ConfigError("lockdown-fixed needs trigger.lockdown_days")


def build_city(config: RunConfig, base_dir: str | None = None) -> CityModel:
    kind = _one_of(config.city, ("file", "grid"), "city")
    if kind == "file":
        path = config.city["file"]
        if base_dir is not None:
            import os

            path = os.path.join(base_dir, path) if not os.path.isabs(path) else path
        return load_city(path)
    grid = dict(config.city["grid"])
    return generate_grid_city(
        rows=grid.pop("rows"),
        cols=grid.pop("cols"),
        weight_fn=grid.pop("weights", "uniform"),
        seed=grid.pop("seed", 0),
        n_destinations=grid.pop("destinations", None),
        no_visit_prob=grid.pop("no_visit_prob", 0.4),
        gravity_scale=grid.pop("gravity_scale", None),
        id_base=grid.pop("id_base", 0),
    )


# ---------------------------------------------------------------------------
# Seeding and reporting
# ---------------------------------------------------------------------------


def seed_clustered(
    covid: np.ndarray, roster: Roster, city: CityModel, locality: int, count: int, key: Key
) -> None:
    """Set ``count`` distinct residents of one locality (external id) infectious."""
    residents = roster.residents(city.index_of(locality))
    if count > len(residents):
        log.warning(
            "locality %s has %d residents < %d seeds; infecting all",
            locality,
            len(residents),
            count,
        )
        count = len(residents)
    chosen = rng.sample_without_replacement(residents, count, key.stream(1))
    covid[chosen] = CovidState.INFECTIOUS


def seed_uniform(
    covid: np.ndarray, roster: Roster, trials: int, prob: float, key: Key
) -> None:
    """Give each locality an independent Binomial(trials, prob) seed count."""
    n_loc = len(roster.locality_indptr) - 1
    for loc in range(n_loc):
        hits = sum(
            1 for j in range(trials) if key.bernoulli(prob, 1, loc, j)
        )
        if hits == 0:
            continue
        residents = roster.residents(loc)
        chosen = rng.sample_without_replacement(
            residents, min(hits, len(residents)), key.stream(2, loc)
        )
        covid[chosen] = CovidState.INFECTIOUS


def resolve_reporting(reporting: dict, n_localities: int) -> np.ndarray:
    """Per-locality reporting probability vector from the config section."""
    kind = _one_of(reporting, ("uniform", "nonuniform"), "reporting")
    spec = reporting[kind]
    if kind == "uniform":
        return np.full(n_localities, float(spec["prob"]))
    k = int(spec["fraction"] * n_localities)
    stream = Key.from_seed(int(spec["seed"])).stream(rng.REPORTING_SPLIT)
    low_set = rng.sample_without_replacement(
        np.arange(n_localities, dtype=np.int64), k, stream
    )
    rho = np.full(n_localities, float(spec["high"]))
    rho[low_set] = float(spec["low"])
    return rho


# ---------------------------------------------------------------------------
# Outputs
# ---------------------------------------------------------------------------


@dataclass
class RunOutput:
    """Daily series plus per-locality counts for one run."""

    days: int
    locality_ids: np.ndarray
    series: dict[str, np.ndarray]        # SERIES -> int64[days]
    loc_active: np.ndarray               # int64[days, L], infectious at day start
    loc_positives: np.ndarray            # int64[days, L], positives by home
    config_digest: str
    master_seed: int
    run_index: int


@dataclass
class BatchOutput:
    """Per-day mean and standard deviation over independent runs (ddof=0)."""

    days: int
    locality_ids: np.ndarray
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    loc_active_mean: np.ndarray
    loc_active_std: np.ndarray
    loc_positives_mean: np.ndarray
    loc_positives_std: np.ndarray
    runs: int
    config_digest: str
    master_seed: int
    run_outputs: list[RunOutput] = field(default_factory=list)


@dataclass
class DebugTrace:
    """Per-day snapshots for invariant checks (small runs only)."""

    covid_start: list[np.ndarray] = field(default_factory=list)
    flu_start: list[np.ndarray] = field(default_factory=list)
    restricted: list[np.ndarray] = field(default_factory=list)
    pools: list[np.ndarray] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

_roster_cache: dict[tuple, Roster] = {}
_ROSTER_CACHE_MAX = 8


def _cached_roster(city: CityModel, n: int, params: SimParams, seed: int) -> Roster:
    key = (
        city.fingerprint(),
        n,
        params.neighborhood_fixed_contacts,
        params.workplace_fixed_contacts,
        seed,
    )
    roster = _roster_cache.get(key)
    if roster is None:
        roster = build_roster(city, n, params, seed)
        if len(_roster_cache) >= _ROSTER_CACHE_MAX:
            _roster_cache.pop(next(iter(_roster_cache)))
        _roster_cache[key] = roster
    return roster


class Simulation:
    """A single stepped run; drive with ``step()`` or ``run()``.

    State is inspectable between days, which the test suite leans on.  The
    roster is immutable and shared; covid/flu/quarantine arrays belong to
    this instance.
    """

    def __init__(
        self,
        config: RunConfig,
        run_index: int = 0,
        city: CityModel | None = None,
        base_dir: str | None = None,
        record_states: bool = False,
    ):
        config.validate()
        self.config = config
        self.run_index = run_index
        self.city = city if city is not None else build_city(config, base_dir)
        self.run_key = Key.from_seed(config.master_seed).child(rng.RUN_INDEX, run_index)
        self.roster = _cached_roster(
            self.city, config.n, config.params, self.run_key.child(rng.ROSTER).state
        )
        n = config.n
        self.covid = np.full(n, CovidState.SUSCEPTIBLE, dtype=np.int8)
        self.flu = np.full(n, FluState.SUSCEPTIBLE, dtype=np.int8)
        self.quarantined_until = np.zeros(n, dtype=np.int64)
        self.history = TestingHistory(n, config.params.days)
        self.tables = (
            ScoreTables.zeros(self.city.n_localities, self.city.n_destinations)
            if config.policy == "lbt"
            else None
        )
        self.controller = None
        if config.intervention in ("lockdown-indefinite", "lockdown-fixed"):
            mode = "indefinite" if config.intervention.endswith("indefinite") else "fixed"
            self.controller = iv.LockdownController(mode=mode, params=config.trigger)
        self.reporting = resolve_reporting(config.reporting, self.city.n_localities)
        self.day = 0
        self.debug = DebugTrace() if record_states else None

        seed_key = self.run_key.child(rng.SEED_INFECTION)
        kind = _one_of(config.seeding, ("clustered", "uniform"), "seeding")
        spec = config.seeding[kind]
        if kind == "clustered":
            seed_clustered(
                self.covid, self.roster, self.city, spec["locality"], spec["count"], seed_key
            )
        else:
            seed_uniform(self.covid, self.roster, spec["trials"], spec["prob"], seed_key)

        # the flu confounder starts at its stationary prevalence so the
        # symptomatic pool is noisy from day one
        p = config.params
        stationary_ill = (1.0 / p.flu_onset_days) / (
            1.0 / p.flu_onset_days + 1.0 / p.flu_recovery_days
        )
        ill = rng.uniforms(
            self.run_key.child(rng.FLU_INIT).state, np.arange(n)
        ) < stationary_ill
        self.flu[ill] = FluState.ILL

        self._rows: list[dict[str, int]] = []
        self._loc_active: list[np.ndarray] = []
        self._loc_positives: list[np.ndarray] = []

    def keys_for(self, day: int) -> DayKeys:
        return day_keys(self.run_key, day)

    def restrictions_for(self, day: int) -> iv.RestrictionView:
        locked = self.controller.is_locked(day) if self.controller else False
        return iv.RestrictionView(
            day=day, lockdown=locked, quarantined_until=self.quarantined_until
        )

    def step(self) -> None:
        """Advance one day: test, intervene, evolve, record."""
        cfg = self.config
        day = self.day + 1
        if day > cfg.params.days:
            raise RuntimeError("run horizon exhausted")
        keys = self.keys_for(day)
        # today's restrictions are whatever was in force before today's tests
        restrictions = self.restrictions_for(day)
        quarantined_today = restrictions.quarantined_count
        if self.debug is not None:
            self.debug.covid_start.append(self.covid.copy())
            self.debug.flu_start.append(self.flu.copy())
            self.debug.restricted.append(restrictions.restricted_mask())

        outcome = testing.run_policy(
            cfg.policy,
            covid=self.covid,
            flu=self.flu,
            home=self.roster.home,
            visit_slot=self.roster.visit_slot,
            roster=self.roster,
            reporting=self.reporting,
            history=self.history,
            tables=self.tables,
            budget=cfg.params.daily_test_budget,
            fn_rate=cfg.params.false_negative_rate,
            lbt_params=cfg.lbt,
            keys=keys,
        )
        if self.debug is not None:
            self.debug.pools.append(outcome.pool.copy())

        if cfg.intervention == "quarantine":
            iv.quarantine_update(
                self.quarantined_until,
                outcome.positives,
                self.roster,
                day,
                cfg.trigger.quarantine_days,
            )
        if self.controller is not None:
            self.controller.update(self.history, day)

        delta = advance_day(
            self.covid,
            self.flu,
            self.roster,
            self.city.n_localities,
            cfg.params,
            keys,
            restrictions.active_mask(),
        )

        self._rows.append(
            {
                "ground_truth_active": delta.active_start,
                "new_infections": delta.new_infections,
                "cumulative": cfg.n - delta.covid_counts[0],
                "positives": len(outcome.positives),
                "tests": len(outcome.tested),
                "symptomatic_reported": len(outcome.pool),
                "lockdown": int(restrictions.lockdown),
                "quarantined": quarantined_today,
            }
        )
        self._loc_active.append(delta.locality_active_start)
        self._loc_positives.append(
            np.bincount(
                self.roster.home[outcome.positives], minlength=self.city.n_localities
            ).astype(np.int64)
        )
        self.day = day

    def run(self) -> RunOutput:
        while self.day < self.config.params.days:
            self.step()
        return self.output()

    def output(self) -> RunOutput:
        series = {
            name: np.array([row[name] for row in self._rows], dtype=np.int64)
            for name in SERIES
        }
        return RunOutput(
            days=self.day,
            locality_ids=self.city.locality_ids,
            series=series,
            loc_active=np.vstack(self._loc_active) if self._loc_active else np.zeros((0, self.city.n_localities), dtype=np.int64),
            loc_positives=np.vstack(self._loc_positives) if self._loc_positives else np.zeros((0, self.city.n_localities), dtype=np.int64),
            config_digest=self.config.digest(),
            master_seed=self.config.master_seed,
            run_index=self.run_index,
        )


def run_simulation(
    config: RunConfig,
    run_index: int = 0,
    city: CityModel | None = None,
    base_dir: str | None = None,
) -> RunOutput:
    """One deterministic run under child key (master_seed, run_index)."""
    return Simulation(config, run_index, city=city, base_dir=base_dir).run()


def _run_for_pool(args: tuple) -> RunOutput:
    config_dict, run_index, base_dir = args
    return run_simulation(RunConfig.from_dict(config_dict), run_index, base_dir=base_dir)


def run_batch(
    config: RunConfig,
    threads: int = 1,
    base_dir: str | None = None,
    city: CityModel | None = None,
) -> BatchOutput:
    """``config.runs`` independent runs, aggregated per day (mean, ddof=0 std).

    ``threads`` > 1 fans runs out to worker processes; results are identical
    at any thread count because each run is keyed by its index alone.
    """
    config.validate()
    if threads > 1 and config.runs > 1:
        jobs = [(config.to_dict(), i, base_dir) for i in range(config.runs)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(_run_for_pool, jobs))
    else:
        shared_city = city if city is not None else build_city(config, base_dir)
        outs = [
            run_simulation(config, i, city=shared_city) for i in range(config.runs)
        ]
    return aggregate_runs(outs, config)


def aggregate_runs(outs: list[RunOutput], config: RunConfig) -> BatchOutput:
    mean: dict[str, np.ndarray] = {}
    std: dict[str, np.ndarray] = {}
    for name in SERIES:
        stack = np.vstack([o.series[name] for o in outs]).astype(np.float64)
        mean[name] = stack.mean(axis=0)
        std[name] = stack.std(axis=0, ddof=0)
    la = np.stack([o.loc_active for o in outs]).astype(np.float64)
    lp = np.stack([o.loc_positives for o in outs]).astype(np.float64)
    return BatchOutput(
        days=outs[0].days,
        locality_ids=outs[0].locality_ids,
        mean=mean,
        std=std,
        loc_active_mean=la.mean(axis=0),
        loc_active_std=la.std(axis=0, ddof=0),
        loc_positives_mean=lp.mean(axis=0),
        loc_positives_std=lp.std(axis=0, ddof=0),
        runs=len(outs),
        config_digest=config.digest(),
        master_seed=config.master_seed,
        run_outputs=outs,
    )
