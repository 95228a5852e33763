"""wardsim: agent-based epidemic simulation for testing-policy studies.

Simulates an epidemic with a flu-like confounder across a synthetic city,
applies budgeted testing policies (random symptomatic, contact tracing,
location-based), drives interventions (quarantine, lockdowns) from observed
positives, and emits deterministic time-series and per-locality outputs.
"""

from .city import (
    CityModel,
    Roster,
    build_roster,
    default_ward_city,
    generate_grid_city,
    load_city,
    neighborhood_residents,
    save_city,
)
from .engine import (
    BatchOutput,
    RunConfig,
    RunOutput,
    Simulation,
    run_batch,
    run_simulation,
)
from .epidemic import ContactEvent, CovidState, FluState, SimParams
from .intervention import LockdownController, RestrictionView, TriggerParams
from .kernels import BACKEND
from .testing import LbtParams, ScoreTables, TestingHistory

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BatchOutput",
    "CityModel",
    "ContactEvent",
    "CovidState",
    "FluState",
    "LbtParams",
    "LockdownController",
    "RestrictionView",
    "Roster",
    "RunConfig",
    "RunOutput",
    "ScoreTables",
    "SimParams",
    "Simulation",
    "TestingHistory",
    "TriggerParams",
    "build_roster",
    "default_ward_city",
    "generate_grid_city",
    "load_city",
    "neighborhood_residents",
    "run_batch",
    "run_simulation",
    "save_city",
    "__version__",
]
