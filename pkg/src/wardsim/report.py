"""Post-processing and CSV export.

Exports are bit-exact: UTF-8, header row, ``\\n`` line endings, integers
plain, floats in shortest round-trip form.  Re-exporting the same output
yields identical bytes.

The ground-truth estimator scales the day's reported-symptomatic count by
the positive rate among tests (positives / tests), i.e. it treats the tested
sample as representative of the symptomatic pool; it is 0 on days without
tests.
"""

from __future__ import annotations

import csv

import numpy as np

from .engine import SERIES, BatchOutput, RunOutput

GEO_WINDOW = 8  # days of positives summed in the geo export


def smooth_series(series: np.ndarray, window: int) -> np.ndarray:
    """Trailing mean with partial windows at the start; length-preserving."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=np.float64)
    cum = np.concatenate([[0.0], np.cumsum(x)])
    t = np.arange(1, len(x) + 1)
    first = np.maximum(t - window, 0)
    return (cum[t] - cum[first]) / (t - first)


def window_sum(series_2d: np.ndarray, window: int) -> np.ndarray:
    """Trailing sum over the last ``window`` days, per column, partial at start."""
    x = np.asarray(series_2d, dtype=np.float64)
    cum = np.concatenate([np.zeros((1, x.shape[1])), np.cumsum(x, axis=0)])
    t = np.arange(1, x.shape[0] + 1)
    first = np.maximum(t - window, 0)
    return cum[t] - cum[first]


def estimate_ground_truth(symptomatic_reported: float, positives: float, tests: float) -> float:
    """Estimated true case count: reported symptomatic x (positives / tests)."""
    if tests < 0:
        raise ValueError("tests must be >= 0")
    if tests == 0:
        return 0.0
    return symptomatic_reported * positives / tests


def estimate_ground_truth_series(out: RunOutput) -> np.ndarray:
    """The estimator applied day by day to one run's recorded series."""
    sym = out.series["symptomatic_reported"].astype(np.float64)
    pos = out.series["positives"].astype(np.float64)
    tests = out.series["tests"].astype(np.float64)
    est = np.zeros(out.days)
    nz = tests > 0
    est[nz] = sym[nz] * pos[nz] / tests[nz]
    return est


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_rows(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def write_timeseries_csv(output: RunOutput | BatchOutput, path: str) -> None:
    """Daily series; batches get a _mean/_std column pair per series."""
    if isinstance(output, RunOutput):
        header = ["day", *SERIES]
        rows = (
            [day + 1, *(output.series[name][day] for name in SERIES)]
            for day in range(output.days)
        )
    else:
        header = ["day"]
        for name in SERIES:
            header += [f"{name}_mean", f"{name}_std"]
        def batch_rows():
            for day in range(output.days):
                row: list = [day + 1]
                for name in SERIES:
                    row += [output.mean[name][day], output.std[name][day]]
                yield row
        rows = batch_rows()
    _write_rows(path, header, rows)


def write_geo_csv(output: RunOutput | BatchOutput, path: str) -> None:
    """Per-day, per-locality infectious counts and recent-positive windows."""
    if isinstance(output, RunOutput):
        win = window_sum(output.loc_positives, GEO_WINDOW)
        header = ["day", "locality", "active_I", f"positives_last_{GEO_WINDOW}_days"]
        def run_rows():
            for day in range(output.days):
                for k, loc in enumerate(output.locality_ids):
                    yield [day + 1, int(loc), int(output.loc_active[day, k]), int(win[day, k])]
        rows = run_rows()
    else:
        wins = np.stack(
            [window_sum(o.loc_positives, GEO_WINDOW) for o in output.run_outputs]
        )
        win_mean = wins.mean(axis=0)
        win_std = wins.std(axis=0, ddof=0)
        header = [
            "day",
            "locality",
            "active_I_mean",
            "active_I_std",
            f"positives_last_{GEO_WINDOW}_days_mean",
            f"positives_last_{GEO_WINDOW}_days_std",
        ]
        def batch_rows():
            for day in range(output.days):
                for k, loc in enumerate(output.locality_ids):
                    yield [
                        day + 1,
                        int(loc),
                        output.loc_active_mean[day, k],
                        output.loc_active_std[day, k],
                        win_mean[day, k],
                        win_std[day, k],
                    ]
        rows = batch_rows()
    _write_rows(path, header, rows)


def write_compare_csv(labels: list[str], batches: list[BatchOutput], path: str) -> None:
    """Side-by-side batch series, one column group per labelled config."""
    if len(labels) != len(batches):
        raise ValueError("one label per batch")
    days = batches[0].days
    if any(b.days != days for b in batches):
        raise ValueError("batches cover different horizons")
    header = ["day"]
    for label in labels:
        for name in SERIES:
            header += [f"{label}_{name}_mean", f"{label}_{name}_std"]
    def rows():
        for day in range(days):
            row: list = [day + 1]
            for b in batches:
                for name in SERIES:
                    row += [b.mean[name][day], b.std[name][day]]
            yield row
    _write_rows(path, header, rows())
