"""Command-line interface.

Subcommands:
  run      execute a config's batch, write timeseries + geo CSVs and a
           resolved-config echo into --out
  gencity  write a grid city file usable as a run's city
  compare  run several configs that differ only in policy/intervention and
           merge their series side by side

All randomness flows from the configs' master seeds; the CLI never seeds
from the clock and never mutates its inputs.  --threads only parallelises
batch members and cannot change results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import report
from .city import CityError, generate_grid_city, save_city
from .engine import ConfigError, RunConfig, run_batch


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _find_key_path(tree: dict, key: str) -> list[str] | None:
    """Unique dotted path ending in ``key``; None if absent, error if ambiguous."""
    hits: list[list[str]] = []

    def walk(node, trail):
        if isinstance(node, dict):
            for k, v in node.items():
                if k == key:
                    hits.append(trail + [k])
                walk(v, trail + [k])

    walk(tree, [])
    if not hits:
        return None
    if len(hits) > 1:
        paths = [".".join(h) for h in hits]
        raise ConfigError(f"--set {key} is ambiguous; use one of {paths}")
    return hits[0]


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply repeatable --set key=value entries (dotted or unique bare keys)."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        path = key.split(".") if "." in key else (_find_key_path(raw, key) or key.split("."))
        node = raw
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {key}: {part} is not an object")
        node[path[-1]] = _parse_value(value)
    return raw


def _load_config(path: str, overrides: list[str]) -> tuple[RunConfig, str]:
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    raw = apply_overrides(raw, overrides)
    return RunConfig.from_dict(raw), os.path.dirname(os.path.abspath(path))


def cmd_run(args) -> int:
    config, base_dir = _load_config(args.config, args.set or [])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    batch = run_batch(config, threads=args.threads, base_dir=base_dir)
    report.write_timeseries_csv(batch, str(out_dir / "timeseries.csv"))
    report.write_geo_csv(batch, str(out_dir / "geo.csv"))
    with open(out_dir / "resolved_config.json", "w", encoding="utf-8", newline="") as f:
        json.dump(config.to_dict(), f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"wrote {out_dir / 'timeseries.csv'}, {out_dir / 'geo.csv'}, "
          f"{out_dir / 'resolved_config.json'}")
    return 0


def cmd_gencity(args) -> int:
    city = generate_grid_city(
        rows=args.rows,
        cols=args.cols,
        weight_fn=args.weights,
        seed=args.seed,
        n_destinations=args.destinations,
        no_visit_prob=args.no_visit_prob,
        gravity_scale=args.gravity_scale,
        id_base=args.id_base,
    )
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    save_city(city, str(out))
    print(f"wrote {out} ({city.n_localities} localities)")
    return 0


_POLICY_KEYS = {"policy", "lbt", "intervention", "trigger"}


def cmd_compare(args) -> int:
    configs = []
    labels = []
    for path in args.config:
        cfg, base_dir = _load_config(path, args.set or [])
        configs.append((cfg, base_dir))
        labels.append(Path(path).stem)
    if len(set(labels)) != len(labels):
        raise ConfigError("config file names must be distinct (they label columns)")
    shared = None
    for cfg, _ in configs:
        core = {k: v for k, v in cfg.to_dict().items() if k not in _POLICY_KEYS}
        if shared is None:
            shared = core
        elif core != shared:
            raise ConfigError(
                "compare configs may differ only in policy/intervention fields "
                f"({sorted(_POLICY_KEYS)})"
            )
    batches = [
        run_batch(cfg, threads=args.threads, base_dir=base_dir)
        for cfg, base_dir in configs
    ]
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    report.write_compare_csv(labels, batches, str(out))
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wardsim",
        description="Agent-based epidemic simulator for testing-policy studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a run config")
    p_run.add_argument("--config", required=True, help="run config JSON")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
    p_run.add_argument("--threads", type=int, default=1,
                       help="parallel batch workers (results identical at any value)")
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("gencity", help="generate a grid city file")
    p_gen.add_argument("--rows", type=int, required=True)
    p_gen.add_argument("--cols", type=int, required=True)
    p_gen.add_argument("--out", required=True, help="city JSON to write")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--weights", choices=["uniform", "random"], default="uniform")
    p_gen.add_argument("--destinations", type=int, default=None)
    p_gen.add_argument("--no-visit-prob", type=float, default=0.4)
    p_gen.add_argument("--gravity-scale", type=float, default=None)
    p_gen.add_argument("--id-base", type=int, default=0)
    p_gen.set_defaults(func=cmd_gencity)

    p_cmp = sub.add_parser("compare", help="merge batches of sibling configs")
    p_cmp.add_argument("--config", action="append", required=True,
                       help="run config JSON (repeat for each policy)")
    p_cmp.add_argument("--out", required=True, help="merged CSV to write")
    p_cmp.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override applied to every config (repeatable)")
    p_cmp.add_argument("--threads", type=int, default=1)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
