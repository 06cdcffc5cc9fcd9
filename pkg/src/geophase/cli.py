"""``geophase <experiment> --config <path> [--set key=value ...] [--out <dir>]``

Exit status: 0 on success, 2 on a configuration error, 3 when a numerical
precondition of the model is violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from geophase import __version__
from geophase.config import EXPERIMENTS, ConfigError, ExperimentConfig, expand_sweep, parse_override, resolve
from geophase.core import PreconditionError
from geophase.discrete import _write_rows
from geophase.experiments import EXPERIMENT_RUNNERS
from geophase.stochastic import RNG_ALGORITHM, SEED_RULE

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION = 0, 2, 3

log = logging.getLogger("geophase")


def dump_json(obj: Any, path: Path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    # a metadata.json from an earlier run can be fed back as the config
    if data.get("artifact") == "geophase" and "config" in data:
        data = data["config"]
    return data


def metadata(cfg: ExperimentConfig, overrides: list[tuple[str, Any]], n_points: int) -> dict:
    config = cfg.model_dump(mode="json")
    config.pop("output_dir")
    return {
        "artifact": "geophase",
        "version": __version__,
        "experiment": cfg.experiment,
        "config": config,
        "overrides": [{"key": k, "value": v} for k, v in overrides],
        "rng_algorithm": RNG_ALGORITHM,
        "seed_rule": SEED_RULE,
        "sweep_points": n_points,
    }


def run(cfg: ExperimentConfig, overrides: list[tuple[str, Any]] = ()) -> dict:
    """Run one experiment (or sweep) and write all outputs under ``cfg.output_dir``."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = EXPERIMENT_RUNNERS[cfg.experiment]
    points = expand_sweep(cfg)
    dump_json(metadata(cfg, list(overrides), len(points)), out / "metadata.json")
    if not cfg.sweep:
        stats = runner(cfg, out)
        dump_json(stats, out / "statistics.json")
        return stats
    keys = sorted(cfg.sweep)
    results = []
    for i, (point, point_cfg) in enumerate(points):
        point_dir = out / f"point_{i:03d}"
        point_dir.mkdir(exist_ok=True)
        stats = runner(point_cfg, point_dir)
        dump_json({"parameters": point, "statistics": stats}, point_dir / "statistics.json")
        results.append((point, stats))
    stat_keys = sorted({k for _, st in results for k, v in st.items() if not isinstance(v, (dict, list))})
    rows = [[_cell(p[k]) for k in keys] + [_cell(st.get(k)) for k in stat_keys] for p, st in results]
    _write_rows(out / "sweep.csv", ["point"] + keys + stat_keys, [[i] + row for i, row in enumerate(rows)])
    summary = {"points": [{"parameters": p, "statistics": st} for p, st in results]}
    dump_json(summary, out / "statistics.json")
    return summary


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geophase", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config file (defaults are used when omitted)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scalar field, e.g. market.r=0.2 or sweep.market.q=[0,0.1]")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"geophase {__version__}")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = load_config_file(args.config) if args.config else {}
        overrides = [parse_override(item) for item in args.overrides]
        if args.out is not None:
            overrides.append(("output_dir", args.out))
        cfg = resolve(args.experiment, file_cfg, overrides)
    except ConfigError as err:
        print(f"geophase: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        stats = run(cfg, [o for o in overrides if o[0] != "output_dir"])
    except PreconditionError as err:
        print(f"geophase: numerical precondition failed: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    log.info("wrote %s", cfg.output_dir)
    if args.verbose:
        print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
