"""Command-line front end: configuration, persistence, reproducibility.

Every run writes a per-size CSV (stable column set), a JSON run record,
and a manifest carrying the spec hash, seed and timestamps.  Re-running
the same subcommand with the same seed reproduces the CSV and record
byte for byte; only the manifest's timestamps differ.  Exit codes:
0 success, 2 configuration error, 3 resource-budget error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .errors import ConfigurationError, DomainError, ResourceLimitError
from .experiments import (
    KINDS,
    ExperimentSpec,
    RunRecord,
    parallelism,
    run_experiment,
)
from .lattice import sample_walk
from .tsp import box_tsp_diluted, exact_tsp, load_point_set, strip_heuristic
from .experiments import resolve_walk

CSV_HEADER = "kind,n,trials,mean,std_err,statistic,lo99,hi99,seed"

_SUBCOMMAND_KINDS = {
    "alpha": "alpha",
    "alpha-s": "alpha_s",
    "drift": "drift",
    "range": "range_lln",
    "boundary": "boundary_lln",
    "flatto": "flatto",
    "good-update": "good_update",
    "oned-dist": "oned_dist",
    "oned-const": "oned_constants",
    "local-time": "local_time",
}


class _CliParser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"error: config: {message}\n")
        raise SystemExit(2)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_csv(record: RunRecord, path: Path) -> None:
    lines = [CSV_HEADER]
    for r in record.rows:
        lines.append(
            ",".join(
                [
                    record.kind,
                    str(r.n),
                    str(r.trials),
                    _fmt(r.mean),
                    _fmt(r.std_err),
                    _fmt(r.statistic),
                    _fmt(r.lo99),
                    _fmt(r.hi99),
                    str(record.seed),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def write_manifest(out_dir: Path, spec_hash: str, seed: int, started: float,
                   files: list[str]) -> None:
    manifest = {
        "tool": "lamptsp",
        "version": __version__,
        "spec_hash": spec_hash,
        "seed": seed,
        "started_at": started,
        "finished_at": time.time(),
        "outputs": sorted(files),
        "parallelism": parallelism(),
        "deterministic": True,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (default 0)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sizes", type=str, default=None, help="comma list, increasing")
    p.add_argument("--p", type=float, default=None, help="dilution keep probability")
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--a", type=float, default=None, help="fair-component weight")
    p.add_argument("--walk", type=str, default=None)
    p.add_argument("--solver", choices=("exact", "strip", "box"), default=None)
    p.add_argument("--box-side", type=int, default=None)
    p.add_argument("--alpha-exp", type=float, default=None)
    p.add_argument("--out", type=str, default="out")
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument(
        "--validate", action="store_true", help="print the normalized spec and exit"
    )


_SPEC_DEFAULTS = {
    "alpha": {"sizes": (16, 32, 64, 128), "trials": 40, "p": 0.5},
    "alpha_s": {"sizes": (16, 32, 64), "trials": 40, "p": 0.5},
    "drift": {"sizes": (4096, 65536), "trials": 10, "walk": "srw2d"},
    "range_lln": {"sizes": (16384, 65536, 262144, 1048576), "trials": 50},
    "boundary_lln": {"sizes": (16384, 65536, 262144, 1048576), "trials": 50},
    "flatto": {"sizes": (262144, 1048576), "trials": 50, "q": 1},
    "good_update": {"sizes": (131072,), "trials": 50, "a": 0.5, "q": 10},
    "oned_dist": {"sizes": (65536,), "trials": 2000, "walk": "srw1d"},
    "oned_constants": {"sizes": (256, 1024, 4096), "trials": 50},
    "local_time": {"sizes": (262144, 1048576), "trials": 50},
}


def build_spec(kind: str, args: argparse.Namespace) -> ExperimentSpec:
    """Merge defaults, config file, and flags (flags win)."""
    payload: dict = dict(_SPEC_DEFAULTS.get(kind, {}))
    payload["kind"] = kind
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config file: {e}") from None
        allowed = set(ExperimentSpec.__dataclass_fields__)
        unknown = set(file_cfg) - allowed
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        payload.update(file_cfg)
    flag_map = {
        "seed": "seed",
        "trials": "trials",
        "p": "p",
        "q": "q",
        "a": "a",
        "walk": "walk",
        "solver": "solver",
        "box_side": "box_side",
        "alpha_exp": "alpha_exp",
    }
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            payload[key] = v
    if getattr(args, "sizes", None):
        try:
            payload["sizes"] = tuple(int(s) for s in args.sizes.split(","))
        except ValueError:
            raise ConfigurationError(f"bad --sizes value {args.sizes!r}") from None
    if "seed" not in payload or payload.get("seed") is None:
        sys.stderr.write("warning: config: no seed given, defaulting to 0\n")
        payload["seed"] = 0
    payload.setdefault("sizes", (64,))
    spec = ExperimentSpec(**payload)
    errors = spec.validate()
    if errors:
        raise ConfigurationError("; ".join(errors))
    return spec


def _run_experiment_command(kind: str, args: argparse.Namespace) -> int:
    spec = build_spec(kind, args)
    if args.validate:
        print(spec.canonical_json())
        return 0
    started = time.time()
    record = run_experiment(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{kind}.csv"
    json_path = out_dir / f"{kind}.json"
    write_csv(record, csv_path)
    json_path.write_text(record.to_json(include_timing=False) + "\n")
    write_manifest(
        out_dir, spec.spec_hash(), spec.seed, started, [csv_path.name, json_path.name]
    )
    print(f"{kind}: estimate={_fmt(record.estimate)} -> {csv_path}")
    return 0


def _run_tsp_command(args: argparse.Namespace) -> int:
    points = load_point_set(args.points)
    if args.solver == "exact":
        res = exact_tsp(points)
    elif args.solver == "strip":
        xs, ys = points.arrays()
        side = int(max(xs.max() - xs.min(), ys.max() - ys.min())) + 1
        res = strip_heuristic(points, side)
    else:
        res = box_tsp_diluted(points, points, max(2, args.box_side or 8))
    print(f"length={res.length} exact={res.exact}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "tour.csv"
        with open(path, "w") as fh:
            for x, y in res.order:
                fh.write(f"{x},{y}\n")
        print(f"tour -> {path}")
    return 0


def _run_walk_command(args: argparse.Namespace) -> int:
    dist = resolve_walk(args.walk or "srw2d")
    seed = args.seed if args.seed is not None else 0
    n = int(args.sizes.split(",")[-1]) if args.sizes else 1024
    traj = sample_walk(dist, n, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "walk.csv"
    with open(path, "w") as fh:
        for x, y in traj.positions:
            fh.write(f"{x},{y}\n")
    print(f"walk n={n} seed={seed} -> {path}")
    return 0


def main(argv=None) -> int:
    parser = _CliParser(prog="lamptsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_KINDS:
        p = sub.add_parser(name)
        _add_common(p)
    p_tsp = sub.add_parser("tsp", help="solve a point-set tour from CSV")
    p_tsp.add_argument("points", type=str, help="CSV of x,y lines")
    p_tsp.add_argument("--solver", choices=("exact", "strip", "box"), default="exact")
    p_tsp.add_argument("--box-side", type=int, default=None)
    p_tsp.add_argument("--out", type=str, default=None)
    p_walk = sub.add_parser("walk", help="dump a sampled trajectory")
    _add_common(p_walk)

    args = parser.parse_args(argv)
    try:
        if args.command == "tsp":
            return _run_tsp_command(args)
        if args.command == "walk":
            return _run_walk_command(args)
        return _run_experiment_command(_SUBCOMMAND_KINDS[args.command], args)
    except ConfigurationError as e:
        sys.stderr.write(f"error: config: {e}\n")
        return 2
    except DomainError as e:
        sys.stderr.write(f"error: domain: {e}\n")
        return 2
    except ResourceLimitError as e:
        sys.stderr.write(f"error: resource: {e}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
