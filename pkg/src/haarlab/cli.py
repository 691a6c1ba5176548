"""Command-line runner: one subcommand per verification experiment.

Artifacts go to ``--output-dir`` (or ``$HRL_OUTPUT_DIR``, default
``./hrl-out``): per subcommand a ``summary.json`` with
``{subcommand, params, pass, metrics, violations[]}`` plus one CSV per
result table.  Exit code 0 iff every enabled acceptance band passes,
2 on usage or config errors.  Runs are deterministic in the seed; the
same invocation writes byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, Config, ExperimentResult, run_experiment

_INT_KEYS = {"n", "J", "d", "lambda_max", "l_max", "seed", "threads"}
_FLOAT_KEYS = {"p", "q"}


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    values: dict = {}
    known = set(Config.keys())
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: cannot parse {raw!r}")
                key, val = parts
            key, val = key.strip(), val.strip()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            else:
                values[key] = val
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haarlab",
        description="dyadic-analysis verification experiments",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    names = sorted(EXPERIMENTS) + ["all"]
    for name in names:
        p = sub.add_parser(name, help=f"run the {name} experiment(s)")
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--n", type=int)
        p.add_argument("--J", type=int)
        p.add_argument("--p", type=float)
        p.add_argument("--q", type=float)
        p.add_argument("--d", type=int)
        p.add_argument("--lambda-max", dest="lambda_max", type=int)
        p.add_argument("--l-max", dest="l_max", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--threads", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> Config:
    """Precedence: flags > config file > defaults."""
    values: dict = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in Config.keys():
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "output_dir" not in values or values["output_dir"] is None:
        values["output_dir"] = os.environ.get("HRL_OUTPUT_DIR", "hrl-out")
    return Config(**values)


def _write_artifacts(result: ExperimentResult, out_root: Path) -> None:
    out_dir = out_root / result.subcommand
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(result.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, (header, rows) in result.tables.items():
        with open(out_dir / f"{name}.csv", "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(repr(x) if isinstance(x, float) else str(x)
                                  for x in row) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = resolve_config(args)
    except (ValueError, OSError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    names = sorted(EXPERIMENTS) if args.subcommand == "all" else [args.subcommand]
    out_root = Path(cfg.output_dir)
    all_pass = True
    combined = []
    for name in names:
        result = run_experiment(name, cfg)
        _write_artifacts(result, out_root)
        combined.append(result.summary())
        status = "pass" if result.passed else "FAIL"
        print(f"[{status}] {name}: {json.dumps(result.metrics, sort_keys=True, default=str)[:200]}")
        if not result.passed:
            all_pass = False
            for v in result.violations:
                print(f"    violation: {json.dumps(v, sort_keys=True, default=str)}")
    if args.subcommand == "all":
        with open(out_root / "summary.json", "w") as fh:
            json.dump({"pass": all_pass, "experiments": combined}, fh,
                      indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
