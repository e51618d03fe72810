"""Command-line front end: load sweeps and result summaries.

``eon-fdsp run --config demo.cfg`` writes ``<policy>_<failures>_blocking.csv``
per policy. ``eon-fdsp summarize DIR`` pairs the FDSP and FDFS files found in
DIR and writes the per-load percentage changes.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Sequence

from eon_fdsp.config import ConfigError, load_config, parse_loads
from eon_fdsp.experiments import iter_rows, run_replications
from eon_fdsp.metrics import PolicyRow, percent_change, percent_reduction
from eon_fdsp.simulation import PRIORITIES
from eon_fdsp.topology import TopologyError, bundled_topologies

log = logging.getLogger("eon_fdsp")

RESULT_HEADER = ["load", *(f"{m}_p{p}" for m in ("bb", "rr", "ht") for p in PRIORITIES), "arrival_bp", "reps"]
SUMMARY_HEADER = [
    "load",
    *(f"d_bb_p{p}" for p in PRIORITIES),
    *(f"d_ht_p{p}" for p in PRIORITIES),
    *(f"nodisrupt_p{p}" for p in PRIORITIES),
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.6f}"


def result_filename(policy: str, failures: int) -> str:
    return f"{policy}_{failures}_blocking.csv"


def write_results(path: Path, rows: Sequence[PolicyRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_HEADER)
        for r in rows:
            w.writerow(
                [_fmt(r.load)]
                + [_fmt(r.bb[p]) for p in PRIORITIES]
                + [_fmt(r.rr[p]) for p in PRIORITIES]
                + [_fmt(r.ht[p]) for p in PRIORITIES]
                + [_fmt(r.arrival_bp), str(r.reps)]
            )


def read_results(path: Path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [{k: float(v) for k, v in row.items()} for row in reader]


def summarize(fdsp_csv: Path, fdfs_csv: Path, out_csv: Path) -> Path:
    """Per-load BBP reduction and RHT change of FDSP against FDFS, in percent."""
    for p in (fdsp_csv, fdfs_csv):
        if not Path(p).is_file():
            raise FileNotFoundError(f"result file not found: {p}")
    a = {row["load"]: row for row in read_results(Path(fdsp_csv))}
    b = {row["load"]: row for row in read_results(Path(fdfs_csv))}
    if a.keys() != b.keys():
        raise ValueError(f"loads differ between {fdsp_csv} and {fdfs_csv}")
    with open(out_csv, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for load in sorted(a):
            x, y = a[load], b[load]
            w.writerow(
                [_fmt(load)]
                + [_fmt(percent_reduction(x[f"bb_p{p}"], y[f"bb_p{p}"])) for p in PRIORITIES]
                + [_fmt(percent_change(x[f"ht_p{p}"], y[f"ht_p{p}"])) for p in PRIORITIES]
                # a class with no disruption has bb = 0 and ht = 0 in both files
                + [str(int(x[f"ht_p{p}"] == 0 and y[f"ht_p{p}"] == 0)) for p in PRIORITIES]
            )
    return Path(out_csv)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eon-fdsp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a load sweep and write result CSVs")
    run.add_argument("--config", required=True, help="run configuration file")
    run.add_argument("--loads", help="comma list or start:stop:step of loads in Erlang")
    run.add_argument("--failures", type=int, help="number of failed links")
    run.add_argument("--reps", type=int, help="replications per load")
    run.add_argument("--seed", type=int)
    run.add_argument("--policy", choices=("fdsp", "fdfs", "both"))
    run.add_argument("--out", help="output directory")
    run.add_argument("--threads", type=int, help="worker processes (0: one per CPU)")
    run.add_argument("--validate-only", action="store_true", help="print the normalized config and exit")

    summ = sub.add_parser("summarize", help="compare FDSP against FDFS result files")
    summ.add_argument("fdsp_csv")
    summ.add_argument("fdfs_csv")
    summ.add_argument("-o", "--output", default="summary.csv")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    policies = None
    if args.policy:
        policies = ("fdsp", "fdfs") if args.policy == "both" else (args.policy,)
    config = config.with_overrides(
        loads=parse_loads(args.loads) if args.loads else None,
        failure_count=args.failures,
        replications=args.reps,
        seed=args.seed,
        policies=policies,
        output=args.out,
        threads=args.threads,
    ).validate()
    if not Path(config.topology).is_file() and config.topology not in bundled_topologies():
        raise ConfigError(f"topology file not found: {config.topology}")
    if args.validate_only:
        sys.stdout.write(config.to_text())
        return 0

    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = {p: out_dir / result_filename(p, config.failure_count) for p in config.policies}
    log.info("running %d loads x %d replications", len(config.loads), config.replications)
    written = []
    try:
        rows = run_replications(config).table()
        for policy, path in targets.items():
            write_results(path, iter_rows(rows, policy))
            written.append(path)
    except BaseException:
        for path in targets.values():
            path.unlink(missing_ok=True)
        raise
    for path in written:
        print(path)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "run":
            return _cmd_run(args)
        print(summarize(Path(args.fdsp_csv), Path(args.fdfs_csv), Path(args.output)))
        return 0
    except KeyboardInterrupt:
        print("interrupted; partial result files removed", file=sys.stderr)
        return 130
    except (ConfigError, TopologyError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
