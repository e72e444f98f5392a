"""Command line: ``configs``, ``pipeline``, ``verify`` and ``estimate``.

Exit codes: 0 success, 1 usage error, 2 data or consistency error,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import analysis
from .configgen import (ConfigRecord, classify_configurations, exclude_wilson, read_census,
                        write_census)
from .core import ConsistencyError, ResourceError, format_design
from .pipeline import (LEDGER_FIELDS, SUMMARY_FIELDS, Checkpoint, PipelineStats, ledger_rows,
                       read_ledger, read_summary, run_pipeline, summary_path)

log = logging.getLogger("steiner")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shard(text: str) -> tuple[int, int]:
    try:
        i, n = (int(x) for x in text.split("/"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shard must look like i/n, got {text!r}")
    if n < 1 or not 0 <= i < n:
        raise argparse.ArgumentTypeError(f"shard index must satisfy 0 <= i < n, got {text}")
    return i, n


def _threads() -> int:
    raw = os.environ.get("STEINER_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"STEINER_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError("STEINER_THREADS must be at least 1")
    return n


def stage_parameters(v: int) -> tuple[int, int]:
    """(m, r) of the configuration left when a subsystem of order 7 is removed from an STS(v)."""
    if v not in (15, 19, 21):
        raise UsageError("the pipeline supports v = 15, 19, 21")
    return v - 7, (v - 1) // 2 - 7


# --------------------------------------------------------------------------
# configs

def cmd_configs(args) -> int:
    if args.m is None or args.r is None or args.out is None:
        raise UsageError("configs needs --m, --r and --out")
    if args.m > 32 or args.m < 1 or args.r < 0:
        raise UsageError("need 1 <= m <= 32 and r >= 0")
    records = classify_configurations(args.m, args.r)
    if args.exclude_wilson:
        exclude_wilson(records)
    path = write_census(records, args.out, args.exclude_wilson)
    print(f"{len(records)} classes; manifest {path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# pipeline

def _process(job):
    index, record, v, cap, emit_dir = job
    stats = PipelineStats()
    designs = list(run_pipeline(record, v, cap, stats))
    if emit_dir:
        for seq, d in enumerate(designs):
            with open(os.path.join(emit_dir, f"design_{index:05d}_{seq:06d}.txt"), "w") as fh:
                fh.write(format_design(d.design))
    rows = list(ledger_rows(index, designs))
    summary = {"config_index": index, "aut_order": stats.group_order,
               "factorizations": stats.factorizations, "designs": len(designs),
               "complete": int(stats.complete)}
    return rows, summary


def _count_rows(path: str) -> int:
    if not os.path.exists(path):
        return 0
    with open(path, newline="") as fh:
        return max(sum(1 for _ in fh) - 1, 0)


def _truncate_rows(path: str, keep: int) -> None:
    with open(path, newline="") as fh:
        lines = fh.readlines()
    with open(path, "w", newline="") as fh:
        fh.writelines(lines[:keep + 1])


def _load_records(args, m: int, r: int) -> list[tuple[int, ConfigRecord]]:
    if args.manifest:
        pairs = read_census(args.manifest)
    else:
        if m == 14:
            raise UsageError("v = 21 needs --manifest (run `configs --m 14 --r 3` first)")
        pairs = list(enumerate(classify_configurations(m, r)))
    for _, rec in pairs:
        if rec.config.m != m or rec.config.r != r:
            raise ConsistencyError(f"manifest holds ({rec.config.m},{rec.config.r}) configurations, need ({m},{r})")
    if args.exclude_wilson or m == 14:
        pairs = [(i, rec) for i, rec in pairs if not rec.wilson_flag]
    return pairs


def cmd_pipeline(args) -> int:
    if args.v is None or args.out is None:
        raise UsageError("pipeline needs --v and --out")
    m, r = stage_parameters(args.v)
    shard_i, shard_n = args.shard
    threads = _threads()
    pairs = [(i, rec) for i, rec in _load_records(args, m, r) if i % shard_n == shard_i]
    ledger, summary = args.out, summary_path(args.out)
    shard_text = f"{shard_i}/{shard_n}"
    start_after = None
    if args.checkpoint and os.path.exists(args.checkpoint):
        cp = Checkpoint.load(args.checkpoint)
        if cp.shard != shard_text:
            raise ConsistencyError(f"checkpoint belongs to shard {cp.shard}, not {shard_text}")
        have_l, have_s = _count_rows(ledger), _count_rows(summary)
        if have_l < cp.ledger_rows or have_s < cp.summary_rows:
            raise ConsistencyError("ledger is shorter than the checkpoint records; refusing to continue")
        # rows beyond the checkpoint come from a configuration that never finished
        if have_l > cp.ledger_rows:
            _truncate_rows(ledger, cp.ledger_rows)
        if have_s > cp.summary_rows:
            _truncate_rows(summary, cp.summary_rows)
        start_after = cp.last_completed
        ledger_count, summary_count = cp.ledger_rows, cp.summary_rows
    else:
        if _count_rows(ledger) or _count_rows(summary):
            raise ConsistencyError(f"{ledger} already holds rows but there is no checkpoint")
        for path, fields in ((ledger, LEDGER_FIELDS), (summary, SUMMARY_FIELDS)):
            with open(path, "w", newline="") as fh:
                csv.writer(fh).writerow(fields)
        ledger_count = summary_count = 0
    if start_after is not None:
        pairs = [(i, rec) for i, rec in pairs if i > start_after]
    if args.emit_designs:
        os.makedirs(args.emit_designs, exist_ok=True)
    jobs = [(i, rec, args.v, args.max_factorizations, args.emit_designs) for i, rec in pairs]
    if threads > 1:
        pool = ProcessPoolExecutor(threads)
        results = pool.map(_process, jobs)
    else:
        pool = None
        results = map(_process, jobs)
    try:
        for (index, _, _, _, _), (rows, summ) in zip(jobs, results):
            with open(ledger, "a", newline="") as fh:
                w = csv.DictWriter(fh, LEDGER_FIELDS)
                w.writerows(rows)
            with open(summary, "a", newline="") as fh:
                csv.DictWriter(fh, SUMMARY_FIELDS).writerow(summ)
            ledger_count += len(rows)
            summary_count += 1
            if args.checkpoint:
                Checkpoint(shard_text, index, ledger_count, summary_count).save(args.checkpoint)
            log.info("configuration %d: %d designs", index, len(rows))
    finally:
        if pool is not None:
            pool.shutdown()
    print(f"{summary_count} configurations, {ledger_count} designs in {ledger}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    if not args.ledger or args.v is None:
        raise UsageError("verify needs --v and at least one --ledger")
    designs, configs = [], []
    for path in args.ledger:
        designs += read_ledger(path)
        configs += read_summary(summary_path(path))
    seen = {}
    for row in designs:
        key = row["canonical_hex"]
        if key in seen:
            raise ConsistencyError(f"design {row['config_index']}/{row['design_seq']} repeats "
                                   f"{seen[key][0]}/{seen[key][1]}")
        seen[key] = (row["config_index"], row["design_seq"])
    complete = all(row["complete"] for row in configs)
    if args.manifest:
        m, r = stage_parameters(args.v)
        expected = {i for i, rec in _load_records(args, m, r)}
        complete = complete and expected == {row["config_index"] for row in configs}
    rows, marginal = analysis.aggregate_results(designs)
    print("aut_order,U,I1,I3,count")
    for row in rows:
        print(",".join(map(str, row)))
    print("aut_order,count")
    for row in marginal:
        print(",".join(map(str, row)))
    print(f"designs {len(designs)}")
    if not complete:
        print("scope: partial (no equality claim)")
        return EXIT_OK
    mass = analysis.mass_check(designs, configs, args.v)
    print(f"lhs = {mass.lhs}")
    print(f"rhs = {mass.rhs}")
    print(f"lhs == rhs: {str(mass.equal).lower()}")
    return EXIT_OK if mass.equal else EXIT_DATA


# --------------------------------------------------------------------------
# estimate

def cmd_estimate(args) -> int:
    rep = analysis.estimate_report(args.count, args.kirkman, args.sts19_part, args.sts19_total,
                                   args.latin_f or (10,))
    sys.stdout.write(rep.format())
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="steiner", description=__doc__.splitlines()[0])
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("configs", help="classify (m, r) configurations and write a manifest")
    c.add_argument("--m", type=int)
    c.add_argument("--r", type=int)
    c.add_argument("--out", help="output directory")
    c.add_argument("--exclude-wilson", action="store_true")
    c.set_defaults(func=cmd_configs)

    q = sub.add_parser("pipeline", help="extend configurations to designs, appending to a ledger")
    q.add_argument("--v", type=int)
    q.add_argument("--manifest", help="directory written by `configs`")
    q.add_argument("--shard", type=_shard, default=(0, 1))
    q.add_argument("--out", help="ledger CSV path")
    q.add_argument("--checkpoint")
    q.add_argument("--emit-designs", metavar="DIR")
    q.add_argument("--exclude-wilson", action="store_true")
    q.add_argument("--max-factorizations", type=int, help="process only the orbits of the first N factorizations")
    q.set_defaults(func=cmd_pipeline)

    v = sub.add_parser("verify", help="mass check and aggregate tables for finished ledgers")
    v.add_argument("--v", type=int)
    v.add_argument("--ledger", action="append")
    v.add_argument("--manifest")
    v.add_argument("--exclude-wilson", action="store_true")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("estimate", help="print the estimation formulas")
    e.add_argument("--count", type=int, default=analysis.DEFAULT_COUNT_WITH_SUB7)
    e.add_argument("--kirkman", type=int, default=analysis.DEFAULT_KIRKMAN_WITH_SUB7)
    e.add_argument("--sts19-part", type=int, default=analysis.DEFAULT_STS19_WITH_SUB7)
    e.add_argument("--sts19-total", type=int, default=analysis.DEFAULT_STS19_TOTAL)
    e.add_argument("--latin-f", type=int, action="append")
    e.set_defaults(func=cmd_estimate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"steiner: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"steiner: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConsistencyError, OSError, ValueError) as exc:
        print(f"steiner: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
