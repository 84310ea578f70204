"""Exporter command line.

    reqpair-export export --requirements reqs.csv --tasks embed,pos --out DIR \
        [--checkpoint embed=st:/path/to/encoder] [--batch-size N]

Exit codes: 0 success, 1 usage error, 2 data/checkpoint error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .backends import CheckpointError
from .export import TASKS, ExportError, ExportJob, export


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reqpair-export",
                     description="Export embedding/annotation interchange files")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("export", help="run an export job")
    p.add_argument("--requirements", required=True)
    p.add_argument("--tasks", required=True,
                   help=f"comma-separated subset of {','.join(TASKS)}")
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint", action="append", default=[],
                   metavar="TASK=IDENTIFIER",
                   help="override a task's checkpoint identifier")
    p.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    checkpoints = {}
    for spec in args.checkpoint:
        if "=" not in spec:
            print(f"reqpair-export: error: bad --checkpoint {spec!r}", file=sys.stderr)
            return 1
        task, identifier = spec.split("=", 1)
        checkpoints[task.strip()] = identifier.strip()
    try:
        job = ExportJob(
            requirements_path=Path(args.requirements),
            out_dir=Path(args.out),
            tasks=tuple(t.strip() for t in args.tasks.split(",") if t.strip()),
            checkpoints=checkpoints,
            batch_size=args.batch_size,
        )
        outputs = export(job)
    except (ExportError, CheckpointError, FileNotFoundError) as exc:
        print(f"reqpair-export: error: {exc}", file=sys.stderr)
        return 2
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
