#!/usr/bin/env python3
"""Write seeded random fixture pairs for bulk experiments.

Each pair is one canonical disassembly document plus a matching class-model
JSON. Seeds are stable: rerunning with the same arguments reproduces the
same bytes.

Usage:
    python3 scripts/gen_fixtures.py OUTDIR [--count N] [--start-seed S]
"""

import argparse
from pathlib import Path

from hbclift.fixturegen import gen_fixture, write_fixture


def main() -> None:
    parser = argparse.ArgumentParser(
        description="generate seeded disassembly/class-model fixture pairs")
    parser.add_argument("outdir", type=Path)
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--start-seed", type=int, default=0)
    args = parser.parse_args()

    for seed in range(args.start_seed, args.start_seed + args.count):
        write_fixture(gen_fixture(seed), f"gen_{seed:04d}", args.outdir)
    print(f"wrote {args.count} fixture pairs to {args.outdir}")


if __name__ == "__main__":
    main()
