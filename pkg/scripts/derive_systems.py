#!/usr/bin/env python3
"""Print (or save) the staged ODE systems for a range of dimensions.

Examples:
    python3 scripts/derive_systems.py --n 2..4
    python3 scripts/derive_systems.py --n 5 --format latex --out-dir build/
"""

import argparse
import sys
import time
from pathlib import Path

from weinorman import derive_hierarchy, emit

SUFFIX = {"plain": "txt", "latex": "tex", "json": "json"}


def parse_range(spec: str) -> range:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(spec), int(spec) + 1)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="2..4", help="dimension or range, e.g. 3 or 2..5")
    ap.add_argument("--format", default="plain", choices=sorted(SUFFIX))
    ap.add_argument("--out-dir", default=None, help="write files instead of stdout")
    args = ap.parse_args(argv)

    for N in parse_range(args.n):
        start = time.monotonic()
        text = emit(derive_hierarchy(N), args.format)
        elapsed = time.monotonic() - start
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"system_n{N}.{SUFFIX[args.format]}"
            path.write_text(text, encoding="utf-8")
            print(f"N={N}: {N * N - 1} equations in {elapsed:.3f}s -> {path}")
        else:
            print(f"# N = {N}  ({elapsed:.3f}s)")
            print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
