#!/usr/bin/env python3
"""Run every bundled config and print one status line per suite."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from olab.cli import main as olab_main

ROOT = Path(__file__).resolve().parent.parent
# literal.json is expected to fail: it holds the printed displays that are false as stated
DEFAULT = ("classical", "lemmas", "claims", "theorem1", "fractional", "fractional_classical",
           "full")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", default=list(DEFAULT))
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    worst = 0
    for name in args.configs:
        path = ROOT / "configs" / f"{name}.json"
        print(f"== {name}")
        argv = ["run", str(path)] + ([] if args.seed is None else ["--seed", str(args.seed)])
        code = olab_main(argv)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
