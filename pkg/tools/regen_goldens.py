#!/usr/bin/env python3
"""Regenerate the golden CLI outputs used by the regression tests.

Run from anywhere; paths are resolved against the repository root. The
commands below must match tests/test_acceptance.py exactly.
"""

import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent

ANALYZE_ARGS = ["analyze", "--input", "tests/data/synthetic_pair.csv", "--seed", "7"]
SIMULATE_ARGS = ["simulate", "--family", "clayton", "--theta", "1",
                 "--n-grid", "400", "--reps", "2", "--k-rule", "fixed:30",
                 "--seed", "5"]


def main():
    for args, sub in ((ANALYZE_ARGS, "analyze"), (SIMULATE_ARGS, "simulate")):
        out = REPO / "tests" / "data" / "golden" / sub
        out.mkdir(parents=True, exist_ok=True)
        cmd = [sys.executable, "-m", "covartail.cli"] + args + ["--out-dir", str(out)]
        subprocess.run(cmd, cwd=REPO, check=True)
        print(f"refreshed {out}")


if __name__ == "__main__":
    main()
