#!/usr/bin/env python3
"""Regenerate the shipped synthetic pair dataset (tests/data/synthetic_pair.csv).

Two AR-GARCH skew-t return series whose innovations are linked by a
Clayton copula, written with ISO business-day dates. Deterministic.
"""

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from covartail import copulas, margins

N = 1600
SEED = 20240817
THETA = 2.0

PAR_I = margins.ArGarchParams(0.01, 0.03, 0.04, 0.06, 0.92, 7.0, -0.2)
PAR_S = margins.ArGarchParams(0.02, 0.05, 0.05, 0.08, 0.90, 6.0, -0.1)


def business_days(start: date, count: int):
    out, d = [], start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d.isoformat())
        d += timedelta(days=1)
    return out


def main():
    smp = copulas.sample(copulas.clayton(THETA), N, seed=SEED)
    z_i = np.array([margins.skewt_quantile(u, PAR_I.eta, PAR_I.lambda_skew) for u in smp.u])
    z_s = np.array([margins.skewt_quantile(v, PAR_S.eta, PAR_S.lambda_skew) for v in smp.v])
    r_i = margins.simulate_ar_garch(PAR_I, N, innovations=z_i)
    r_s = margins.simulate_ar_garch(PAR_S, N, innovations=z_s)
    dates = business_days(date(2015, 1, 1), N)

    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "synthetic_pair.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "value_i", "value_s"])
        for d, a, b in zip(dates, r_i, r_s):
            writer.writerow([d, format(a, ".12g"), format(b, ".12g")])
    print(f"wrote {out} ({N} rows, seed {SEED}, clayton theta={THETA})")


if __name__ == "__main__":
    main()
